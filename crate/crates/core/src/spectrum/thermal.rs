//! Exact thermal expectation values from the full spectrum of small systems.

use crate::error::{Error, Result};
use crate::models::SpinModel;
use crate::scalar::Real;

use super::dense::symmetric_eigen;
use super::{LinearOperator, SpinHamiltonian, DENSE_MAX_SIZE};

/// Canonical averages at inverse temperature `β`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalAverages<T> {
    pub energy: T,
    /// `<(1/L) Σ σx_i>`.
    pub sigma_x: T,
    /// `<m²>` with `m = (1/L) Σ σz_i`.
    pub m2: T,
    /// `<|m|>`.
    pub abs_m: T,
}

pub fn thermal_averages<T: Real>(model: &SpinModel<T>, beta: T) -> Result<ThermalAverages<T>> {
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(Error::Input(format!("inverse temperature must be positive and finite, got {beta}")));
    }
    let size = model.size();
    if size > DENSE_MAX_SIZE {
        return Err(Error::Capacity(format!("thermal oracle limited to L <= {DENSE_MAX_SIZE}")));
    }
    let op = SpinHamiltonian::new(model)?;
    let n = op.dim();
    let eig = symmetric_eigen(&op.to_dense(), n, true)?;
    let vectors = eig.vectors.expect("vectors requested");
    let lt = T::from_count(size);
    let magnetization: Vec<T> = (0..n)
        .map(|state| {
            let down = T::from_count((state as u64).count_ones() as usize);
            (lt - T::cst(2.0) * down) / lt
        })
        .collect();
    let e0 = eig.values[0];
    let mut z = T::zero();
    let mut acc = ThermalAverages {
        energy: T::zero(),
        sigma_x: T::zero(),
        m2: T::zero(),
        abs_m: T::zero(),
    };
    for (e, v) in eig.values.iter().zip(&vectors) {
        let w = (-beta * (*e - e0)).exp();
        if w < T::cst(1e-300).max(T::min_positive_value()) {
            continue;
        }
        z += w;
        acc.energy += w * *e;
        let mut sx = T::zero();
        let mut m2 = T::zero();
        let mut am = T::zero();
        for state in 0..n {
            let p = v[state] * v[state];
            m2 += p * magnetization[state] * magnetization[state];
            am += p * magnetization[state].abs();
            let mut flips = T::zero();
            for i in 0..size {
                flips += v[state ^ (1 << i)];
            }
            sx += v[state] * flips;
        }
        acc.sigma_x += w * sx / lt;
        acc.m2 += w * m2;
        acc.abs_m += w * am;
    }
    Ok(ThermalAverages {
        energy: acc.energy / z,
        sigma_x: acc.sigma_x / z,
        m2: acc.m2 / z,
        abs_m: acc.abs_m / z,
    })
}
