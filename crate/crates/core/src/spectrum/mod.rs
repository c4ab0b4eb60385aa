//! Exact low-lying spectra and tunneling splittings.
//!
//! Basis convention for the full `2^L` space: bit `i` of a state index is set
//! when spin `i` points down (`σz_i = -1`), so index 0 is the all-up state.

mod dense;
mod grid;
mod lanczos;
mod sector;
mod thermal;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::SpinModel;
use crate::scalar::Real;

pub use dense::{
    gershgorin_bounds, symmetric_eigen, sturm_count, tridiagonal_eigen, tridiagonal_eigenvector,
    tridiagonal_kth_eigenvalue, Eigen,
};
pub use grid::{double_well_states, gap_double_well, GridSpec};
pub use lanczos::{lowest_eigenpairs, Eigenpairs, KrylovOptions, LinearOperator};
pub use sector::{gap_symmetric_sector, log_splitting, SymmetricSectorHamiltonian};
pub use thermal::{thermal_averages, ThermalAverages};

/// Largest chain for which the dense Hamiltonian is stored explicitly.
pub const DENSE_MAX_SIZE: usize = 12;
/// Largest system handled by the matrix-free iterative solver.
pub const SPARSE_MAX_SIZE: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumMethod {
    DenseFull,
    SparseIterative,
    SymmetricSector,
    GridSchrodinger,
}

impl std::fmt::Display for SpectrumMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SpectrumMethod::DenseFull => "dense-full",
            SpectrumMethod::SparseIterative => "sparse-iterative",
            SpectrumMethod::SymmetricSector => "symmetric-sector",
            SpectrumMethod::GridSchrodinger => "grid-schrodinger",
        };
        f.write_str(s)
    }
}

/// Lowest energies of a Hamiltonian and the splitting `Δ = E₁ - E₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult<T> {
    pub eigenvalues: Vec<T>,
    pub delta: T,
    pub method: SpectrumMethod,
    /// Largest eigen-residual norm of the returned states.
    pub residual: T,
    /// Discretization error estimate (grid solver only).
    pub accuracy: Option<T>,
}

impl<T: Real> SpectrumResult<T> {
    fn new(eigenvalues: Vec<T>, method: SpectrumMethod, residual: T) -> Self {
        let delta = (eigenvalues[1] - eigenvalues[0]).max(T::zero());
        Self {
            eigenvalues,
            delta,
            method,
            residual,
            accuracy: None,
        }
    }
}

/// Matrix-free `2^L`-dimensional spin Hamiltonian.
pub struct SpinHamiltonian<T> {
    size: usize,
    gamma: T,
    diagonal: Vec<T>,
}

impl<T: Real> SpinHamiltonian<T> {
    pub fn new(model: &SpinModel<T>) -> Result<Self> {
        let size = model.size();
        if size > SPARSE_MAX_SIZE {
            return Err(Error::Capacity(format!(
                "2^{size} amplitudes exceed the {SPARSE_MAX_SIZE}-spin limit of the full-space solvers"
            )));
        }
        let dim = 1usize << size;
        let mut spins = vec![1i8; size];
        let diagonal = (0..dim)
            .map(|state| {
                for (i, s) in spins.iter_mut().enumerate() {
                    *s = if state >> i & 1 == 1 { -1 } else { 1 };
                }
                model.classical_energy_unchecked(&spins)
            })
            .collect();
        Ok(Self {
            size,
            gamma: model.gamma(),
            diagonal,
        })
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diagonal
    }

    /// Explicit row-major matrix.
    pub fn to_dense(&self) -> Vec<T> {
        let n = self.dim();
        let mut a = vec![T::zero(); n * n];
        for state in 0..n {
            a[state * n + state] = self.diagonal[state];
            for i in 0..self.size {
                a[state * n + (state ^ (1 << i))] = -self.gamma;
            }
        }
        a
    }
}

impl<T: Real> LinearOperator<T> for SpinHamiltonian<T> {
    fn dim(&self) -> usize {
        self.diagonal.len()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        for (state, out) in y.iter_mut().enumerate() {
            let mut flip = T::zero();
            for i in 0..self.size {
                flip += x[state ^ (1 << i)];
            }
            *out = self.diagonal[state] * x[state] - self.gamma * flip;
        }
    }
}

fn residual_norm<T: Real>(a: &[T], n: usize, lambda: T, v: &[T]) -> T {
    (0..n)
        .map(|i| {
            let row = &a[i * n..(i + 1) * n];
            let av: T = row.iter().zip(v).map(|(&x, &y)| x * y).sum();
            let d = av - lambda * v[i];
            d * d
        })
        .sum::<T>()
        .sqrt()
}

/// Full diagonalization of the `2^L` Hamiltonian (`L ≤ 12`). Returns the four
/// lowest levels (or all of them for `L = 1`).
pub fn gap_dense<T: Real>(model: &SpinModel<T>) -> Result<SpectrumResult<T>> {
    let size = model.size();
    if size > DENSE_MAX_SIZE {
        return Err(Error::Capacity(format!(
            "dense diagonalization stores 2^L x 2^L entries; L = {size} exceeds {DENSE_MAX_SIZE}"
        )));
    }
    let op = SpinHamiltonian::new(model)?;
    let n = op.dim();
    let a = op.to_dense();
    let eig = symmetric_eigen(&a, n, true)?;
    let k = n.min(4);
    let vectors = eig.vectors.expect("vectors requested");
    let residual = (0..k)
        .map(|i| residual_norm(&a, n, eig.values[i], &vectors[i]))
        .fold(T::zero(), T::max);
    Ok(SpectrumResult::new(eig.values[..k].to_vec(), SpectrumMethod::DenseFull, residual))
}

/// The `k` lowest levels by the matrix-free block Krylov solver (`L ≤ 24`).
pub fn gap_sparse<T: Real>(model: &SpinModel<T>, k: usize) -> Result<SpectrumResult<T>> {
    if k < 2 {
        return Err(Error::Input("at least two levels are needed for a gap".into()));
    }
    let op = SpinHamiltonian::new(model)?;
    if k > op.dim() {
        return Err(Error::Input(format!("{k} levels requested from a {}-dimensional space", op.dim())));
    }
    let pairs = lowest_eigenpairs(&op, k, &KrylovOptions::default())?;
    Ok(SpectrumResult::new(pairs.values, SpectrumMethod::SparseIterative, pairs.residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_spin_gap_is_two_gamma() {
        for model in [
            SpinModel::chain(1, 0.37).unwrap(),
            SpinModel::fully_connected(1, 0.37).unwrap(),
        ] {
            let r = gap_dense(&model).unwrap();
            assert_eq!(r.eigenvalues.len(), 2);
            assert_abs_diff_eq!(r.delta, 0.74, epsilon = 1e-14);
        }
    }

    #[test]
    fn classical_point_is_degenerate() {
        let r = gap_dense(&SpinModel::chain(6, 0.0).unwrap()).unwrap();
        assert_eq!(r.delta, 0.0);
        assert_abs_diff_eq!(r.eigenvalues[0], -6.0, epsilon = 1e-14);
        let r = gap_dense(&SpinModel::fully_connected(5, 0.0).unwrap()).unwrap();
        assert_eq!(r.delta, 0.0);
    }

    #[test]
    fn sparse_matches_dense_chain() {
        let model = SpinModel::chain(10, 0.7).unwrap();
        let d = gap_dense(&model).unwrap();
        let s = gap_sparse(&model, 2).unwrap();
        assert_eq!(s.method, SpectrumMethod::SparseIterative);
        assert_abs_diff_eq!(d.eigenvalues[0], s.eigenvalues[0], epsilon = 1e-9);
        assert_abs_diff_eq!(d.delta, s.delta, epsilon = 1e-9);
        assert!(d.residual < 1e-10);
    }

    #[test]
    fn sparse_matches_dense_open_chain_with_field() {
        let model = SpinModel::open_chain(8, 0.6).unwrap().with_field(0.05).unwrap();
        let d = gap_dense(&model).unwrap();
        let s = gap_sparse(&model, 3).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(d.eigenvalues[i], s.eigenvalues[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn capacity_limits() {
        assert!(matches!(
            gap_dense(&SpinModel::chain(13, 0.5).unwrap()),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            gap_sparse(&SpinModel::chain(25, 0.5).unwrap(), 2),
            Err(Error::Capacity(_))
        ));
        assert!(gap_sparse(&SpinModel::chain(4, 0.5).unwrap(), 1).is_err());
    }

    #[test]
    fn gap_shrinks_with_size() {
        for model_at in [
            |l| SpinModel::chain(l, 0.7).unwrap(),
            |l| SpinModel::fully_connected(l, 0.7).unwrap(),
        ] {
            let gaps: Vec<f64> = (4..=10).map(|l| gap_dense(&model_at(l)).unwrap().delta).collect();
            for w in gaps.windows(2) {
                assert!(w[1] < w[0], "{gaps:?}");
            }
        }
    }
}
