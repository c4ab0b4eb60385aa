//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-11,
            max_intervals: 4000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
    pub intervals: usize,
}

fn kronrod<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = T::cst(0.5) * (b - a);
    let center = T::cst(0.5) * (a + b);
    let fc = f(center);
    let mut kron = fc * T::cst(WGK[7]);
    let mut gauss = fc * T::cst(WG[3]);
    for j in 0..7 {
        let dx = half * T::cst(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kron += T::cst(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss += T::cst(WG[j / 2]) * pair;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Integral of `f` over `[a, b]`. The integrand is only evaluated at interior
/// points, so integrable endpoint singularities are allowed.
pub fn integrate<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    options: &QuadratureOptions,
) -> Result<Quadrature<T>> {
    if a == b {
        return Ok(Quadrature {
            value: T::zero(),
            error: T::zero(),
            intervals: 0,
        });
    }
    let (v, e) = kronrod(&mut f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let abs_tol = T::cst(options.abs_tol);
    let rel_tol = T::cst(options.rel_tol);
    loop {
        let total: T = intervals.iter().map(|x| x.2).sum();
        let err: T = intervals.iter().map(|x| x.3).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Numerical("non-finite integrand".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(Quadrature {
                value: total,
                error: err,
                intervals: intervals.len(),
            });
        }
        if intervals.len() >= options.max_intervals {
            return Err(Error::Accuracy(format!(
                "quadrature stopped at {} subintervals with error estimate {}",
                intervals.len(),
                err
            )));
        }
        let worst = (0..intervals.len())
            .max_by(|&i, &j| intervals[i].3.partial_cmp(&intervals[j].3).unwrap_or(std::cmp::Ordering::Equal))
            .expect("non-empty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = T::cst(0.5) * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            return Err(Error::Accuracy("quadrature subinterval below resolution".into()));
        }
        let (v1, e1) = kronrod(&mut f, lo, mid);
        let (v2, e2) = kronrod(&mut f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_and_singular_integrands() {
        let o = QuadratureOptions::default();
        let q = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, &o).unwrap();
        assert!((q.value - 2.0).abs() < 1e-13);
        let q = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &o).unwrap();
        assert!((q.value - 2.0).abs() < 1e-9);
        let q = integrate(|x: f64| x.ln(), 0.0, 1.0, &o).unwrap();
        assert!((q.value + 1.0).abs() < 1e-10);
        let q = integrate(|x: f64| x * x, 1.0, 0.0, &o).unwrap();
        assert!((q.value + 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn non_integrable_is_reported() {
        let o = QuadratureOptions {
            max_intervals: 200,
            ..QuadratureOptions::default()
        };
        assert!(integrate(|x: f64| 1.0 / x, 0.0, 1.0, &o).is_err());
    }
}
