//! Finite-difference Schrödinger solver for the quartic double well.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::DoubleWell;
use crate::scalar::Real;

use super::dense::{tridiagonal_eigenvector, tridiagonal_kth_eigenvalue};
use super::{SpectrumMethod, SpectrumResult};

/// Uniform grid on `[-x_max, x_max]` with Dirichlet walls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    /// Half width; `None` selects `2.5 x_min + 2`.
    pub x_max: Option<T>,
    /// Interior grid points of the coarse grid.
    pub points: usize,
    /// Largest tolerated relative change of `Δ` under grid refinement.
    pub tolerance: T,
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        Self {
            x_max: None,
            points: 4096,
            tolerance: T::cst(1e-3),
        }
    }
}

impl<T: Real> GridSpec<T> {
    fn half_width(&self, dw: &DoubleWell<T>) -> T {
        self.x_max.unwrap_or(T::cst(2.5) * dw.x_min() + T::cst(2.0))
    }

    fn validate(&self, dw: &DoubleWell<T>) -> Result<T> {
        let x_max = self.half_width(dw);
        if !(x_max >= T::cst(2.0) * dw.x_min()) {
            return Err(Error::Input(format!(
                "grid half width {x_max} must be at least twice the well position {}",
                dw.x_min()
            )));
        }
        if self.points < 16 {
            return Err(Error::Input("grid needs at least 16 points".into()));
        }
        Ok(x_max)
    }
}

struct Discretization<T> {
    x: Vec<T>,
    diag: Vec<T>,
    off: Vec<T>,
}

/// Second-order central differences for `-1/(2 mass) d²/dx² + V(x)`.
fn discretize<T: Real>(dw: &DoubleWell<T>, x_max: T, points: usize) -> Discretization<T> {
    let h = T::cst(2.0) * x_max / T::from_count(points + 1);
    let kinetic = T::one() / (T::cst(2.0) * dw.mass * h * h);
    let x: Vec<T> = (1..=points).map(|i| -x_max + h * T::from_count(i)).collect();
    let diag = x.iter().map(|&xi| T::cst(2.0) * kinetic + dw.potential(xi)).collect();
    let off = vec![-kinetic; points - 1];
    Discretization { x, diag, off }
}

fn lowest<T: Real>(d: &Discretization<T>, k: usize) -> Result<Vec<T>> {
    (0..k).map(|i| tridiagonal_kth_eigenvalue(&d.diag, &d.off, i)).collect()
}

/// Ground-doublet splitting `Δ(λ)` of `p²/(2 mass) + λx⁴ - x²`.
///
/// The levels are computed on the requested grid and on one with half the
/// spacing; the reported levels are the Richardson combination of the two, and
/// the refinement must change `Δ` by less than `grid.tolerance` (relative).
pub fn gap_double_well<T: Real>(dw: &DoubleWell<T>, grid: &GridSpec<T>) -> Result<SpectrumResult<T>> {
    let x_max = grid.validate(dw)?;
    let k = 3;
    let coarse = discretize(dw, x_max, grid.points);
    let fine = discretize(dw, x_max, 2 * grid.points + 1);
    let ec = lowest(&coarse, k)?;
    let ef = lowest(&fine, k)?;
    let delta_c = ec[1] - ec[0];
    let delta_f = ef[1] - ef[0];
    let change = (delta_f - delta_c).abs() / delta_f.abs().max(T::min_positive_value());
    if !(change < grid.tolerance) {
        return Err(Error::Accuracy(format!(
            "grid refinement changed the gap by a relative {change}; use more points"
        )));
    }
    let three = T::cst(3.0);
    let extrapolated: Vec<T> = ec.iter().zip(&ef).map(|(&c, &f)| (T::cst(4.0) * f - c) / three).collect();
    let mut residual = T::zero();
    for &e in &ef {
        let (_, r) = tridiagonal_eigenvector(&fine.diag, &fine.off, e)?;
        residual = residual.max(r);
    }
    let mut result = SpectrumResult::new(extrapolated, SpectrumMethod::GridSchrodinger, residual);
    result.accuracy = Some((delta_f - delta_c).abs() / three);
    Ok(result)
}

/// Grid points and the `k` lowest normalized eigenfunctions on the refined grid
/// used by [`gap_double_well`], sign-fixed so each is positive just right of
/// the origin.
pub fn double_well_states<T: Real>(
    dw: &DoubleWell<T>,
    grid: &GridSpec<T>,
    k: usize,
) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let x_max = grid.validate(dw)?;
    let fine = discretize(dw, x_max, 2 * grid.points + 1);
    let values = lowest(&fine, k)?;
    let h = T::cst(2.0) * x_max / T::from_count(fine.x.len() + 1);
    let probe = fine.x.iter().position(|&x| x > dw.x_min() * T::cst(0.5)).unwrap_or(0);
    let mut states = Vec::with_capacity(k);
    for e in values {
        let (mut v, _) = tridiagonal_eigenvector(&fine.diag, &fine.off, e)?;
        let scale = T::one() / h.sqrt();
        let sign = if v[probe] < T::zero() { -scale } else { scale };
        for x in v.iter_mut() {
            *x *= sign;
        }
        states.push(v);
    }
    Ok((fine.x, states))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steep_quartic_is_far_from_degenerate() {
        let dw = DoubleWell::new(5.0).unwrap();
        let r = gap_double_well(&dw, &GridSpec::default()).unwrap();
        assert!(r.delta > 0.5);
        assert!(r.eigenvalues.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn parity_alternates() {
        let dw = DoubleWell::new(0.2f64).unwrap();
        let grid = GridSpec {
            points: 1024,
            ..GridSpec::default()
        };
        let (x, states) = double_well_states(&dw, &grid, 2).unwrap();
        let n = x.len();
        for (k, psi) in states.iter().enumerate() {
            let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
            let worst = (0..n).map(|i| (psi[i] - parity * psi[n - 1 - i]).abs()).fold(0.0, f64::max);
            assert!(worst < 1e-8, "state {k}: {worst}");
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let dw = DoubleWell::new(0.05).unwrap();
        let grid = GridSpec {
            points: 24,
            ..GridSpec::default()
        };
        assert!(matches!(gap_double_well(&dw, &grid), Err(Error::Accuracy(_))));
        let narrow = GridSpec {
            x_max: Some(1.0),
            ..GridSpec::default()
        };
        assert!(matches!(gap_double_well(&dw, &narrow), Err(Error::Input(_))));
    }
}
