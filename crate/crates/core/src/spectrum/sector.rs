//! Maximum-total-spin sector of permutation-symmetric models.
//!
//! With `|S, M>` the eigenstates of total `S²` and `Sz`, the Hamiltonian
//! `-Γ Σσx - L g(m)` is tridiagonal in `M`:
//!
//! ```text
//! H_{M,M}   = -L g(2M/L)
//! H_{M,M-1} = -Γ √((S+M)(S-M+1))
//! ```

use crate::error::{Error, Result};
use crate::models::SpinModel;
use crate::scalar::Real;

use super::dense::{tridiagonal_eigenvector, tridiagonal_kth_eigenvalue};
use super::{SpectrumMethod, SpectrumResult};

/// Tridiagonal Hamiltonian of the total-spin-`S` sector, indexed by
/// `j = M + S = 0..=2S`.
#[derive(Clone, Debug)]
pub struct SymmetricSectorHamiltonian<T> {
    two_s: usize,
    diagonal: Vec<T>,
    offdiagonal: Vec<T>,
}

impl<T: Real> SymmetricSectorHamiltonian<T> {
    /// Sector of total spin `S = two_s / 2`. The maximal sector is `two_s = L`.
    pub fn new(model: &SpinModel<T>, two_s: usize) -> Result<Self> {
        if !model.is_permutation_symmetric() {
            return Err(Error::Input(format!(
                "total-spin sectors require a permutation-symmetric model, got {}",
                model.topology()
            )));
        }
        let l = model.size();
        if two_s > l || (l - two_s) % 2 != 0 {
            return Err(Error::Input(format!("no spin-{two_s}/2 sector for {l} spins")));
        }
        let lt = T::from_count(l);
        let g = model.potential();
        let diagonal = (0..=two_s)
            .map(|j| {
                let m = (T::from_count(2 * j) - T::from_count(two_s)) / lt;
                -lt * g.value(m)
            })
            .collect();
        let gamma = model.gamma();
        let offdiagonal = (0..two_s)
            .map(|j| -gamma * (T::from_count(j + 1) * T::from_count(two_s - j)).sqrt())
            .collect();
        Ok(Self {
            two_s,
            diagonal,
            offdiagonal,
        })
    }

    /// The maximal sector `S = L/2`, which contains the ground state.
    pub fn ground_sector(model: &SpinModel<T>) -> Result<Self> {
        Self::new(model, model.size())
    }

    pub fn two_s(&self) -> usize {
        self.two_s
    }

    pub fn dim(&self) -> usize {
        self.two_s + 1
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diagonal
    }

    pub fn offdiagonal(&self) -> &[T] {
        &self.offdiagonal
    }

    /// Ground energy and ground vector with the sign fixed so that the
    /// components sum to a positive number.
    pub fn ground_state(&self) -> Result<(T, Vec<T>)> {
        let e0 = tridiagonal_kth_eigenvalue(&self.diagonal, &self.offdiagonal, 0)?;
        let (mut v, _) = tridiagonal_eigenvector(&self.diagonal, &self.offdiagonal, e0)?;
        if v.iter().copied().sum::<T>() < T::zero() {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
        Ok((e0, v))
    }
}

/// Lowest levels of the maximal-spin sector. For permutation-symmetric models
/// the sector gap equals the gap of the full `2^L` space.
pub fn gap_symmetric_sector<T: Real>(model: &SpinModel<T>) -> Result<SpectrumResult<T>> {
    let h = SymmetricSectorHamiltonian::ground_sector(model)?;
    let k = h.dim().min(4);
    let mut values = Vec::with_capacity(k);
    let mut residual = T::zero();
    for i in 0..k {
        let e = tridiagonal_kth_eigenvalue(&h.diagonal, &h.offdiagonal, i)?;
        let (_, r) = tridiagonal_eigenvector(&h.diagonal, &h.offdiagonal, e)?;
        residual = residual.max(r);
        values.push(e);
    }
    Ok(SpectrumResult::new(values, SpectrumMethod::SymmetricSector, residual))
}

/// One parity block of the half chain `M ≥ 0` (or `M ≥ 1/2`). Row `j` reads
/// `lower[j-1] C_{j-1} + diag[j] C_j + upper[j] C_{j+1}`.
struct HalfChain<T> {
    diag: Vec<T>,
    upper: Vec<T>,
    lower: Vec<T>,
}

impl<T: Real> HalfChain<T> {
    fn lowest_energy(&self) -> Result<T> {
        let off: Vec<T> = self
            .upper
            .iter()
            .zip(&self.lower)
            .map(|(&u, &l)| -(u * l).sqrt())
            .collect();
        tridiagonal_kth_eigenvalue(&self.diag, &off, 0)
    }

    /// `ln C_j` of the positive eigenvector at energy `e`, built from ratio
    /// recurrences run inward from both ends and joined where the mismatch of
    /// the two sweeps is smallest.
    fn log_vector(&self, e: T) -> Result<Vec<T>> {
        let n = self.diag.len();
        if n == 1 {
            return Ok(vec![T::zero()]);
        }
        // forward[j] = C_{j+1} / C_j
        let mut forward = vec![T::zero(); n - 1];
        for j in 0..n - 1 {
            let mut num = e - self.diag[j];
            if j > 0 {
                num -= self.lower[j - 1] / forward[j - 1];
            }
            forward[j] = num / self.upper[j];
        }
        // backward[j] = C_{j-1} / C_j
        let mut backward = vec![T::zero(); n];
        for j in (1..n).rev() {
            let mut num = e - self.diag[j];
            if j + 1 < n {
                num -= self.upper[j] / backward[j + 1];
            }
            backward[j] = num / self.lower[j - 1];
        }
        let mut twist = 0;
        let mut best = T::infinity();
        for k in 0..n {
            let mut gamma = self.diag[k] - e;
            if k > 0 {
                gamma += self.lower[k - 1] / forward[k - 1];
            }
            if k + 1 < n {
                gamma += self.upper[k] / backward[k + 1];
            }
            if gamma.is_finite() && gamma.abs() < best {
                best = gamma.abs();
                twist = k;
            }
        }
        let mut log_c = vec![T::zero(); n];
        for j in (0..twist).rev() {
            let r = forward[j];
            if !(r > T::zero()) || !r.is_finite() {
                return Err(Error::Numerical("non-positive amplitude ratio in the sector ground state".into()));
            }
            log_c[j] = log_c[j + 1] - r.ln();
        }
        for j in twist + 1..n {
            let s = backward[j];
            if !(s > T::zero()) || !s.is_finite() {
                return Err(Error::Numerical("non-positive amplitude ratio in the sector ground state".into()));
            }
            log_c[j] = log_c[j - 1] - s.ln();
        }
        Ok(log_c)
    }
}

fn log_sum_exp<T: Real>(terms: impl Iterator<Item = T> + Clone) -> T {
    let top = terms.clone().fold(T::neg_infinity(), T::max);
    top + terms.map(|t| (t - top).exp()).sum::<T>().ln()
}

/// Natural logarithm of the ground-state splitting of a flip-symmetric,
/// permutation-symmetric model, accurate even when `Δ` is far below the
/// round-off of the energies themselves.
///
/// With `ψ` the even and `φ` the odd ground vector of the maximal-spin sector,
/// summing `φ (Hψ) - ψ (Hφ)` over the half chain `M > 0` telescopes to the
/// single coupling across `M = 0`:
///
/// ```text
/// Δ = |t₁| φ₁ ψ₀ / Σ_{M≥1} φ_M ψ_M                 (L even)
/// Δ = 2 |t_c| φ_½ ψ_½ / Σ_{M≥½} φ_M ψ_M            (L odd, t_c = -Γ(L+1)/2)
/// ```
///
/// Both vectors are positive and are obtained in logarithmic form, so no
/// difference of nearly equal numbers is ever taken.
pub fn log_splitting<T: Real>(model: &SpinModel<T>) -> Result<T> {
    if !model.is_permutation_symmetric() || !model.is_flip_symmetric() {
        return Err(Error::Input(
            "log splitting needs a permutation- and flip-symmetric model".into(),
        ));
    }
    if model.gamma() <= T::zero() {
        return Err(Error::Domain("log splitting needs Γ > 0".into()));
    }
    let l = model.size();
    if l < 2 {
        return Ok((T::cst(2.0) * model.gamma()).ln());
    }
    let full = SymmetricSectorHamiltonian::ground_sector(model)?;
    let center = l / 2;
    if l % 2 == 0 {
        // j = M + S, so M = 0 sits at j = center
        let d: Vec<T> = full.diagonal[center..].to_vec();
        let t: Vec<T> = full.offdiagonal[center..].to_vec(); // t[i] couples M = i and M = i + 1
        let mut upper_even = t.clone();
        upper_even[0] = T::cst(2.0) * t[0];
        let even = HalfChain {
            diag: d.clone(),
            upper: upper_even,
            lower: t.clone(),
        };
        let odd = HalfChain {
            diag: d[1..].to_vec(),
            upper: t[1..].to_vec(),
            lower: t[1..].to_vec(),
        };
        let psi = even.log_vector(even.lowest_energy()?)?;
        let phi = odd.log_vector(odd.lowest_energy()?)?;
        let overlap = log_sum_exp((0..phi.len()).map(|i| phi[i] + psi[i + 1]));
        Ok(t[0].abs().ln() + phi[0] + psi[0] - overlap)
    } else {
        // M = ±1/2 at j = center, center + 1
        let tc = full.offdiagonal[center];
        let d: Vec<T> = full.diagonal[center + 1..].to_vec();
        let t: Vec<T> = full.offdiagonal[center + 1..].to_vec();
        let block = |sign: T| {
            let mut diag = d.clone();
            diag[0] += sign * tc;
            HalfChain {
                diag,
                upper: t.clone(),
                lower: t.clone(),
            }
        };
        let even = block(T::one());
        let odd = block(-T::one());
        let psi = even.log_vector(even.lowest_energy()?)?;
        let phi = odd.log_vector(odd.lowest_energy()?)?;
        let overlap = log_sum_exp((0..phi.len()).map(|i| phi[i] + psi[i]));
        Ok((T::cst(2.0) * tc.abs()).ln() + phi[0] + psi[0] - overlap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::gap_dense;
    use approx::assert_abs_diff_eq;

    #[test]
    fn structure_of_maximal_sector() {
        let model = SpinModel::fully_connected(6, 0.5).unwrap();
        let h = SymmetricSectorHamiltonian::ground_sector(&model).unwrap();
        assert_eq!(h.dim(), 7);
        assert!(h.offdiagonal().iter().all(|&t| t < 0.0));
        // end points are the polarized states, energy -L/2
        assert_abs_diff_eq!(h.diagonal()[0], -3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h.diagonal()[6], -3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h.offdiagonal()[0], -0.5 * 6f64.sqrt(), epsilon = 1e-14);
        assert!(SymmetricSectorHamiltonian::new(&model, 5).is_err());
        assert!(SymmetricSectorHamiltonian::new(&SpinModel::chain(6, 0.5).unwrap(), 6).is_err());
    }

    #[test]
    fn two_spins_match_dense() {
        for gamma in [0.1, 0.5, 1.3] {
            let model = SpinModel::fully_connected(2, gamma).unwrap();
            let d = gap_dense(&model).unwrap();
            let s = gap_symmetric_sector(&model).unwrap();
            assert_abs_diff_eq!(d.eigenvalues[0], s.eigenvalues[0], epsilon = 1e-12);
            assert_abs_diff_eq!(d.delta, s.delta, epsilon = 1e-12);
        }
    }

    #[test]
    fn eight_spins_match_dense() {
        for h in [0.0, 0.07] {
            let model = SpinModel::fully_connected(8, 0.5).unwrap().with_field(h).unwrap();
            let d = gap_dense(&model).unwrap();
            let s = gap_symmetric_sector(&model).unwrap();
            assert_abs_diff_eq!(d.delta, s.delta, epsilon = 1e-10);
            assert!(s.residual < 1e-10);
        }
    }

    #[test]
    fn ground_vector_is_positive() {
        for (l, gamma) in [(9, 0.3), (40, 0.6), (101, 0.9)] {
            let model = SpinModel::fully_connected(l, gamma).unwrap();
            let (_, v) = SymmetricSectorHamiltonian::ground_sector(&model).unwrap().ground_state().unwrap();
            assert!(v.iter().all(|&x| x > 0.0), "L={l}");
        }
    }

    #[test]
    fn log_splitting_matches_direct_gap() {
        for l in [2usize, 3, 7, 10, 21, 30] {
            for gamma in [0.4f64, 0.6] {
                let model = SpinModel::fully_connected(l, gamma).unwrap();
                let direct = gap_symmetric_sector(&model).unwrap().delta;
                let logd = log_splitting(&model).unwrap();
                assert!((logd - direct.ln()).abs() < 1e-7, "L={l} Γ={gamma}: {logd} vs {}", direct.ln());
            }
        }
    }

    #[test]
    fn log_splitting_reaches_far_below_round_off() {
        let model = SpinModel::fully_connected(600, 0.4f64).unwrap();
        let logd = log_splitting(&model).unwrap();
        assert!(logd.is_finite() && logd < -300.0);
        assert!(log_splitting(&SpinModel::fully_connected(6, 0.4).unwrap().with_field(0.1).unwrap()).is_err());
    }
}
