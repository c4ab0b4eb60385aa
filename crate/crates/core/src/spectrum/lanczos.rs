//! Restarted block Krylov eigensolver for the lowest eigenpairs of a large
//! symmetric operator applied matrix-free.

use crate::error::{Error, Result};
use crate::rng::splitmix64;
use crate::scalar::Real;

use super::dense::symmetric_eigen;

/// Symmetric operator `y = A x` on vectors of length `dim()`.
pub trait LinearOperator<T: Real>: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[T], y: &mut [T]);
}

#[derive(Clone, Copy, Debug)]
pub struct KrylovOptions {
    /// Extra block vectors beyond the requested count.
    pub guard_vectors: usize,
    /// Upper bound on the Krylov basis size per restart cycle.
    pub max_basis: usize,
    pub max_restarts: usize,
    /// Residual tolerance `|A x - θ x|` relative to `max(1, |θ|)`.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            guard_vectors: 1,
            max_basis: 48,
            max_restarts: 400,
            tolerance: 1e-10,
            seed: 0x243f_6a88_85a3_08d3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpairs<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
    /// Largest residual norm among the returned pairs.
    pub residual: T,
    pub restarts: usize,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

fn random_vector<T: Real>(n: usize, state: &mut u64) -> Vec<T> {
    (0..n)
        .map(|_| {
            *state = splitmix64(*state);
            T::cst((*state >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        })
        .collect()
}

/// Orthogonalizes `v` against `basis` (two classical Gram-Schmidt passes) and
/// normalizes it. Returns false when `v` lies numerically inside the span.
fn orthonormalize_against<T: Real>(v: &mut [T], basis: &[Vec<T>]) -> bool {
    let before = norm(v);
    if before == T::zero() {
        return false;
    }
    for _ in 0..2 {
        let coeffs: Vec<T> = basis.iter().map(|q| dot(q, v)).collect();
        for (q, c) in basis.iter().zip(coeffs) {
            axpy(-c, q, v);
        }
    }
    let after = norm(v);
    if after <= before * T::cst(1e-10) || after == T::zero() {
        return false;
    }
    for x in v.iter_mut() {
        *x /= after;
    }
    true
}

/// The `k` lowest eigenpairs of `op`.
///
/// Each cycle grows a block Krylov basis from the current Ritz block with full
/// reorthogonalization, projects the operator (Rayleigh-Ritz) and restarts from
/// the lowest Ritz vectors. A block wider than `k` separates a near-degenerate
/// pair in the first cycle instead of relying on round-off to seed the partner.
pub fn lowest_eigenpairs<T: Real, O: LinearOperator<T>>(
    op: &O,
    k: usize,
    options: &KrylovOptions,
) -> Result<Eigenpairs<T>> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::Input(format!("cannot compute {k} eigenpairs of a {n}-dimensional operator")));
    }
    let block = (k + options.guard_vectors).min(n);
    let max_basis = options.max_basis.max(2 * block).min(n);
    let mut state = options.seed;

    let mut start: Vec<Vec<T>> = Vec::with_capacity(block);
    while start.len() < block {
        let mut v = random_vector::<T>(n, &mut state);
        if orthonormalize_against(&mut v, &start) {
            start.push(v);
        }
    }

    let tol = T::cst(options.tolerance);
    let mut last_residual = T::infinity();
    for restart in 0..=options.max_restarts {
        let mut basis: Vec<Vec<T>> = Vec::with_capacity(max_basis);
        let mut images: Vec<Vec<T>> = Vec::with_capacity(max_basis);
        let mut current = std::mem::take(&mut start);
        loop {
            let mut produced = Vec::with_capacity(current.len());
            for v in current.drain(..) {
                let mut w = vec![T::zero(); n];
                op.apply(&v, &mut w);
                basis.push(v);
                images.push(w.clone());
                produced.push(w);
            }
            if basis.len() >= max_basis {
                break;
            }
            let room = max_basis - basis.len();
            for mut w in produced {
                let mut accepted =
                    orthonormalize_against(&mut w, &basis) && orthonormalize_against(&mut w, &current);
                let mut tries = 0;
                while !accepted && tries < 4 {
                    w = random_vector(n, &mut state);
                    accepted = orthonormalize_against(&mut w, &basis) && orthonormalize_against(&mut w, &current);
                    tries += 1;
                }
                if accepted && current.len() < room {
                    current.push(w);
                }
            }
            if current.is_empty() {
                break;
            }
        }

        // Rayleigh-Ritz on span(basis)
        let s = basis.len();
        let mut proj = vec![T::zero(); s * s];
        for i in 0..s {
            for j in i..s {
                let a = T::cst(0.5) * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
                proj[i * s + j] = a;
                proj[j * s + i] = a;
            }
        }
        let eig = symmetric_eigen(&proj, s, true)?;
        let ys = eig.vectors.expect("vectors requested");
        let keep = block.min(s);
        let mut ritz = Vec::with_capacity(keep);
        let mut ritz_images = Vec::with_capacity(keep);
        for y in ys.iter().take(keep) {
            let mut x = vec![T::zero(); n];
            let mut ax = vec![T::zero(); n];
            for (j, &c) in y.iter().enumerate() {
                axpy(c, &basis[j], &mut x);
                axpy(c, &images[j], &mut ax);
            }
            ritz.push(x);
            ritz_images.push(ax);
        }
        drop(basis);
        drop(images);

        let mut worst = T::zero();
        let mut converged = true;
        for i in 0..k {
            let theta = eig.values[i];
            let r: T = ritz_images[i]
                .iter()
                .zip(&ritz[i])
                .map(|(&a, &x)| {
                    let d = a - theta * x;
                    d * d
                })
                .sum::<T>()
                .sqrt();
            worst = worst.max(r);
            if r > tol * theta.abs().max(T::one()) {
                converged = false;
            }
        }
        last_residual = worst;
        if converged || s == n {
            return Ok(Eigenpairs {
                values: eig.values[..k].to_vec(),
                vectors: ritz.into_iter().take(k).collect(),
                residual: worst,
                restarts: restart,
            });
        }
        for mut x in ritz {
            if orthonormalize_against(&mut x, &start) {
                start.push(x);
            }
        }
        while start.len() < block {
            let mut v = random_vector::<T>(n, &mut state);
            if orthonormalize_against(&mut v, &start) {
                start.push(v);
            }
        }
    }
    Err(Error::Convergence {
        residual: last_residual.as_f64(),
        message: format!("block Krylov solver did not converge in {} restarts", options.max_restarts),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diagonal(Vec<f64>);

    impl LinearOperator<f64> for Diagonal {
        fn dim(&self) -> usize {
            self.0.len()
        }

        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.0) {
                *yi = d * xi;
            }
        }
    }

    /// Path graph Laplacian with a near-degenerate bottom pair planted by hand.
    struct Laplacian(usize);

    impl LinearOperator<f64> for Laplacian {
        fn dim(&self) -> usize {
            self.0
        }

        fn apply(&self, x: &[f64], y: &mut [f64]) {
            let n = self.0;
            for i in 0..n {
                let mut v = 2.0 * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= x[i + 1];
                }
                y[i] = v;
            }
        }
    }

    #[test]
    fn resolves_nearly_degenerate_pair() {
        let mut d: Vec<f64> = (0..500).map(|i| 1.0 + i as f64 * 0.01).collect();
        d[0] = -1.0;
        d[1] = -1.0 + 1e-9;
        let out = lowest_eigenpairs(&Diagonal(d), 2, &KrylovOptions::default()).unwrap();
        assert!((out.values[0] + 1.0).abs() < 1e-12);
        assert!((out.values[1] - out.values[0] - 1e-9).abs() < 1e-12);
    }

    #[test]
    fn laplacian_lowest_modes() {
        let n = 120;
        let out = lowest_eigenpairs(&Laplacian(n), 3, &KrylovOptions::default()).unwrap();
        for (k, v) in out.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-10, "{k}: {v} vs {exact}");
        }
        assert!(out.residual < 1e-10);
    }

    #[test]
    fn tiny_operator_is_solved_exactly() {
        let out = lowest_eigenpairs(&Diagonal(vec![3.0, 1.0, 2.0]), 2, &KrylovOptions::default()).unwrap();
        assert!((out.values[0] - 1.0).abs() < 1e-14);
        assert!((out.values[1] - 2.0).abs() < 1e-14);
        assert!(lowest_eigenpairs(&Diagonal(vec![1.0]), 2, &KrylovOptions::default()).is_err());
    }
}
