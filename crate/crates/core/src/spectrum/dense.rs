//! Dense and tridiagonal symmetric eigensolvers.
//!
//! Householder reduction followed by implicit QL, after the public-domain
//! EISPACK/JAMA `tred2`/`tql2` pair, plus Sturm-sequence bisection and inverse
//! iteration for symmetric tridiagonal matrices.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigenvalues in ascending order and, if requested, the matching unit
/// eigenvectors (`vectors[i]` belongs to `values[i]`).
#[derive(Clone, Debug)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    pub vectors: Option<Vec<Vec<T>>>,
}

/// Full eigendecomposition of a dense symmetric matrix given row-major.
pub fn symmetric_eigen<T: Real>(matrix: &[T], n: usize, want_vectors: bool) -> Result<Eigen<T>> {
    if matrix.len() != n * n {
        return Err(Error::Input(format!("matrix has {} entries, expected {}", matrix.len(), n * n)));
    }
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: want_vectors.then(Vec::new),
        });
    }
    let mut v: Vec<Vec<T>> = (0..n).map(|i| matrix[i * n..(i + 1) * n].to_vec()).collect();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    // tql2 works on rows of the transposed transformation for locality
    let mut w = transpose(&v);
    drop(v);
    tql2(&mut d, &mut e, want_vectors.then_some(&mut w))?;
    sort_pairs(d, want_vectors.then_some(w))
}

/// Eigendecomposition of the symmetric tridiagonal matrix with diagonal `diag`
/// and off-diagonal `off` (`off[i]` couples `i` and `i + 1`).
pub fn tridiagonal_eigen<T: Real>(diag: &[T], off: &[T], want_vectors: bool) -> Result<Eigen<T>> {
    let n = diag.len();
    check_tridiagonal(diag, off)?;
    let mut d = diag.to_vec();
    let mut e = vec![T::zero(); n];
    for i in 1..n {
        e[i] = off[i - 1];
    }
    let mut w = if want_vectors {
        (0..n)
            .map(|i| {
                let mut row = vec![T::zero(); n];
                row[i] = T::one();
                row
            })
            .collect()
    } else {
        Vec::new()
    };
    tql2(&mut d, &mut e, want_vectors.then_some(&mut w))?;
    sort_pairs(d, want_vectors.then_some(w))
}

fn check_tridiagonal<T: Real>(diag: &[T], off: &[T]) -> Result<()> {
    if diag.is_empty() {
        return Err(Error::Input("empty matrix".into()));
    }
    if off.len() + 1 != diag.len() {
        return Err(Error::Input(format!(
            "off-diagonal has {} entries for dimension {}",
            off.len(),
            diag.len()
        )));
    }
    Ok(())
}

fn transpose<T: Real>(v: &[Vec<T>]) -> Vec<Vec<T>> {
    let n = v.len();
    (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect()
}

fn sort_pairs<T: Real>(d: Vec<T>, w: Option<Vec<Vec<T>>>) -> Result<Eigen<T>> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = w.map(|mut w| order.iter().map(|&i| std::mem::take(&mut w[i])).collect());
    Ok(Eigen { values, vectors })
}

fn tred2<T: Real>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
                v[j][i] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let delta = f * e[k] + g * d[k];
                    v[k][j] -= delta;
                }
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    let delta = g * d[k];
                    v[k][j] -= delta;
                }
            }
        }
        for k in 0..=i {
            v[k][i + 1] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = T::zero();
    }
    v[n - 1][n - 1] = T::one();
    e[0] = T::zero();
}

/// Implicit QL on the tridiagonal (d, e). `w`, when given, holds the
/// transformation transposed: `w[i]` is the i-th column of the eigenvector
/// matrix.
fn tql2<T: Real>(d: &mut [T], e: &mut [T], mut w: Option<&mut Vec<Vec<T>>>) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::eps();
    let two = T::cst(2.0);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::Convergence {
                        residual: e[l].abs().as_f64(),
                        message: "implicit QL exceeded 60 iterations".into(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().skip(l + 2) {
                    *item -= h;
                }
                f += h;
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(w) = w.as_deref_mut() {
                        let (lo, hi) = w.split_at_mut(i + 1);
                        let col_i = &mut lo[i];
                        let col_i1 = &mut hi[0];
                        for k in 0..n {
                            let hk = col_i1[k];
                            col_i1[k] = s * col_i[k] + c * hk;
                            col_i[k] = c * col_i[k] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

/// Number of eigenvalues strictly below `x` (Sturm count).
pub fn sturm_count<T: Real>(diag: &[T], off: &[T], x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < T::zero() {
        count += 1;
    }
    for i in 1..diag.len() {
        if q.abs() < tiny {
            q = -tiny;
        }
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the whole spectrum.
pub fn gershgorin_bounds<T: Real>(diag: &[T], off: &[T]) -> (T, T) {
    let n = diag.len();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..n {
        let mut radius = T::zero();
        if i > 0 {
            radius += off[i - 1].abs();
        }
        if i + 1 < n {
            radius += off[i].abs();
        }
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    (lo, hi)
}

/// The `k`-th smallest eigenvalue (0-based) of a symmetric tridiagonal matrix
/// by bisection on the Sturm count, to full working precision.
pub fn tridiagonal_kth_eigenvalue<T: Real>(diag: &[T], off: &[T], k: usize) -> Result<T> {
    check_tridiagonal(diag, off)?;
    if k >= diag.len() {
        return Err(Error::Input(format!("eigenvalue index {k} out of range")));
    }
    let (mut lo, mut hi) = gershgorin_bounds(diag, off);
    let span = (hi - lo).abs().max(T::one());
    lo -= span * T::cst(1e-3);
    hi += span * T::cst(1e-3);
    for _ in 0..400 {
        let mid = T::cst(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(T::cst(0.5) * (lo + hi))
}

/// Unit eigenvector of a symmetric tridiagonal matrix for a (converged)
/// eigenvalue estimate, by inverse iteration. Returns the vector and the
/// residual norm `|T v - λ v|`.
pub fn tridiagonal_eigenvector<T: Real>(diag: &[T], off: &[T], lambda: T) -> Result<(Vec<T>, T)> {
    check_tridiagonal(diag, off)?;
    let n = diag.len();
    if n == 1 {
        return Ok((vec![T::one()], (diag[0] - lambda).abs()));
    }
    let (lo, hi) = gershgorin_bounds(diag, off);
    let scale = (hi - lo).abs().max(T::one());
    // nudge the shift off the exact eigenvalue so the factorization stays finite
    let shift = lambda + scale * T::eps() * T::cst(4.0);
    let mut x: Vec<T> = (0..n).map(|i| T::one() + T::cst(0.01) * T::from_count(i % 7)).collect();
    normalize(&mut x);
    for _ in 0..4 {
        x = solve_shifted_tridiagonal(diag, off, shift, &x)?;
        normalize(&mut x);
    }
    let residual = tridiagonal_residual(diag, off, lambda, &x);
    Ok((x, residual))
}

pub(crate) fn tridiagonal_residual<T: Real>(diag: &[T], off: &[T], lambda: T, x: &[T]) -> T {
    let n = diag.len();
    let mut acc = T::zero();
    for i in 0..n {
        let mut y = (diag[i] - lambda) * x[i];
        if i > 0 {
            y += off[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            y += off[i] * x[i + 1];
        }
        acc += y * y;
    }
    acc.sqrt()
}

fn normalize<T: Real>(x: &mut [T]) {
    let norm = x.iter().map(|&v| v * v).sum::<T>().sqrt();
    if norm > T::zero() {
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
}

/// Solves `(T - shift) y = b` by Gaussian elimination with partial pivoting
/// (the factor gains a second super-diagonal).
fn solve_shifted_tridiagonal<T: Real>(diag: &[T], off: &[T], shift: T, b: &[T]) -> Result<Vec<T>> {
    let n = diag.len();
    let tiny = T::min_positive_value().sqrt();
    // row i of the upper factor: u0[i] (diagonal), u1[i], u2[i]
    let mut u0 = vec![T::zero(); n];
    let mut u1 = vec![T::zero(); n];
    let mut u2 = vec![T::zero(); n];
    let mut rhs = b.to_vec();
    // current working row (a0 at column i, a1 at i+1)
    let mut a0 = diag[0] - shift;
    let mut a1 = if n > 1 { off[0] } else { T::zero() };
    for i in 0..n {
        if i + 1 < n {
            let sub = off[i];
            let next_diag = diag[i + 1] - shift;
            let next_sup = if i + 2 < n { off[i + 1] } else { T::zero() };
            if sub.abs() > a0.abs() {
                // swap rows i and i+1
                u0[i] = sub;
                u1[i] = next_diag;
                u2[i] = next_sup;
                let factor = a0 / sub;
                rhs.swap(i, i + 1);
                let r = rhs[i];
                rhs[i + 1] -= factor * r;
                a0 = a1 - factor * next_diag;
                a1 = -factor * next_sup;
            } else {
                if a0.abs() < tiny {
                    a0 = tiny;
                }
                u0[i] = a0;
                u1[i] = a1;
                u2[i] = T::zero();
                let factor = sub / a0;
                let r = rhs[i];
                rhs[i + 1] -= factor * r;
                a0 = next_diag - factor * a1;
                a1 = next_sup;
            }
        } else {
            if a0.abs() < tiny {
                a0 = tiny;
            }
            u0[i] = a0;
        }
    }
    let mut y = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= u1[i] * y[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * y[i + 2];
        }
        y[i] = s / u0[i];
        if !y[i].is_finite() {
            return Err(Error::Numerical("inverse iteration overflowed".into()));
        }
    }
    Ok(y)
}
