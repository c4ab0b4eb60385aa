//! Static mean-field free energy `f(m, λ)` of the path-integral sampler.
//!
//! ```text
//! f(m, λ) = λ m - g(m) - (1/β) ln(2 cosh(β √(λ² + Γ²)))
//! f(m, λ) = λ m - g(m) - √(λ² + Γ²)                        (β = ∞)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::MeanField;
use crate::scalar::Real;

use super::{refine_root, ExtremumKind};

pub fn mean_field_free_energy<T: Real>(g: &dyn MeanField<T>, gamma: T, beta: T, m: T, lambda: T) -> T {
    let r = (lambda * lambda + gamma * gamma).sqrt();
    let field = if beta.is_infinite() {
        r
    } else {
        // ln(2 cosh x) = x + ln(1 + e^{-2x})
        let x = beta * r;
        (x + (-(x + x)).exp().ln_1p()) / beta
    };
    lambda * m - g.value(m) - field
}

/// Stationary point of `f`: `λ = g'(m)` and `m = ∂_λ` of the field term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint<T> {
    pub m: T,
    pub lambda: T,
    pub f: T,
    /// Classification along `m` after maximizing over `λ`.
    pub kind: ExtremumKind,
}

/// `m(λ) = (λ / r) tanh(β r)`, increasing in `λ`.
fn magnetization_of<T: Real>(gamma: T, beta: T, lambda: T) -> T {
    let r = (lambda * lambda + gamma * gamma).sqrt();
    let t = if beta.is_infinite() { T::one() } else { (beta * r).tanh() };
    lambda / r * t
}

/// Inverse of [`magnetization_of`].
fn lambda_of<T: Real>(gamma: T, beta: T, m: T) -> T {
    if beta.is_infinite() {
        return gamma * m / ((T::one() - m) * (T::one() + m)).sqrt();
    }
    let target = m.abs();
    let mut hi = gamma.max(T::one());
    let mut grow = 0;
    while magnetization_of(gamma, beta, hi) < target && grow < 200 {
        hi = hi + hi;
        grow += 1;
    }
    let mut lo = T::zero();
    for _ in 0..200 {
        let mid = T::cst(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if magnetization_of(gamma, beta, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lam = T::cst(0.5) * (lo + hi);
    if m < T::zero() {
        -lam
    } else {
        lam
    }
}

/// Stationary points of `f` ordered by `m`.
///
/// Maximizing over `λ` at fixed `m` gives `f̃(m)` with `f̃'(m) = λ(m) - g'(m)`,
/// whose sign changes locate and classify the stationary points.
pub fn stationary_points<T: Real>(g: &dyn MeanField<T>, gamma: T, beta: T) -> Result<Vec<StationaryPoint<T>>> {
    if !(beta > T::zero()) {
        return Err(Error::Input(format!("β must be positive, got {beta}")));
    }
    if !(gamma > T::zero()) {
        return Err(Error::Input(format!("Γ must be positive, got {gamma}")));
    }
    let slope = |m: T| lambda_of(gamma, beta, m) - g.derivative(m);
    // tanh spacing resolves stationary points close to |m| = 1 at small Γ
    let n = 2048;
    let node = |i: usize| (T::cst(20.0) * (T::from_count(i) + T::cst(0.5)) / T::from_count(n) - T::cst(10.0)).tanh();
    let mut points = Vec::new();
    let mut prev_m = node(0);
    let mut prev = slope(prev_m);
    for i in 1..n {
        let m = node(i);
        let d = slope(m);
        if d == T::zero() || (prev != T::zero() && d.signum() != prev.signum()) {
            let root = if d == T::zero() { m } else { refine_root(slope, prev_m, m)? };
            let lambda = g.derivative(root);
            points.push(StationaryPoint {
                m: root,
                lambda,
                f: mean_field_free_energy(g, gamma, beta, root, lambda),
                kind: if prev < T::zero() { ExtremumKind::LocalMin } else { ExtremumKind::Max },
            });
        }
        prev_m = m;
        prev = d;
    }
    let mut global: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        if p.kind == ExtremumKind::LocalMin {
            global = match global {
                Some(j) if points[j].f < p.f => Some(j),
                _ => Some(i),
            };
        }
    }
    if let Some(j) = global {
        points[j].kind = ExtremumKind::GlobalMin;
    }
    Ok(points)
}
