//! Large-spin WKB description of tunneling in permutation-symmetric models.
//!
//! In the maximal-spin sector the dynamics reduce to one coordinate, the
//! magnetization `m ∈ [-ℓ, ℓ]`, with rescaled energy `e = E/(L/2)` and
//! rescaled spin `ℓ = 2S/L`. Under the barrier the conjugate momentum is
//! imaginary; its magnitude `k(e, m, ℓ)` integrated between the turning points
//! gives the action `a`, and `Δ ∝ exp(-L a / 2)`.

mod free_energy;
mod trajectory;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{CurieWeiss, Grover, MeanField};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::scalar::Real;

pub use free_energy::{mean_field_free_energy, stationary_points, StationaryPoint};
pub use trajectory::{instanton_trajectory, InstantonTrajectory};

/// Number of derivative samples used to bracket extrema of `V_eff`.
const SCAN_POINTS: usize = 2048;

/// Tunneling problem at fixed rescaled energy and spin.
#[derive(Clone)]
pub struct WkbProblem<T: Real> {
    pub g: Arc<dyn MeanField<T>>,
    pub gamma: T,
    pub ell: T,
    pub energy: T,
}

impl<T: Real> std::fmt::Debug for WkbProblem<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WkbProblem")
            .field("g", &self.g.name())
            .field("gamma", &self.gamma)
            .field("ell", &self.ell)
            .field("energy", &self.energy)
            .finish()
    }
}

impl<T: Real> WkbProblem<T> {
    pub fn new(g: Arc<dyn MeanField<T>>, gamma: T, ell: T, energy: T) -> Result<Self> {
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(Error::Input(format!("Γ must be positive, got {gamma}")));
        }
        if !(ell > T::zero() && ell <= T::one()) {
            return Err(Error::Input(format!("ℓ must lie in (0, 1], got {ell}")));
        }
        if !energy.is_finite() {
            return Err(Error::Input("energy must be finite".into()));
        }
        Ok(Self { g, gamma, ell, energy })
    }

    /// Curie-Weiss problem at the energy of the metastable minimum.
    pub fn curie_weiss(gamma: T, h: T, ell: T) -> Result<Self> {
        let p = Self::new(Arc::new(CurieWeiss { h }), gamma, ell, T::zero())?;
        p.at_metastable_minimum()
    }

    /// Grover problem at `ℓ = 1` with energy `-Γ`, the bottom of its well.
    pub fn grover(gamma: T) -> Result<Self> {
        Self::new(Arc::new(Grover), gamma, T::one(), -gamma)
    }

    pub fn with_energy(&self, energy: T) -> Result<Self> {
        Self::new(self.g.clone(), self.gamma, self.ell, energy)
    }

    /// Same landscape, energy moved to `e₁`, the bottom of the metastable well.
    pub fn at_metastable_minimum(&self) -> Result<Self> {
        let land = landscape(self)?;
        let e1 = land.metastable().ok_or_else(|| Error::Domain("landscape has no metastable well".into()))?.e;
        self.with_energy(e1)
    }

    /// `ℓ² - m²` computed as a product to keep precision near `|m| = ℓ`.
    fn radial(&self, m: T) -> T {
        (self.ell - m) * (self.ell + m)
    }

    fn v_eff_unchecked(&self, m: T) -> T {
        -self.gamma * self.radial(m).max(T::zero()).sqrt() - self.g.value(m)
    }

    fn v_eff_slope(&self, m: T) -> T {
        self.gamma * m / self.radial(m).sqrt() - self.g.derivative(m)
    }

    /// Radicand of `ν²`, or an error when `m` is classically allowed.
    fn nu_squared(&self, m: T) -> Result<T> {
        if m.abs() > self.ell {
            return Err(Error::Domain(format!("|m| = {} exceeds ℓ = {}", m.abs(), self.ell)));
        }
        let depth = -(self.energy + self.g.value(m));
        let hop = self.gamma * self.radial(m).max(T::zero()).sqrt();
        let tol = T::cst(1e-10) * (depth.abs() + hop).max(T::one());
        if depth < hop - tol {
            return Err(Error::Domain(format!("m = {m} is classically allowed at e = {}", self.energy)));
        }
        Ok(((depth - hop) * (depth + hop)).max(T::zero()))
    }
}

/// `V_eff(m, ℓ) = -Γ √(ℓ² - m²) - g(m)` for `|m| ≤ ℓ`.
pub fn v_eff<T: Real>(p: &WkbProblem<T>, m: T) -> Result<T> {
    if m.abs() > p.ell {
        return Err(Error::Domain(format!("|m| = {} exceeds ℓ = {}", m.abs(), p.ell)));
    }
    Ok(p.v_eff_unchecked(m))
}

/// Under-barrier velocity `ν = √((e + g)² - Γ²(ℓ² - m²))`, zero at turning
/// points.
pub fn velocity_nu<T: Real>(p: &WkbProblem<T>, m: T) -> Result<T> {
    Ok(p.nu_squared(m)?.sqrt())
}

/// Imaginary momentum `k = arcsinh(ν / (Γ √(ℓ² - m²)))`.
pub fn momentum_k<T: Real>(p: &WkbProblem<T>, m: T) -> Result<T> {
    let nu = velocity_nu(p, m)?;
    let hop = p.gamma * p.radial(m).sqrt();
    if hop == T::zero() {
        return Err(Error::Domain("momentum diverges at |m| = ℓ".into()));
    }
    Ok((nu / hop).asinh())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremumKind {
    LocalMin,
    Max,
    GlobalMin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum<T> {
    pub m: T,
    pub e: T,
    pub kind: ExtremumKind,
}

/// Interior extrema of `V_eff` ordered by `m`, plus the metastability
/// boundary `ℓ_c` when it exists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialLandscape<T> {
    pub extrema: Vec<Extremum<T>>,
    pub ell_c: Option<T>,
}

impl<T: Real> PotentialLandscape<T> {
    pub fn metastable(&self) -> Option<&Extremum<T>> {
        let local = self.extrema.iter().find(|x| x.kind == ExtremumKind::LocalMin);
        local.or_else(|| {
            // single well: the bottom itself is the starting point
            if self.extrema.len() == 1 {
                self.extrema.first()
            } else {
                None
            }
        })
    }

    pub fn global_min(&self) -> Option<&Extremum<T>> {
        self.extrema.iter().find(|x| x.kind == ExtremumKind::GlobalMin)
    }

    /// The maximum separating the metastable and the global minimum.
    pub fn barrier(&self) -> Option<&Extremum<T>> {
        let a = self.metastable()?.m;
        let b = self.global_min()?.m;
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.extrema
            .iter()
            .find(|x| x.kind == ExtremumKind::Max && x.m > lo && x.m < hi)
    }
}

/// Root of `f` in a bracket where it changes sign: Newton steps from a
/// finite-difference slope, rejected in favor of bisection whenever they leave
/// the bracket.
pub(crate) fn refine_root<T: Real, F: Fn(T) -> T>(f: F, mut lo: T, mut hi: T) -> Result<T> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numerical(format!(
            "root not bracketed on [{lo}, {hi}]: f = {flo}, {fhi}"
        )));
    }
    let scale = lo.abs().max(hi.abs()).max(T::one());
    let tol = T::cst(1e-13).max(T::cst(4.0) * T::eps() * scale);
    let mut x = T::cst(0.5) * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == T::zero() {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        if (hi - lo).abs() < tol {
            return Ok(T::cst(0.5) * (lo + hi));
        }
        let step = (hi - lo).abs() * T::cst(1e-6);
        let slope = (f(x + step) - f(x - step)) / (step + step);
        let newton = x - fx / slope;
        if slope.is_finite() && slope != T::zero() && newton > lo && newton < hi {
            if (newton - x).abs() < tol {
                return Ok(newton);
            }
            x = newton;
        } else {
            x = T::cst(0.5) * (lo + hi);
        }
    }
    Err(Error::Numerical(format!("root refinement stalled on [{lo}, {hi}]")))
}

fn extrema_at<T: Real>(p: &WkbProblem<T>) -> Result<Vec<(T, bool)>> {
    let n = SCAN_POINTS;
    let width = T::cst(2.0) * p.ell;
    let node = |i: usize| -p.ell + width * (T::from_count(i) + T::cst(0.5)) / T::from_count(n);
    let mut out = Vec::new();
    let mut prev_m = node(0);
    let mut prev = p.v_eff_slope(prev_m);
    for i in 1..n {
        let m = node(i);
        let d = p.v_eff_slope(m);
        if d == T::zero() || (d.signum() != prev.signum() && prev != T::zero()) {
            let root = if d == T::zero() {
                m
            } else {
                refine_root(|x| p.v_eff_slope(x), prev_m, m)?
            };
            // minimum where the slope turns from negative to positive
            out.push((root, prev < T::zero()));
        }
        prev_m = m;
        prev = d;
    }
    Ok(out)
}

fn extremum_count<T: Real>(p: &WkbProblem<T>) -> usize {
    extrema_at(p).map(|x| x.len()).unwrap_or(0)
}

/// Extrema of `V_eff(·, ℓ)` and the metastability boundary
/// `ℓ_c = (|h|^{2/3} + Γ^{2/3})^{3/2}` (Curie-Weiss) or its numerical analogue.
pub fn landscape<T: Real>(p: &WkbProblem<T>) -> Result<PotentialLandscape<T>> {
    let raw = extrema_at(p)?;
    let mut extrema: Vec<Extremum<T>> = raw
        .iter()
        .map(|&(m, is_min)| Extremum {
            m,
            e: p.v_eff_unchecked(m),
            kind: if is_min { ExtremumKind::LocalMin } else { ExtremumKind::Max },
        })
        .collect();
    // lowest minimum is global; on an exact tie the one at larger m
    let mut global: Option<usize> = None;
    for (i, x) in extrema.iter().enumerate() {
        if x.kind != ExtremumKind::LocalMin {
            continue;
        }
        global = match global {
            Some(j) if extrema[j].e < x.e => Some(j),
            _ => Some(i),
        };
    }
    if let Some(j) = global {
        extrema[j].kind = ExtremumKind::GlobalMin;
    }
    let ell_c = match p.g.curie_weiss_field() {
        Some(h) => {
            let two_thirds = T::cst(2.0 / 3.0);
            let lc = (h.abs().powf(two_thirds) + p.gamma.powf(two_thirds)).powf(T::cst(1.5));
            (lc < T::one()).then_some(lc)
        }
        None => numerical_ell_c(p),
    };
    Ok(PotentialLandscape { extrema, ell_c })
}

fn numerical_ell_c<T: Real>(p: &WkbProblem<T>) -> Option<T> {
    let at = |ell: T| WkbProblem {
        ell,
        ..p.clone()
    };
    if extremum_count(&at(T::one())) < 3 {
        return None;
    }
    let mut lo = T::cst(1e-6);
    let mut hi = T::one();
    if extremum_count(&at(lo)) >= 3 {
        return Some(T::zero());
    }
    for _ in 0..60 {
        let mid = T::cst(0.5) * (lo + hi);
        if extremum_count(&at(mid)) >= 3 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Entry and exit points of the barrier at the problem's energy, ordered along
/// the tunneling direction (metastable side first).
pub fn turning_points<T: Real>(p: &WkbProblem<T>) -> Result<(T, T)> {
    let land = landscape(p)?;
    let e = p.energy;
    if let Some(terminal) = p.g.terminal_point() {
        // point-like target: the path runs from the well to m = ℓ
        if terminal != p.ell {
            return Err(Error::Domain(format!(
                "the target state at m = {terminal} is only reachable for ℓ = {terminal}"
            )));
        }
        let well = land.metastable().ok_or_else(|| Error::Domain("no well".into()))?;
        if e < well.e - T::cst(1e-12) {
            return Err(Error::Domain(format!("energy {e} lies below the well bottom {}", well.e)));
        }
        let entry = if e <= well.e {
            well.m
        } else {
            refine_root(|m| p.v_eff_unchecked(m) - e, well.m, p.ell * (T::one() - T::cst(1e-15)))?
        };
        return Ok((entry, p.ell));
    }
    let (well, top, other) = match (land.metastable(), land.barrier(), land.global_min()) {
        (Some(a), Some(b), Some(c)) => (*a, *b, *c),
        _ => return Err(Error::Domain("no barrier: the effective potential is monostable".into())),
    };
    let tol = T::cst(1e-12) * (T::one() + e.abs());
    if e < well.e - tol || e > top.e + tol {
        return Err(Error::Domain(format!(
            "energy {e} outside the barrier window [{}, {}]",
            well.e, top.e
        )));
    }
    let f = |m: T| p.v_eff_unchecked(m) - e;
    let entry = if e <= well.e { well.m } else if e >= top.e { top.m } else { refine_root(f, well.m, top.m)? };
    let exit = if e >= top.e {
        top.m
    } else if (e - other.e).abs() <= tol {
        other.m
    } else {
        refine_root(f, top.m, other.m)?
    };
    Ok((entry, exit))
}

/// `V_eff(m) - e` for `m` between turning points `a < b`.
///
/// Next to a turning point the direct difference loses all precision when the
/// turning point is also an extremum (`V - e` is quadratic there), so within
/// `10⁻³ (b - a)` of an end the difference is integrated from `V_eff'` with
/// Simpson's rule instead.
pub(crate) fn barrier_excess<T: Real>(p: &WkbProblem<T>, m: T, a: T, b: T) -> T {
    let near = T::cst(1e-3) * (b - a);
    let (end, dist) = if m - a <= b - m { (a, m - a) } else { (b, b - m) };
    let interior_end = end.abs() < p.ell;
    if dist < near && interior_end {
        let mid = T::cst(0.5) * (m + end);
        let simpson = (m - end) / T::cst(6.0)
            * (p.v_eff_slope(end) + T::cst(4.0) * p.v_eff_slope(mid) + p.v_eff_slope(m));
        let at_end = p.v_eff_unchecked(end) - p.energy;
        return (at_end + simpson).max(T::zero());
    }
    (p.v_eff_unchecked(m) - p.energy).max(T::zero())
}

/// Under-barrier velocity from [`barrier_excess`]:
/// `ν² = (V - e)(-(e + g) + Γ√(ℓ² - m²))`.
pub(crate) fn nu_between<T: Real>(p: &WkbProblem<T>, m: T, a: T, b: T) -> T {
    let hop = p.gamma * p.radial(m).max(T::zero()).sqrt();
    let depth = -(p.energy + p.g.value(m));
    (barrier_excess(p, m, a, b) * (depth + hop)).sqrt()
}

/// Substitution `m = m_a + (m_b - m_a) sin²θ` that removes square-root
/// endpoint behavior. Returns `(m, m - m_a, m_b - m)` for `θ ∈ [0, π/2]`.
fn sin2_map<T: Real>(a: T, b: T, theta: T) -> (T, T, T) {
    let w = b - a;
    let s2 = theta.sin().powi(2);
    let c2 = theta.cos().powi(2);
    (a + w * s2, w * s2, w * c2)
}

fn quad_options() -> QuadratureOptions {
    QuadratureOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-11,
        max_intervals: 6000,
    }
}

/// Instanton action `a(e, ℓ) = ∫ k dm` between the turning points.
pub fn action<T: Real>(p: &WkbProblem<T>) -> Result<T> {
    let (m1, m2) = turning_points(p)?;
    let (a, b) = if m1 < m2 { (m1, m2) } else { (m2, m1) };
    if a == b {
        return Ok(T::zero());
    }
    let half_pi = T::FRAC_PI_2();
    let integrand = |theta: T| {
        let (m, da, db) = sin2_map(a, b, theta);
        // distance to ±ℓ from the nearer endpoint keeps the hop term accurate
        let to_right = if b == p.ell { db } else { p.ell - m };
        let radial = to_right * (p.ell + m);
        let hop = p.gamma * radial.max(T::zero()).sqrt();
        let nu = nu_between(p, m, a, b);
        let k = if hop > T::zero() { (nu / hop).asinh() } else { T::zero() };
        k * T::cst(2.0) * (da * db).sqrt()
    };
    let q = integrate(integrand, T::zero(), half_pi, &quad_options())?;
    Ok(q.value)
}

/// Imaginary time spent under the barrier, `∫ dm / ν`; equals `-∂a/∂e`.
pub fn transit_time<T: Real>(p: &WkbProblem<T>) -> Result<T> {
    let (m1, m2) = turning_points(p)?;
    let (a, b) = if m1 < m2 { (m1, m2) } else { (m2, m1) };
    let integrand = |theta: T| {
        let (m, da, db) = sin2_map(a, b, theta);
        T::cst(2.0) * (da * db).sqrt() / nu_between(p, m, a, b)
    };
    // ν is computed to ~1e-12 near the turning points, which floors the
    // attainable relative accuracy here
    let options = QuadratureOptions {
        rel_tol: 1e-9,
        ..quad_options()
    };
    Ok(integrate(integrand, T::zero(), T::FRAC_PI_2(), &options)?.value)
}

/// Large-`L` splitting of the unbiased Curie-Weiss model, `Δ₁₀ = b e^{-L c}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormSplitting<T> {
    pub b: T,
    pub c: T,
    pub delta: T,
}

/// `c(Γ) = ½ ln((1 + √(1-Γ²)) / (1 - √(1-Γ²))) - √(1-Γ²)` and
/// `b(Γ) = (32 L / π)^{1/2} (1 - Γ²)^{5/4} / (1 + √(1-Γ²))`.
pub fn splitting_closed_form<T: Real>(gamma: T, size: usize) -> Result<ClosedFormSplitting<T>> {
    if !(gamma > T::zero()) || gamma >= T::one() {
        return Err(Error::Domain(format!("closed form needs 0 < Γ < 1, got {gamma}")));
    }
    if size == 0 {
        return Err(Error::Input("L must be positive".into()));
    }
    let r = ((T::one() - gamma) * (T::one() + gamma)).sqrt();
    let c = T::cst(0.5) * ((T::one() + r) / (T::one() - r)).ln() - r;
    let l = T::from_count(size);
    let b = (T::cst(32.0) * l / T::PI()).sqrt() * (r * r).powf(T::cst(1.25)) / (T::one() + r);
    Ok(ClosedFormSplitting {
        b,
        c,
        delta: b * (-l * c).exp(),
    })
}
