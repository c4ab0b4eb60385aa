//! Wall-centered average of `m(τ)` profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmc::Boundary;

/// Averaged profile against `s = 2τ`, measured from the wall center, with the
/// wall oriented so that `m` goes from positive to negative as `s` grows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstantonProfile {
    pub s: Vec<f64>,
    pub m: Vec<f64>,
    /// Paths contributing at each `s` (open paths can end before the window).
    pub counts: Vec<usize>,
    pub used: usize,
    /// Paths skipped for an unexpected number of walls, or a wall too close
    /// to an open end.
    pub skipped: usize,
}

impl InstantonProfile {
    /// Largest `|m(s) - m_ref(s)|` over the sampled points.
    pub fn max_deviation(&self, reference: impl Fn(f64) -> f64) -> f64 {
        self.s
            .iter()
            .zip(&self.m)
            .zip(&self.counts)
            .filter(|(_, &c)| c > 0)
            .map(|((&s, &m), _)| (m - reference(s)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|m(s) + m(-s)|`: zero for a profile antisymmetric about its
    /// center. Assumes the symmetric `s` grid built by [`instanton_profile`].
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.m.len();
        (0..n)
            .filter(|&k| self.counts[k] > 0 && self.counts[n - 1 - k] > 0)
            .map(|k| (self.m[k] + self.m[n - 1 - k]).abs())
            .fold(0.0, f64::max)
    }
}

/// A wall of one profile: center time and orientation along `τ`.
struct Wall {
    center: f64,
    /// `+1` when `m` falls through zero as `τ` grows.
    direction: f64,
}

/// Sign changes of `m(τ)` sampled at bin centers; zeros are skipped. The
/// center is where the line between the bracketing samples crosses zero.
fn walls(profile: &[f64], beta: f64, periodic: bool) -> Vec<Wall> {
    let n = profile.len();
    let dt = beta / n as f64;
    let nonzero: Vec<usize> = (0..n).filter(|&k| profile[k] != 0.0).collect();
    let mut out = Vec::new();
    if nonzero.len() < 2 {
        return out;
    }
    let pairs = nonzero.len() - usize::from(!periodic);
    for p in 0..pairs {
        let a = nonzero[p];
        let b = nonzero[(p + 1) % nonzero.len()];
        let (ma, mb) = (profile[a], profile[b]);
        if ma.signum() == mb.signum() {
            continue;
        }
        let ta = (a as f64 + 0.5) * dt;
        let mut tb = (b as f64 + 0.5) * dt;
        if tb <= ta {
            tb += beta;
        }
        let center = (ta + (tb - ta) * ma / (ma - mb)).rem_euclid(beta);
        out.push(Wall {
            center,
            direction: if ma > 0.0 { 1.0 } else { -1.0 },
        });
    }
    out
}

/// Linear interpolation of the binned profile at `τ`; `None` outside an open
/// path.
fn sample(profile: &[f64], beta: f64, periodic: bool, tau: f64) -> Option<f64> {
    let n = profile.len();
    let x = tau / beta * n as f64 - 0.5;
    if periodic {
        let x = x.rem_euclid(n as f64);
        let k = x.floor() as usize % n;
        let t = x - x.floor();
        Some(profile[k] * (1.0 - t) + profile[(k + 1) % n] * t)
    } else {
        if !(0.0..beta).contains(&tau) {
            return None;
        }
        let x = x.clamp(0.0, (n - 1) as f64);
        let k = (x.floor() as usize).min(n.saturating_sub(2));
        let t = x - k as f64;
        Some(if n == 1 { profile[0] } else { profile[k] * (1.0 - t) + profile[k + 1] * t })
    }
}

/// Moving average over `2·half + 1` bins; open profiles average over the
/// bins that exist.
fn smooth(profile: &[f64], half: usize, periodic: bool) -> Vec<f64> {
    let n = profile.len() as isize;
    let h = half as isize;
    (0..n)
        .map(|k| {
            let (mut sum, mut count) = (0.0, 0usize);
            for j in k - h..=k + h {
                let j = if periodic { j.rem_euclid(n) } else { j };
                if (0..n).contains(&j) {
                    sum += profile[j as usize];
                    count += 1;
                }
            }
            sum / count as f64
        })
        .collect()
}

/// Aligns every profile with the expected number of walls (two for periodic
/// paths, one for open ones) at its falling wall, samples it on
/// `points` values of `s ∈ [-half_width, half_width]` with `τ = τ_wall + s/2`,
/// and averages. Profiles are `m(τ)` at the centers of uniform bins of `[0, β)`.
pub fn instanton_profile(
    profiles: &[Vec<f64>],
    beta: f64,
    boundary: Boundary,
    half_width: f64,
    points: usize,
) -> Result<InstantonProfile> {
    instanton_profile_with(profiles, beta, boundary, half_width, points, WallDetection::default())
}

/// How walls are located and which ones are kept.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WallDetection {
    /// Width in `τ` of the moving average on which walls are located; 0 uses
    /// the raw profile. Locating the wall on the raw profile of a finite
    /// system pins it to a single kink, which leaves a spurious step at `s = 0`
    /// in the average. The averaged values always come from the raw profiles.
    pub smoothing: f64,
    /// Open paths only: the sampling window must stay this far (in `τ`) from
    /// both ends, where the free boundary pulls `m` toward zero. Profiles whose
    /// wall is closer are skipped.
    pub end_margin: f64,
}

/// As [`instanton_profile`], with walls located and filtered per `detection`.
pub fn instanton_profile_with(
    profiles: &[Vec<f64>],
    beta: f64,
    boundary: Boundary,
    half_width: f64,
    points: usize,
    detection: WallDetection,
) -> Result<InstantonProfile> {
    if !(beta > 0.0) || !(half_width > 0.0) {
        return Err(Error::Input("β and the window half-width must be positive".into()));
    }
    if !(detection.smoothing >= 0.0 && detection.smoothing < beta) {
        return Err(Error::Input(format!("smoothing width must lie in [0, β), got {}", detection.smoothing)));
    }
    if !(detection.end_margin >= 0.0) {
        return Err(Error::Input(format!("end margin must be non-negative, got {}", detection.end_margin)));
    }
    let periodic = boundary == Boundary::Periodic;
    let expected = if periodic { 2 } else { 1 };
    let s: Vec<f64> = (0..points)
        .map(|k| -half_width + 2.0 * half_width * k as f64 / (points - 1) as f64)
        .collect();
    let mut sum = vec![0.0; points];
    let mut counts = vec![0usize; points];
    let (mut used, mut skipped) = (0, 0);
    for profile in profiles {
        if profile.is_empty() {
            return Err(Error::Input("empty magnetization profile".into()));
        }
        let half = (0.5 * detection.smoothing / beta * profile.len() as f64).round() as usize;
        let found = if half == 0 {
            walls(profile, beta, periodic)
        } else {
            walls(&smooth(profile, half, periodic), beta, periodic)
        };
        if found.len() != expected {
            skipped += 1;
            continue;
        }
        // periodic paths hold one falling and one rising wall; use the falling one
        let wall = found.iter().find(|w| w.direction > 0.0).unwrap_or(&found[0]);
        let reach = 0.5 * half_width + detection.end_margin;
        if !periodic && (wall.center < reach || wall.center > beta - reach) {
            skipped += 1;
            continue;
        }
        used += 1;
        for (k, &sk) in s.iter().enumerate() {
            if let Some(m) = sample(profile, beta, periodic, wall.center + wall.direction * sk / 2.0) {
                sum[k] += m;
                counts[k] += 1;
            }
        }
    }
    let m = sum
        .iter()
        .zip(&counts)
        .map(|(&t, &c)| if c > 0 { t / c as f64 } else { f64::NAN })
        .collect();
    Ok(InstantonProfile {
        s,
        m,
        counts,
        used,
        skipped,
    })
}
