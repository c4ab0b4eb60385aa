//! Instanton trajectory `m*(s)` from `dm/ds = ν(e, m, ℓ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::scalar::Real;

use super::{nu_between, turning_points, WkbProblem};

/// Samples of the trajectory, `s` ascending, with the wall center
/// `m = (m₁ + m₁')/2` at `s = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstantonTrajectory<T> {
    pub s: Vec<T>,
    pub m: Vec<T>,
    /// Turning points along the direction of motion.
    pub start: T,
    pub end: T,
    /// Requested relative distance to each turning point at which sampling
    /// stops; the time to reach a turning point that is also an extremum
    /// diverges.
    pub epsilon: T,
    /// Sampling ended before `epsilon` because the time integral could not be
    /// resolved closer to a turning point.
    pub truncated: bool,
}

impl<T: Real> InstantonTrajectory<T> {
    /// Linear interpolation of `m*(s)`, clamped to the sampled end values.
    pub fn m_at(&self, s: T) -> T {
        let n = self.s.len();
        if s <= self.s[0] {
            return self.m[0];
        }
        if s >= self.s[n - 1] {
            return self.m[n - 1];
        }
        let j = self.s.partition_point(|&x| x <= s);
        let (s0, s1) = (self.s[j - 1], self.s[j]);
        let t = (s - s0) / (s1 - s0);
        self.m[j - 1] + t * (self.m[j] - self.m[j - 1])
    }
}

/// Integrates the instanton between the turning points.
///
/// With `m = m_a + (m_b - m_a) sin²θ` the elapsed time is
/// `s(θ) = ∫_{π/4}^{θ} 2 (m_b - m_a) sinθ' cosθ' / ν dθ'`, evaluated by adaptive
/// quadrature between consecutive samples. Sampling stops where
/// `sin²θ = epsilon` or `cos²θ = epsilon`.
pub fn instanton_trajectory<T: Real>(
    p: &WkbProblem<T>,
    samples: usize,
    epsilon: T,
) -> Result<InstantonTrajectory<T>> {
    if samples < 8 {
        return Err(Error::Input("need at least 8 trajectory samples".into()));
    }
    if !(epsilon > T::zero() && epsilon < T::cst(0.25)) {
        return Err(Error::Input(format!("epsilon must lie in (0, 1/4), got {epsilon}")));
    }
    let (start, end) = turning_points(p)?;
    let (a, b) = if start < end { (start, end) } else { (end, start) };
    if a == b {
        return Err(Error::Domain("turning points coincide: no barrier to cross".into()));
    }
    let w = b - a;
    let speed = |theta: T| {
        let sn = theta.sin();
        let cs = theta.cos();
        let m = a + w * sn * sn;
        T::cst(2.0) * w * sn * cs / nu_between(p, m, a, b)
    };
    let theta_lo = epsilon.sqrt().asin();
    let theta_hi = T::FRAC_PI_2() - theta_lo;
    let quarter = T::FRAC_PI_4();
    let half = samples / 2;
    let options = QuadratureOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-10,
        max_intervals: 2000,
    };
    // θ nodes: theta_lo ..= π/4 ..= theta_hi
    let mut thetas = Vec::with_capacity(2 * half + 1);
    for i in 0..half {
        thetas.push(theta_lo + (quarter - theta_lo) * T::from_count(i) / T::from_count(half));
    }
    for i in 0..=half {
        thetas.push(quarter + (theta_hi - quarter) * T::from_count(i) / T::from_count(half));
    }
    // integrate outward from the center; a segment that cannot be resolved
    // ends the trajectory on that side
    let center = half;
    let segment = |lo: T, hi: T| {
        integrate(speed, lo, hi, &options)
            .ok()
            .map(|q| q.value)
            .filter(|v| v.is_finite())
    };
    let mut s = vec![T::zero(); thetas.len()];
    let mut last = thetas.len() - 1;
    for j in center + 1..thetas.len() {
        match segment(thetas[j - 1], thetas[j]) {
            Some(v) => s[j] = s[j - 1] + v,
            None => {
                last = j - 1;
                break;
            }
        }
    }
    let mut first = 0;
    for j in (0..center).rev() {
        match segment(thetas[j], thetas[j + 1]) {
            Some(v) => s[j] = s[j + 1] - v,
            None => {
                first = j + 1;
                break;
            }
        }
    }
    let truncated = first > 0 || last + 1 < thetas.len();
    let thetas = &thetas[first..=last];
    let mut s = s[first..=last].to_vec();
    if s.len() < 3 {
        return Err(Error::Numerical("trajectory could not be integrated away from its center".into()));
    }
    let mut m: Vec<T> = thetas.iter().map(|&t| a + w * t.sin().powi(2)).collect();
    if start > end {
        // motion toward smaller m: reverse time so s stays ascending
        s = s.into_iter().rev().map(|x| -x).collect();
        m.reverse();
    }
    Ok(InstantonTrajectory {
        s,
        m,
        start,
        end,
        epsilon,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grover_trajectory_is_exponential() {
        // dm/ds = m with m(0) = 1/2
        let p = WkbProblem::<f64>::grover(1.0).unwrap();
        let tr = instanton_trajectory(&p, 400, 1e-10).unwrap();
        assert_eq!(tr.start, 0.0);
        assert_eq!(tr.end, 1.0);
        let worst = tr
            .s
            .iter()
            .zip(&tr.m)
            .map(|(&s, &m)| (m - 0.5 * s.exp()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn symmetric_kink_is_odd() {
        let p = WkbProblem::<f64>::curie_weiss(0.4, 0.0, 1.0).unwrap();
        let tr = instanton_trajectory(&p, 600, 1e-9).unwrap();
        assert!(tr.start < tr.end);
        for &s in &[0.3, 1.0, 2.5, 5.0] {
            assert!((tr.m_at(s) + tr.m_at(-s)).abs() < 1e-6, "s={s}");
        }
        assert!(tr.m.windows(2).all(|w| w[1] >= w[0]));
        assert!(tr.m_at(0.0).abs() < 1e-12);
    }

    #[test]
    fn motion_toward_negative_magnetization() {
        // biased toward m < 0, so the metastable well sits at m > 0
        let p = WkbProblem::<f64>::curie_weiss(0.3, -0.05, 1.0).unwrap();
        let tr = instanton_trajectory(&p, 200, 1e-9).unwrap();
        assert!(tr.start > tr.end);
        assert!(tr.s.windows(2).all(|w| w[1] > w[0]));
        assert!(tr.m.windows(2).all(|w| w[1] <= w[0]));
    }
}
