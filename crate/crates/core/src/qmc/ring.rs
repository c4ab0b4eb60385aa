//! Ring polymer of `P` beads for one particle in one dimension.
//!
//! ```text
//! Z ≈ ∫ dx exp[ -Σ_k ( (m P T / 2) (x_k - x_{k+1})² + V(x_k) / (P T) ) ],   x_{P+1} = x_1
//! ```
//!
//! Sampled either by single-bead Metropolis moves (PIMC) or by a discretized
//! second-order Langevin dynamics (PIMD) with `π` the bead velocity:
//!
//! ```text
//! π_k' = (1 - δγ) π_k + (δ/m) f_k + √(2γTδ/m) η
//! x_k' = x_k + π_k' δ
//! f_k  = -V'(x_k)/P + P T² m (x_{k+1} - 2 x_k + x_{k-1})
//! ```
//!
//! whose stationary law is the weight above with `⟨π²⟩ = T/m`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::DoubleWell;
use crate::rng::SimRng;

use super::SweepStats;

/// One-dimensional external potential.
pub trait Potential: Sync {
    fn value(&self, x: f64) -> f64;

    fn grad(&self, x: f64) -> f64;
}

impl Potential for DoubleWell<f64> {
    #[inline]
    fn value(&self, x: f64) -> f64 {
        self.potential(x)
    }

    #[inline]
    fn grad(&self, x: f64) -> f64 {
        self.potential_grad(x)
    }
}

/// `V = ½ k x²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Harmonic {
    pub stiffness: f64,
}

impl Potential for Harmonic {
    fn value(&self, x: f64) -> f64 {
        0.5 * self.stiffness * x * x
    }

    fn grad(&self, x: f64) -> f64 {
        self.stiffness * x
    }
}

/// Integration step `δ` and friction `γ` of the Langevin dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LangevinParams {
    pub delta: f64,
    pub gamma_friction: f64,
}

impl LangevinParams {
    pub fn new(delta: f64, gamma_friction: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Input(format!("time step must be positive, got {delta}")));
        }
        if !(gamma_friction > 0.0) || !gamma_friction.is_finite() {
            return Err(Error::Input(format!("friction must be positive, got {gamma_friction}")));
        }
        if delta * gamma_friction >= 2.0 {
            return Err(Error::Input(format!(
                "δγ = {} must stay below 2 for a stable friction term",
                delta * gamma_friction
            )));
        }
        Ok(Self { delta, gamma_friction })
    }
}

/// Beads beyond this distance from the origin mean the dynamics diverged.
const BLOW_UP: f64 = 1e8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingPolymer {
    x: Vec<f64>,
    pi: Vec<f64>,
    temperature: f64,
    mass: f64,
}

impl RingPolymer {
    /// All beads at `x0` with zero velocity.
    pub fn new(x0: f64, beads: usize, temperature: f64, mass: f64) -> Result<Self> {
        if beads == 0 {
            return Err(Error::Input("need at least one bead".into()));
        }
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::Input(format!("temperature must be positive, got {temperature}")));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Input(format!("mass must be positive, got {mass}")));
        }
        if !x0.is_finite() {
            return Err(Error::Input("initial coordinate must be finite".into()));
        }
        Ok(Self {
            x: vec![x0; beads],
            pi: vec![0.0; beads],
            temperature,
            mass,
        })
    }

    /// All beads at the bottom of the right well, `x = +x_min`.
    pub fn in_right_well(dw: &DoubleWell<f64>, beads: usize, temperature: f64) -> Result<Self> {
        Self::new(dw.x_min(), beads, temperature, dw.mass)
    }

    pub fn beads(&self) -> usize {
        self.x.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.x
    }

    pub fn velocities(&self) -> &[f64] {
        &self.pi
    }

    pub fn set_positions(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.x.len() {
            return Err(Error::Input(format!("expected {} coordinates, got {}", self.x.len(), x.len())));
        }
        self.x.copy_from_slice(x);
        Ok(())
    }

    pub fn set_velocities(&mut self, pi: &[f64]) -> Result<()> {
        if pi.len() != self.pi.len() {
            return Err(Error::Input(format!("expected {} velocities, got {}", self.pi.len(), pi.len())));
        }
        self.pi.copy_from_slice(pi);
        Ok(())
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `κ = m (P T)²`.
    pub fn spring_k(&self) -> f64 {
        let pt = self.beads() as f64 * self.temperature;
        self.mass * pt * pt
    }

    /// The exponent `Σ_k [(mPT/2)(x_k - x_{k+1})² + V(x_k)/(PT)]`.
    pub fn action(&self, v: &impl Potential) -> f64 {
        let p = self.beads();
        let pt = p as f64 * self.temperature;
        let spring = 0.5 * self.mass * pt;
        (0..p)
            .map(|k| {
                let d = self.x[k] - self.x[(k + 1) % p];
                spring * d * d + v.value(self.x[k]) / pt
            })
            .sum()
    }

    /// `P` single-bead Metropolis moves `x_k → x_k + step·z`, `z ~ U[-1, 1]`.
    pub fn pimc_sweep(&mut self, v: &impl Potential, step: f64, rng: &mut SimRng) -> SweepStats {
        let p = self.beads();
        let pt = p as f64 * self.temperature;
        let spring = 0.5 * self.mass * pt;
        let mut stats = SweepStats::default();
        for k in 0..p {
            let prev = self.x[(k + p - 1) % p];
            let next = self.x[(k + 1) % p];
            let old = self.x[k];
            let new = old + step * (2.0 * rng.random::<f64>() - 1.0);
            let link = |y: f64| (y - prev) * (y - prev) + (y - next) * (y - next);
            let ds = if p == 1 {
                0.0
            } else {
                spring * (link(new) - link(old))
            } + (v.value(new) - v.value(old)) / pt;
            stats.local_attempted += 1;
            if ds <= 0.0 || rng.random::<f64>() < (-ds).exp() {
                self.x[k] = new;
                stats.local_accepted += 1;
            }
        }
        stats
    }

    /// Force `f_k` on every bead.
    pub fn forces(&self, v: &impl Potential) -> Vec<f64> {
        let p = self.beads();
        let pf = p as f64;
        let spring = pf * self.temperature * self.temperature * self.mass;
        (0..p)
            .map(|k| {
                let lap = self.x[(k + 1) % p] - 2.0 * self.x[k] + self.x[(k + p - 1) % p];
                -v.grad(self.x[k]) / pf + spring * lap
            })
            .collect()
    }

    /// One Langevin step for all beads; forces use the coordinates at the
    /// start of the step.
    pub fn pimd_step(&mut self, v: &impl Potential, lp: &LangevinParams, rng: &mut SimRng) -> Result<()> {
        let p = self.beads();
        let pf = p as f64;
        let spring = pf * self.temperature * self.temperature * self.mass;
        let damp = 1.0 - lp.delta * lp.gamma_friction;
        let kick = lp.delta / self.mass;
        let noise = (2.0 * lp.gamma_friction * self.temperature * lp.delta / self.mass).sqrt();
        let first_old = self.x[0];
        let mut prev_old = self.x[p - 1];
        for k in 0..p {
            let xk = self.x[k];
            // beads before k have moved already; use their old coordinates
            let next_old = if k + 1 < p { self.x[k + 1] } else { first_old };
            let f = -v.grad(xk) / pf + spring * (next_old - 2.0 * xk + prev_old);
            let eta: f64 = rng.sample(StandardNormal);
            self.pi[k] = damp * self.pi[k] + kick * f + noise * eta;
            prev_old = xk;
            self.x[k] = xk + self.pi[k] * lp.delta;
        }
        if self.x.iter().any(|x| !x.is_finite() || x.abs() > BLOW_UP) {
            return Err(Error::Stability(format!(
                "bead coordinates diverged at δ = {}; reduce the time step",
                lp.delta
            )));
        }
        Ok(())
    }

    /// Fraction of beads with `x_k <= -x_min/2` (inclusive).
    pub fn well_reversal_fraction(&self, dw: &DoubleWell<f64>) -> f64 {
        let cut = -0.5 * dw.x_min();
        self.x.iter().filter(|&&x| x <= cut).count() as f64 / self.beads() as f64
    }

    pub fn mean_x2(&self) -> f64 {
        self.x.iter().map(|x| x * x).sum::<f64>() / self.beads() as f64
    }

    pub fn mean_potential(&self, v: &impl Potential) -> f64 {
        self.x.iter().map(|&x| v.value(x)).sum::<f64>() / self.beads() as f64
    }

    /// Bead-averaged `π²`.
    pub fn mean_velocity2(&self) -> f64 {
        self.pi.iter().map(|p| p * p).sum::<f64>() / self.beads() as f64
    }
}

/// Outcome of the step-size tuning pilot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepTuning {
    pub step: f64,
    /// Acceptance measured with the frozen step over the last pilot batches.
    pub acceptance: f64,
}

/// Tunes the local-move step towards `target` acceptance on a copy of `poly`,
/// so the caller's path and clock are untouched.
pub fn tune_step(poly: &RingPolymer, v: &impl Potential, target: f64, rng: &mut SimRng) -> Result<StepTuning> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Input(format!("target acceptance must lie in (0, 1), got {target}")));
    }
    let mut pilot = poly.clone();
    // natural bead displacement of the springs
    let mut step = 1.0 / (poly.mass * poly.beads() as f64 * poly.temperature).sqrt();
    const BATCH: usize = 20;
    for round in 0..60 {
        let mut stats = SweepStats::default();
        for _ in 0..BATCH {
            stats.accumulate(&pilot.pimc_sweep(v, step, rng));
        }
        let gain = 2.0 / (1.0 + round as f64 / 10.0);
        step *= (gain * (stats.local_acceptance() - target)).exp();
    }
    let mut stats = SweepStats::default();
    for _ in 0..10 * BATCH {
        stats.accumulate(&pilot.pimc_sweep(v, step, rng));
    }
    Ok(StepTuning {
        step,
        acceptance: stats.local_acceptance(),
    })
}
