//! First-passage measurements: sweeps from the polarized start until a fixed
//! fraction of imaginary time has reversed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{DoubleWell, SpinModel, Topology};
use crate::qmc::{
    tune_step, Boundary, ContinuousTimePath, DiscretePath, LangevinParams, RingPolymer, SpinPath, SweepStats,
    UpdateScheme,
};
use crate::rng::{rng_from_seed, run_seed, substream};

use super::Engine;

/// Trotter slices of discrete spin paths unless configured otherwise.
pub const DEFAULT_SLICES: usize = 128;
/// Slice-magnetization threshold: a slice is reversed when `m(τ) <= -0.5`.
pub const DEFAULT_THRESHOLD: f64 = 0.5;
/// Reversed fraction of imaginary time that ends a run.
pub const DEFAULT_FRACTION: f64 = 0.25;
/// Acceptance the local double-well moves are tuned to.
pub const DEFAULT_TARGET_ACCEPTANCE: f64 = 0.5;

/// Substream tag of the step-size pilot of a double-well run.
const PILOT_STREAM: u64 = 1;

/// When a run counts as reversed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReversalCriterion {
    /// Spin paths: `m(τ) <= -threshold`. Double wells: `x_k <= -threshold·x_min`.
    pub threshold: f64,
    /// Fraction of slices (or beads) that must be reversed.
    pub fraction: f64,
}

impl Default for ReversalCriterion {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            fraction: DEFAULT_FRACTION,
        }
    }
}

impl ReversalCriterion {
    fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::Input(format!("threshold must lie in (0, 1], got {}", self.threshold)));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::Input(format!("reversed fraction must lie in (0, 1], got {}", self.fraction)));
        }
        Ok(())
    }
}

/// A spin-model first-passage experiment.
#[derive(Clone, Debug)]
pub struct SpinRun {
    pub engine: Engine,
    pub model: SpinModel<f64>,
    pub beta: f64,
    /// Trotter slices (discrete engines only).
    pub slices: usize,
    pub scheme: UpdateScheme,
    pub criterion: ReversalCriterion,
    /// Sign of the polarized start; `-1` starts reversed (sanity mode).
    pub start_sign: i8,
}

impl SpinRun {
    /// Defaults: 128 slices, Swendsen-Wang worldline clusters, threshold 0.5,
    /// fraction 0.25, start at `m = +1`.
    pub fn new(engine: Engine, model: SpinModel<f64>, beta: f64) -> Result<Self> {
        if !engine.is_spin() {
            return Err(Error::Input(format!("{engine} is not a spin engine")));
        }
        Ok(Self {
            engine,
            model,
            beta,
            slices: DEFAULT_SLICES,
            scheme: UpdateScheme::SwendsenWang,
            criterion: ReversalCriterion::default(),
            start_sign: 1,
        })
    }

    fn build(&self) -> Result<Box<dyn SpinPath>> {
        let boundary = if self.engine.is_open() { Boundary::Open } else { Boundary::Periodic };
        Ok(match self.engine {
            Engine::PimcDiscrete | Engine::PigsDiscrete => Box::new(DiscretePath::polarized(
                &self.model,
                self.beta,
                self.slices,
                boundary,
                self.start_sign,
            )?),
            Engine::PimcContinuous | Engine::PigsContinuous => {
                if self.scheme == UpdateScheme::Local {
                    return Err(Error::Input("continuous-time engines need a cluster update scheme".into()));
                }
                Box::new(ContinuousTimePath::polarized(&self.model, self.beta, boundary, self.start_sign)?)
            }
            Engine::PimcWell | Engine::PimdWell => unreachable!("checked in SpinRun::new"),
        })
    }
}

/// Update rule of a double-well ring polymer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WellMover {
    /// Single-bead Metropolis; `step = None` tunes the step on a pilot copy.
    Metropolis { step: Option<f64>, target_acceptance: f64 },
    /// Langevin dynamics; one step of all beads is one unit of time.
    Langevin(LangevinParams),
}

/// A double-well first-passage experiment.
#[derive(Clone, Debug)]
pub struct WellRun {
    pub well: DoubleWell<f64>,
    pub temperature: f64,
    pub beads: usize,
    pub mover: WellMover,
    pub criterion: ReversalCriterion,
}

impl WellRun {
    /// Local moves tuned to 50% acceptance; reversal at `x <= -x_min/2`.
    pub fn metropolis(well: DoubleWell<f64>, temperature: f64, beads: usize) -> Self {
        Self {
            well,
            temperature,
            beads,
            mover: WellMover::Metropolis {
                step: None,
                target_acceptance: DEFAULT_TARGET_ACCEPTANCE,
            },
            criterion: ReversalCriterion::default(),
        }
    }

    pub fn langevin(well: DoubleWell<f64>, temperature: f64, beads: usize, params: LangevinParams) -> Self {
        Self {
            well,
            temperature,
            beads,
            mover: WellMover::Langevin(params),
            criterion: ReversalCriterion::default(),
        }
    }

    pub fn engine(&self) -> Engine {
        match self.mover {
            WellMover::Metropolis { .. } => Engine::PimcWell,
            WellMover::Langevin(_) => Engine::PimdWell,
        }
    }

    fn reversed(&self, poly: &RingPolymer) -> f64 {
        let cut = -self.criterion.threshold * self.well.x_min();
        poly.positions().iter().filter(|&&x| x <= cut).count() as f64 / poly.beads() as f64
    }
}

#[derive(Clone, Debug)]
pub enum RunSpec {
    Spin(SpinRun),
    Well(WellRun),
}

impl RunSpec {
    pub fn engine(&self) -> Engine {
        match self {
            RunSpec::Spin(s) => s.engine,
            RunSpec::Well(w) => w.engine(),
        }
    }

    fn criterion(&self) -> ReversalCriterion {
        match self {
            RunSpec::Spin(s) => s.criterion,
            RunSpec::Well(w) => w.criterion,
        }
    }
}

/// Outcome of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstPassageRecord {
    pub engine: Engine,
    /// `chain`, `open-chain`, `fully-connected`, `mean-field` or `double-well`.
    pub topology: String,
    /// Number of spins; 1 for the double well.
    pub size: usize,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub beta: f64,
    /// Trotter slices or beads; `None` in continuous time.
    pub slices: Option<usize>,
    /// Index of the run within its experiment.
    pub run: u64,
    /// Seed of the run's random stream.
    pub seed: u64,
    /// `ξ`: sweeps (or Langevin steps) until reversal; the budget when censored.
    pub sweeps_to_reversal: u64,
    pub censored: bool,
    pub threshold: f64,
    pub fraction: f64,
    /// Acceptance of the sampler over the run (local moves, or clusters).
    pub acceptance: Option<f64>,
    /// Tuned local step of double-well Metropolis runs.
    pub step: Option<f64>,
}

impl FirstPassageRecord {
    fn template(spec: &RunSpec, run: u64, seed: u64) -> Self {
        let c = spec.criterion();
        let mut r = Self {
            engine: spec.engine(),
            topology: String::new(),
            size: 1,
            gamma: None,
            lambda: None,
            beta: 0.0,
            slices: None,
            run,
            seed,
            sweeps_to_reversal: 0,
            censored: false,
            threshold: c.threshold,
            fraction: c.fraction,
            acceptance: None,
            step: None,
        };
        match spec {
            RunSpec::Spin(s) => {
                r.topology = match s.model.topology() {
                    Topology::Chain if !s.model.is_periodic() => "open-chain".into(),
                    t => t.to_string(),
                };
                r.size = s.model.size();
                r.gamma = Some(s.model.gamma());
                r.beta = s.beta;
                r.slices = s.engine.is_discrete().then_some(s.slices);
            }
            RunSpec::Well(w) => {
                r.topology = "double-well".into();
                r.lambda = Some(w.well.lambda);
                r.beta = 1.0 / w.temperature;
                r.slices = Some(w.beads);
            }
        }
        r
    }
}

/// Runs one first-passage simulation: run `run` of the experiment seeded by
/// `master_seed`.
pub fn run_first_passage(spec: &RunSpec, run: u64, master_seed: u64, budget: u64) -> Result<FirstPassageRecord> {
    if budget == 0 {
        return Err(Error::Input("budget must be at least one sweep".into()));
    }
    let criterion = spec.criterion();
    criterion.validate()?;
    let seed = run_seed(master_seed, run);
    let mut record = FirstPassageRecord::template(spec, run, seed);
    let mut rng = rng_from_seed(seed);
    let mut stats = SweepStats::default();
    let (xi, censored) = match spec {
        RunSpec::Spin(s) => {
            let mut path = s.build()?;
            let done = |p: &dyn SpinPath| p.reversal_fraction(criterion.threshold) >= criterion.fraction;
            let mut outcome = (budget, true);
            if done(path.as_ref()) {
                outcome = (0, false);
            } else {
                for sweep in 1..=budget {
                    stats.accumulate(&path.sweep(s.scheme, &mut rng)?);
                    if done(path.as_ref()) {
                        outcome = (sweep, false);
                        break;
                    }
                }
            }
            record.acceptance = Some(if s.scheme == UpdateScheme::Local {
                stats.local_acceptance()
            } else {
                stats.cluster_acceptance()
            });
            outcome
        }
        RunSpec::Well(w) => {
            let mut poly = RingPolymer::in_right_well(&w.well, w.beads, w.temperature)?;
            let done = |p: &RingPolymer| w.reversed(p) >= criterion.fraction;
            let step = match w.mover {
                WellMover::Metropolis {
                    step: Some(s),
                    ..
                } if !(s > 0.0 && s.is_finite()) => {
                    return Err(Error::Input(format!("step must be positive, got {s}")));
                }
                WellMover::Metropolis { step: Some(s), .. } => s,
                WellMover::Metropolis {
                    step: None,
                    target_acceptance,
                } => tune_step(&poly, &w.well, target_acceptance, &mut substream(seed, PILOT_STREAM))?.step,
                WellMover::Langevin(_) => 0.0,
            };
            let mut outcome = (budget, true);
            if done(&poly) {
                outcome = (0, false);
            } else {
                for sweep in 1..=budget {
                    match &w.mover {
                        WellMover::Metropolis { .. } => stats.accumulate(&poly.pimc_sweep(&w.well, step, &mut rng)),
                        WellMover::Langevin(lp) => poly.pimd_step(&w.well, lp, &mut rng)?,
                    }
                    if done(&poly) {
                        outcome = (sweep, false);
                        break;
                    }
                }
            }
            if matches!(w.mover, WellMover::Metropolis { .. }) {
                record.acceptance = Some(stats.local_acceptance());
                record.step = Some(step);
            }
            outcome
        }
    };
    record.sweeps_to_reversal = xi;
    record.censored = censored;
    Ok(record)
}

/// `n_runs` independent runs in parallel, in run order.
pub fn measure_first_passage(
    spec: &RunSpec,
    n_runs: usize,
    budget: u64,
    master_seed: u64,
) -> Result<Vec<FirstPassageRecord>> {
    if n_runs == 0 {
        return Err(Error::Input("need at least one run".into()));
    }
    (0..n_runs as u64)
        .into_par_iter()
        .map(|run| run_first_passage(spec, run, master_seed, budget))
        .collect()
}

/// Statistics of `ξ` at one parameter point. Censored runs are counted but
/// excluded from the mean, the error and the median.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub runs: usize,
    pub censored: usize,
    pub mean: f64,
    /// Standard error of the mean; NaN with fewer than two uncensored runs.
    pub stderr: f64,
    pub median: f64,
    /// False when more than half of the runs were censored.
    pub usable: bool,
}

pub fn summarize(records: &[FirstPassageRecord]) -> PointSummary {
    let samples = uncensored(records);
    let (mean, stderr) = mean_stderr(&samples);
    let censored = records.len() - samples.len();
    PointSummary {
        runs: records.len(),
        censored,
        mean,
        stderr,
        median: median(&samples),
        usable: !records.is_empty() && 2 * censored <= records.len(),
    }
}

/// `ξ` of the uncensored runs.
pub fn uncensored(records: &[FirstPassageRecord]) -> Vec<f64> {
    records
        .iter()
        .filter(|r| !r.censored)
        .map(|r| r.sweeps_to_reversal as f64)
        .collect()
}

/// Sample mean and standard error (NaN error below two samples).
pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn median(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return f64::NAN;
    }
    let mut v = samples.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
