//! First-passage experiments, scans, fits and instanton-shape extraction.
//!
//! Runs are independent and seeded by `(master seed, run index)`, so results
//! do not depend on the number of worker threads or on scheduling order.

mod first_passage;
mod fit;
mod instanton;
mod scan;

use serde::{Deserialize, Serialize};

pub use first_passage::{
    mean_stderr, measure_first_passage, median, run_first_passage, summarize, uncensored, FirstPassageRecord,
    PointSummary, ReversalCriterion, RunSpec, SpinRun, WellMover, WellRun, DEFAULT_FRACTION, DEFAULT_SLICES,
    DEFAULT_TARGET_ACCEPTANCE, DEFAULT_THRESHOLD,
};
pub use fit::{
    compare_estimates, ed_exponent, exact_splitting, exponent_comparison, fit_exponential, fit_line, least_squares,
    Bootstrap, ErrorMethod, Estimate, ExponentMode, ExponentVerdict, FitPoint, FitResult, LineFit, EXPONENT_SIGMAS,
};
pub use instanton::{instanton_profile, instanton_profile_with, InstantonProfile, WallDetection};
pub use scan::{temperature_scan, z_score, ScanRow, ScanTable};

/// Sampler used for a first-passage run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Engine {
    /// Trotter path, periodic in imaginary time.
    #[serde(rename = "pimc-discrete")]
    PimcDiscrete,
    /// Continuous-time worldlines, periodic.
    #[serde(rename = "pimc-ct")]
    PimcContinuous,
    /// Trotter path with open ends.
    #[serde(rename = "pigs-discrete")]
    PigsDiscrete,
    /// Continuous-time worldlines with open ends.
    #[serde(rename = "pigs-ct")]
    PigsContinuous,
    /// Double-well ring polymer, single-bead Metropolis.
    #[serde(rename = "pimc-well")]
    PimcWell,
    /// Double-well ring polymer, Langevin dynamics.
    #[serde(rename = "pimd-well")]
    PimdWell,
}

impl Engine {
    pub const ALL: [Engine; 6] = [
        Engine::PimcDiscrete,
        Engine::PimcContinuous,
        Engine::PigsDiscrete,
        Engine::PigsContinuous,
        Engine::PimcWell,
        Engine::PimdWell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Engine::PimcDiscrete => "pimc-discrete",
            Engine::PimcContinuous => "pimc-ct",
            Engine::PigsDiscrete => "pigs-discrete",
            Engine::PigsContinuous => "pigs-ct",
            Engine::PimcWell => "pimc-well",
            Engine::PimdWell => "pimd-well",
        }
    }

    pub fn is_spin(self) -> bool {
        !matches!(self, Engine::PimcWell | Engine::PimdWell)
    }

    /// Open imaginary-time boundaries.
    pub fn is_open(self) -> bool {
        matches!(self, Engine::PigsDiscrete | Engine::PigsContinuous)
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, Engine::PimcDiscrete | Engine::PigsDiscrete)
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Engine {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| crate::Error::Input(format!("unknown engine {s:?}")))
    }
}
