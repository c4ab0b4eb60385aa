//! Path-integral Monte Carlo for transverse-field Ising models and for a
//! particle in a double well.
//!
//! Spin paths come in two representations: a discrete Suzuki-Trotter stack of
//! `P` slices ([`DiscretePath`]) and continuous-time worldlines
//! ([`ContinuousTimePath`]). Either can carry periodic imaginary-time boundaries
//! (PIMC, thermal) or open ones (PIGS, free ends). The stochastic kernels are
//! double precision only.

mod continuous;
mod coupling;
mod discrete;
mod ring;

use serde::{Deserialize, Serialize};

pub use continuous::ContinuousTimePath;
pub use discrete::{trotter_coupling, DiscretePath};
pub use ring::{tune_step, Harmonic, LangevinParams, Potential, RingPolymer, StepTuning};

/// Imaginary-time boundary condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Trace over the worldline: thermal density matrix (PIMC).
    Periodic,
    /// Free ends: projection from the equal superposition (PIGS).
    Open,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        })
    }
}

/// Worldline cluster update flavor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterFlavor {
    /// Every cluster of the worldline gets its own heat-bath decision.
    SwendsenWang,
    /// One cluster, through a uniformly chosen time, per worldline.
    Wolff,
}

/// Update scheme of a spin path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateScheme {
    /// Single-spin Metropolis (discrete paths only).
    Local,
    SwendsenWang,
    Wolff,
}

impl UpdateScheme {
    pub fn cluster_flavor(self) -> Option<ClusterFlavor> {
        match self {
            UpdateScheme::Local => None,
            UpdateScheme::SwendsenWang => Some(ClusterFlavor::SwendsenWang),
            UpdateScheme::Wolff => Some(ClusterFlavor::Wolff),
        }
    }
}

impl std::fmt::Display for UpdateScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            UpdateScheme::Local => "local",
            UpdateScheme::SwendsenWang => "swendsen-wang",
            UpdateScheme::Wolff => "wolff",
        })
    }
}

/// Counters of one or more sweeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepStats {
    pub local_attempted: u64,
    pub local_accepted: u64,
    pub cluster_attempted: u64,
    pub cluster_accepted: u64,
    /// Fraction of imaginary time with `m(τ) <= -threshold` after the sweep,
    /// when the caller asked for it.
    pub reversed_fraction: Option<f64>,
}

impl SweepStats {
    pub fn accumulate(&mut self, other: &SweepStats) {
        self.local_attempted += other.local_attempted;
        self.local_accepted += other.local_accepted;
        self.cluster_attempted += other.cluster_attempted;
        self.cluster_accepted += other.cluster_accepted;
        if other.reversed_fraction.is_some() {
            self.reversed_fraction = other.reversed_fraction;
        }
    }

    pub fn local_acceptance(&self) -> f64 {
        ratio(self.local_accepted, self.local_attempted)
    }

    pub fn cluster_acceptance(&self) -> f64 {
        ratio(self.cluster_accepted, self.cluster_attempted)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Common view of spin paths used by the first-passage harness.
pub trait SpinPath: Send {
    fn size(&self) -> usize;

    fn beta(&self) -> f64;

    fn boundary(&self) -> Boundary;

    /// One sweep: `L·P` local attempts, or one worldline decomposition per
    /// site for cluster schemes.
    fn sweep(&mut self, scheme: UpdateScheme, rng: &mut crate::rng::SimRng) -> crate::Result<SweepStats>;

    /// Fraction of imaginary time with `m(τ) <= -threshold` (inclusive).
    fn reversal_fraction(&self, threshold: f64) -> f64;

    /// `m(τ)` at the centers of `bins` uniform imaginary-time bins.
    fn magnetization_profile(&self, bins: usize) -> Vec<f64>;

    /// Imaginary-time average of `m(τ)²`.
    fn mean_m2(&self) -> f64;

    /// Estimator of `⟨σx⟩` per spin.
    fn sigma_x_estimate(&self) -> f64;
}

/// Whether a slice magnetization counts as reversed. Inclusive, with a small
/// allowance so that `m = -threshold` on the `2/L` lattice is never lost to
/// rounding.
#[inline]
pub(crate) fn is_reversed(m: f64, threshold: f64) -> bool {
    m <= -threshold + 1e-12
}

/// Flip decision for a cluster whose flip changes the action by `ds`.
///
/// Swendsen-Wang uses the heat-bath probability `1/(1 + e^{ds})`: Metropolis
/// would flip every zero-cost cluster at once and leave the relative
/// orientation of the clusters frozen. Wolff flips a single cluster and uses
/// Metropolis, which is rejection-free for a free cluster.
#[inline]
pub(crate) fn accept_cluster(flavor: ClusterFlavor, ds: f64, rng: &mut crate::rng::SimRng) -> bool {
    use rand::Rng;
    match flavor {
        ClusterFlavor::SwendsenWang => rng.random::<f64>() * (1.0 + ds.exp()) < 1.0,
        ClusterFlavor::Wolff => ds <= 0.0 || rng.random::<f64>() < (-ds).exp(),
    }
}
