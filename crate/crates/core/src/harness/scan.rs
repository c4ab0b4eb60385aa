//! Scans of `ξ` over inverse temperature and system size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::run_seed;

use super::first_passage::{measure_first_passage, summarize, FirstPassageRecord, PointSummary, RunSpec};
use super::fit::{fit_exponential, Bootstrap, FitPoint, FitResult};

/// One `(L, β)` point of a scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub size: usize,
    pub beta: f64,
    pub summary: PointSummary,
    #[serde(skip)]
    pub records: Vec<FirstPassageRecord>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
}

/// `ξ(β, L)` on the product grid. Point `k` (sizes outer, β inner) draws its
/// runs from the master seed `run_seed(master_seed, k)`.
pub fn temperature_scan(
    sizes: &[usize],
    betas: &[f64],
    spec_at: impl Fn(usize, f64) -> Result<RunSpec>,
    n_runs: usize,
    budget: u64,
    master_seed: u64,
) -> Result<ScanTable> {
    if sizes.is_empty() || betas.is_empty() {
        return Err(Error::Input("a scan needs at least one size and one β".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len() * betas.len());
    for (i, &size) in sizes.iter().enumerate() {
        for (j, &beta) in betas.iter().enumerate() {
            let point = (i * betas.len() + j) as u64;
            let records = measure_first_passage(&spec_at(size, beta)?, n_runs, budget, run_seed(master_seed, point))?;
            rows.push(ScanRow {
                size,
                beta,
                summary: summarize(&records),
                records,
            });
        }
    }
    Ok(ScanTable { rows })
}

/// `|a - b|` in units of the combined standard error.
pub fn z_score(a: &PointSummary, b: &PointSummary) -> f64 {
    (a.mean - b.mean).abs() / a.stderr.hypot(b.stderr)
}

impl ScanTable {
    pub fn point(&self, size: usize, beta: f64) -> Option<&ScanRow> {
        self.rows.iter().find(|r| r.size == size && r.beta == beta)
    }

    /// Arrhenius fit `ln ξ = const + E β` over `β ∈ window` at fixed `L`;
    /// the slope estimates the barrier `E`.
    pub fn arrhenius(&self, size: usize, window: (f64, f64), bootstrap: Option<Bootstrap>) -> Result<FitResult> {
        let points = self
            .rows
            .iter()
            .filter(|r| r.size == size && r.beta >= window.0 && r.beta <= window.1)
            .map(|r| FitPoint::from_records(r.beta, &r.records).or_else(|_| FitPoint::from_summary(r.beta, &r.summary)))
            .collect::<Result<Vec<_>>>()?;
        fit_exponential(&points, None, bootstrap)
    }

    /// Largest pairwise z-score between sizes at one `β` (0 when fewer than two
    /// sizes were scanned).
    pub fn size_spread(&self, beta: f64) -> f64 {
        let rows: Vec<&ScanRow> = self.rows.iter().filter(|r| r.beta == beta).collect();
        max_pairwise(&rows)
    }

    /// Largest pairwise z-score between the listed `β` values at one size.
    pub fn beta_spread(&self, size: usize, betas: &[f64]) -> f64 {
        let rows: Vec<&ScanRow> = self
            .rows
            .iter()
            .filter(|r| r.size == size && betas.contains(&r.beta))
            .collect();
        max_pairwise(&rows)
    }
}

fn max_pairwise(rows: &[&ScanRow]) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, a) in rows.iter().enumerate() {
        for b in &rows[k + 1..] {
            worst = worst.max(z_score(&a.summary, &b.summary));
        }
    }
    worst
}
