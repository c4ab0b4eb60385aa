//! Exponential fits `ξ = a e^{bL}` and exponent comparisons.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{SpinModel, Topology};
use crate::rng::rng_from_seed;
use crate::spectrum::{gap_dense, gap_sparse, gap_symmetric_sector, SpectrumResult};

use super::first_passage::{mean_stderr, uncensored, FirstPassageRecord, PointSummary};

/// One `(x, mean ξ, stderr)` point, optionally with the samples behind it
/// for bootstrap errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub x: f64,
    pub mean: f64,
    pub stderr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
}

impl FitPoint {
    pub fn new(x: f64, mean: f64, stderr: f64) -> Self {
        Self {
            x,
            mean,
            stderr,
            samples: None,
        }
    }

    /// Point from the uncensored runs of an experiment. Errors when more than
    /// half of the runs were censored.
    pub fn from_records(x: f64, records: &[FirstPassageRecord]) -> Result<Self> {
        let summary = super::first_passage::summarize(records);
        if !summary.usable {
            return Err(Error::Unusable(format!(
                "{} of {} runs censored at x = {x}",
                summary.censored, summary.runs
            )));
        }
        Ok(Self {
            x,
            mean: summary.mean,
            stderr: summary.stderr,
            samples: Some(uncensored(records)),
        })
    }

    pub fn from_summary(x: f64, summary: &PointSummary) -> Result<Self> {
        if !summary.usable {
            return Err(Error::Unusable(format!("more than half of the runs censored at x = {x}")));
        }
        Ok(Self::new(x, summary.mean, summary.stderr))
    }
}

/// How the reported errors were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMethod {
    /// Weighted least squares covariance (inverse-variance weights), or the
    /// residual scatter when the points carry no errors.
    Analytic,
    /// Spread of fits to resampled runs.
    Bootstrap { resamples: usize },
}

/// Fit of `ln ξ = ln a + b x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// `b`.
    pub slope: f64,
    /// `ln a`.
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    /// Covariance of `(slope, intercept)`.
    pub covariance: [[f64; 2]; 2],
    pub n_points: usize,
    /// Range of `x` actually fitted.
    pub fit_window: (f64, f64),
    pub errors: ErrorMethod,
    /// Analytic slope error, kept alongside bootstrap errors for comparison.
    pub analytic_slope_stderr: f64,
}

impl FitResult {
    pub fn prefactor(&self) -> f64 {
        self.intercept.exp()
    }

    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.slope, self.slope_stderr)
    }
}

/// Bootstrap settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub resamples: usize,
    pub seed: u64,
}

impl Default for Bootstrap {
    fn default() -> Self {
        Self {
            resamples: 1000,
            seed: 0x5eed,
        }
    }
}

/// Straight-line fit `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Covariance of `(slope, intercept)`.
    pub covariance: [[f64; 2]; 2],
    /// Weighted residual sum of squares.
    pub chi2: f64,
}

impl LineFit {
    pub fn slope_stderr(&self) -> f64 {
        self.covariance[0][0].max(0.0).sqrt()
    }

    pub fn intercept_stderr(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }
}

/// Least-squares line. With `sigma` the fit is inverse-variance weighted and
/// the covariance is `(XᵀWX)⁻¹`; without it the covariance is scaled by the
/// residual variance.
pub fn fit_line(x: &[f64], y: &[f64], sigma: Option<&[f64]>) -> Result<LineFit> {
    let n = x.len();
    if y.len() != n || sigma.is_some_and(|s| s.len() != n) {
        return Err(Error::Input("fit inputs differ in length".into()));
    }
    if n < 2 {
        return Err(Error::Input("a line needs at least two points".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Input("fit inputs must be finite".into()));
    }
    let w: Vec<f64> = match sigma {
        Some(s) => {
            if s.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
                return Err(Error::Input("weights need positive finite errors".into()));
            }
            s.iter().map(|e| 1.0 / (e * e)).collect()
        }
        None => vec![1.0; n],
    };
    let sw: f64 = w.iter().sum();
    let xm = w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ym = w.iter().zip(y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * (x - xm) * (x - xm)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Input("all x values coincide".into()));
    }
    let sxy: f64 = (0..n).map(|i| w[i] * (x[i] - xm) * (y[i] - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let chi2: f64 = (0..n).map(|i| w[i] * (y[i] - intercept - slope * x[i]).powi(2)).sum();
    let scale = if sigma.is_some() {
        1.0
    } else if n > 2 {
        chi2 / (n - 2) as f64
    } else {
        0.0
    };
    let var_b = scale / sxx;
    let var_a = scale * (1.0 / sw + xm * xm / sxx);
    let cov_ab = -scale * xm / sxx;
    Ok(LineFit {
        slope,
        intercept,
        covariance: [[var_b, cov_ab], [cov_ab, var_a]],
        chi2,
    })
}

/// Linear least squares `y ≈ Σ_j c_j f_j(x)` for a design matrix given by
/// rows. Returns the coefficients and their covariance scaled by the residual
/// variance.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = rows.len();
    if n == 0 || y.len() != n {
        return Err(Error::Input("design matrix and data differ in length".into()));
    }
    let p = rows[0].len();
    if p == 0 || rows.iter().any(|r| r.len() != p) {
        return Err(Error::Input("ragged design matrix".into()));
    }
    if n < p {
        return Err(Error::Input(format!("{p} coefficients need at least {p} points")));
    }
    let mut ata = vec![vec![0.0; p]; p];
    let mut aty = vec![0.0; p];
    for (r, &yi) in rows.iter().zip(y) {
        for j in 0..p {
            aty[j] += r[j] * yi;
            for k in 0..p {
                ata[j][k] += r[j] * r[k];
            }
        }
    }
    let inv = invert_spd(&ata)?;
    let coef: Vec<f64> = (0..p).map(|j| (0..p).map(|k| inv[j][k] * aty[k]).sum()).collect();
    let rss: f64 = rows
        .iter()
        .zip(y)
        .map(|(r, &yi)| (yi - r.iter().zip(&coef).map(|(a, c)| a * c).sum::<f64>()).powi(2))
        .sum();
    let s2 = if n > p { rss / (n - p) as f64 } else { 0.0 };
    let cov = inv.iter().map(|row| row.iter().map(|v| v * s2).collect()).collect();
    Ok((coef, cov))
}

/// Inverse of a small symmetric positive definite matrix by Cholesky.
fn invert_spd(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let p = a.len();
    let mut l = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..=i {
            let s: f64 = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::Numerical("normal equations are singular".into()));
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // columns of L⁻¹, then (L⁻¹)ᵀ L⁻¹
    let mut linv = vec![vec![0.0; p]; p];
    for c in 0..p {
        for i in c..p {
            let s: f64 = (if i == c { 1.0 } else { 0.0 }) - (c..i).map(|k| l[i][k] * linv[k][c]).sum::<f64>();
            linv[i][c] = s / l[i][i];
        }
    }
    Ok((0..p)
        .map(|i| (0..p).map(|j| (0..p).map(|k| linv[k][i] * linv[k][j]).sum()).collect())
        .collect())
}

/// Weighted least squares of `ln ξ` against `x` over the points inside
/// `window` (inclusive), with bootstrap errors when every point carries at
/// least two samples and `bootstrap` is given.
pub fn fit_exponential(
    points: &[FitPoint],
    window: Option<(f64, f64)>,
    bootstrap: Option<Bootstrap>,
) -> Result<FitResult> {
    let pts: Vec<&FitPoint> = points
        .iter()
        .filter(|p| window.is_none_or(|(lo, hi)| p.x >= lo && p.x <= hi))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Input(format!("an exponential fit needs at least 3 points, got {}", pts.len())));
    }
    if let Some(p) = pts.iter().find(|p| !(p.mean > 0.0) || !p.mean.is_finite()) {
        return Err(Error::Input(format!("mean at x = {} is {}, must be positive", p.x, p.mean)));
    }
    let x: Vec<f64> = pts.iter().map(|p| p.x).collect();
    let main = log_fit(&x, pts.iter().map(|p| (p.mean, p.stderr)))?;
    let mut result = FitResult {
        slope: main.slope,
        intercept: main.intercept,
        slope_stderr: main.slope_stderr(),
        intercept_stderr: main.intercept_stderr(),
        covariance: main.covariance,
        n_points: pts.len(),
        fit_window: (x.iter().copied().fold(f64::INFINITY, f64::min), x.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        errors: ErrorMethod::Analytic,
        analytic_slope_stderr: main.slope_stderr(),
    };
    let samples: Option<Vec<&Vec<f64>>> = pts.iter().map(|p| p.samples.as_ref().filter(|s| s.len() >= 2)).collect();
    if let (Some(bs), Some(samples)) = (bootstrap, samples) {
        if bs.resamples < 2 {
            return Err(Error::Input("bootstrap needs at least two resamples".into()));
        }
        let mut rng = rng_from_seed(bs.seed);
        let mut fits = Vec::with_capacity(bs.resamples);
        let mut draw = Vec::new();
        while fits.len() < bs.resamples {
            let mut stats = Vec::with_capacity(samples.len());
            for s in &samples {
                draw.clear();
                draw.extend((0..s.len()).map(|_| s[rng.random_range(0..s.len())]));
                stats.push(mean_stderr(&draw));
            }
            // a resample of all-zero times has no logarithm
            if stats.iter().any(|(m, e)| !(*m > 0.0) || !(*e > 0.0)) {
                continue;
            }
            fits.push(log_fit(&x, stats.into_iter())?);
        }
        let n = fits.len() as f64;
        let mb = fits.iter().map(|f| f.slope).sum::<f64>() / n;
        let ma = fits.iter().map(|f| f.intercept).sum::<f64>() / n;
        let cov = |f: &dyn Fn(&LineFit) -> f64, g: &dyn Fn(&LineFit) -> f64, mf: f64, mg: f64| {
            fits.iter().map(|t| (f(t) - mf) * (g(t) - mg)).sum::<f64>() / (n - 1.0)
        };
        let b = |t: &LineFit| t.slope;
        let a = |t: &LineFit| t.intercept;
        let vbb = cov(&b, &b, mb, mb);
        let vaa = cov(&a, &a, ma, ma);
        let vab = cov(&b, &a, mb, ma);
        result.slope_stderr = vbb.sqrt();
        result.intercept_stderr = vaa.sqrt();
        result.covariance = [[vbb, vab], [vab, vaa]];
        result.errors = ErrorMethod::Bootstrap {
            resamples: bs.resamples,
        };
    }
    Ok(result)
}

/// Line through `(x, ln mean)`, weighted by `σ_ln = stderr/mean` when every
/// point has a positive finite error.
fn log_fit(x: &[f64], stats: impl Iterator<Item = (f64, f64)>) -> Result<LineFit> {
    let (y, s): (Vec<f64>, Vec<f64>) = stats.map(|(m, e)| (m.ln(), e / m)).unzip();
    let weighted = s.iter().all(|&e| e > 0.0 && e.is_finite());
    fit_line(x, &y, weighted.then_some(s.as_slice()))
}

/// Chains up to this size are diagonalized densely; the Krylov solver is
/// faster beyond.
const DENSE_CHAIN_SIZE: usize = 10;

/// Splitting of a spin model by the cheapest exact method: the symmetric
/// sector for permutation-symmetric models, dense for small chains, the
/// iterative solver otherwise.
pub fn exact_splitting(model: &SpinModel<f64>) -> Result<SpectrumResult<f64>> {
    match model.topology() {
        Topology::FullyConnected | Topology::MeanFieldPSpin => gap_symmetric_sector(model),
        Topology::Chain if model.size() <= DENSE_CHAIN_SIZE => gap_dense(model),
        Topology::Chain => gap_sparse(model, 2),
    }
}

/// Exponent of `1/Δ^power` against `L` from exact splittings: unweighted fit
/// of `-power·ln Δ(L)`; the error reflects departures from a pure exponential.
pub fn ed_exponent(
    sizes: &[usize],
    power: f64,
    model_at: impl Fn(usize) -> Result<SpinModel<f64>>,
) -> Result<FitResult> {
    if sizes.len() < 3 {
        return Err(Error::Input(format!("an exponential fit needs at least 3 sizes, got {}", sizes.len())));
    }
    let mut points = Vec::with_capacity(sizes.len());
    for &l in sizes {
        let delta = exact_splitting(&model_at(l)?)?.delta;
        if !(delta > 0.0) {
            return Err(Error::Numerical(format!("splitting at L = {l} is {delta}, not positive")));
        }
        points.push(FitPoint::new(l as f64, delta.powf(-power), 0.0));
    }
    fit_exponential(&points, None, None)
}

/// A value with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(value: f64, stderr: f64) -> Self {
        Self { value, stderr }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self::new(self.value * factor, self.stderr * factor.abs())
    }
}

impl std::fmt::Display for Estimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.4} ± {:.4}", self.value, self.stderr)
    }
}

/// Which power of the splitting a QMC exponent is compared with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentMode {
    /// `ξ ∝ 1/Δ²` (periodic paths).
    Squared,
    /// `ξ ∝ 1/Δ` (open paths).
    Linear,
}

impl ExponentMode {
    fn power(self) -> f64 {
        match self {
            ExponentMode::Squared => 2.0,
            ExponentMode::Linear => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentVerdict {
    pub qmc: Estimate,
    /// The splitting exponent scaled to the mode's power.
    pub reference: Estimate,
    pub mode: ExponentMode,
    /// `|b_qmc - b_ref|` in units of the combined error.
    pub sigmas: f64,
    pub pass: bool,
}

/// Tolerance of [`exponent_comparison`], in combined standard errors.
pub const EXPONENT_SIGMAS: f64 = 3.0;

/// Compares a fitted QMC exponent with `power × gap_exponent`, where
/// `gap_exponent` is the exponent of `1/Δ`.
pub fn exponent_comparison(qmc: &FitResult, gap_exponent: Estimate, mode: ExponentMode) -> ExponentVerdict {
    compare_estimates(qmc.estimate(), gap_exponent.scaled(mode.power()), mode)
}

pub fn compare_estimates(qmc: Estimate, reference: Estimate, mode: ExponentMode) -> ExponentVerdict {
    let sigma = qmc.stderr.hypot(reference.stderr);
    let diff = (qmc.value - reference.value).abs();
    let sigmas = if sigma > 0.0 {
        diff / sigma
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    ExponentVerdict {
        qmc,
        reference,
        mode,
        sigmas,
        pass: sigmas <= EXPONENT_SIGMAS,
    }
}
