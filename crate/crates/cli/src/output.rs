//! Experiment directories: manifest, CSV tables and the JSON summary.
//!
//! Everything is buffered in memory by the single aggregator and written once
//! the experiment ends, successfully or not.

use std::fs;
use std::path::{Path, PathBuf};

use qmctunnel::harness::{Engine, FirstPassageRecord, FitResult, ExponentVerdict, ErrorMethod, PointSummary};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::Config;
use crate::report::CliError;

/// Environment variable overriding the output root.
pub const OUTPUT_ROOT_VAR: &str = "QMCTUNNEL_OUTPUT";
const DEFAULT_ROOT: &str = "qmctunnel-runs";

pub fn output_dir(config: &Config) -> PathBuf {
    let root = std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from).unwrap_or_else(|| DEFAULT_ROOT.into());
    root.join(config.output.as_deref().unwrap_or(Path::new(".")))
}

/// One first-passage run as a CSV row. The first ten columns are the stable
/// contract; the rest may grow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub engine: Engine,
    pub topology: String,
    #[serde(rename = "L")]
    pub size: usize,
    pub gamma: Option<f64>,
    pub beta: f64,
    #[serde(rename = "P")]
    pub slices: Option<usize>,
    pub seed: u64,
    pub sweeps_to_reversal: u64,
    pub censored: bool,
    pub threshold: f64,
    pub lambda: Option<f64>,
    pub fraction: f64,
    pub run: u64,
    pub acceptance: Option<f64>,
    pub step: Option<f64>,
}

impl From<&FirstPassageRecord> for RecordRow {
    fn from(r: &FirstPassageRecord) -> Self {
        Self {
            engine: r.engine,
            topology: r.topology.clone(),
            size: r.size,
            gamma: r.gamma,
            beta: r.beta,
            slices: r.slices,
            seed: r.seed,
            sweeps_to_reversal: r.sweeps_to_reversal,
            censored: r.censored,
            threshold: r.threshold,
            lambda: r.lambda,
            fraction: r.fraction,
            run: r.run,
            acceptance: r.acceptance,
            step: r.step,
        }
    }
}

impl From<RecordRow> for FirstPassageRecord {
    fn from(r: RecordRow) -> Self {
        Self {
            engine: r.engine,
            topology: r.topology,
            size: r.size,
            gamma: r.gamma,
            lambda: r.lambda,
            beta: r.beta,
            slices: r.slices,
            run: r.run,
            seed: r.seed,
            sweeps_to_reversal: r.sweeps_to_reversal,
            censored: r.censored,
            threshold: r.threshold,
            fraction: r.fraction,
            acceptance: r.acceptance,
            step: r.step,
        }
    }
}

pub fn read_records(path: &Path) -> Result<Vec<FirstPassageRecord>, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::config("fit.records", e.to_string()))?;
    let rows = reader
        .deserialize::<RecordRow>()
        .map(|r| r.map(FirstPassageRecord::from))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::config("fit.records", format!("{}: {e}", path.display())))?;
    if rows.is_empty() {
        return Err(CliError::config("fit.records", format!("{} holds no records", path.display())));
    }
    Ok(rows)
}

/// Statistics of one simulated point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub engine: Engine,
    pub topology: String,
    #[serde(rename = "L")]
    pub size: usize,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub beta: f64,
    #[serde(rename = "P")]
    pub slices: Option<usize>,
    pub runs: usize,
    pub censored: usize,
    pub mean: f64,
    pub stderr: f64,
    pub median: f64,
    pub usable: bool,
    /// Exact splitting, when the experiment needed it.
    pub delta: Option<f64>,
}

impl SummaryRow {
    pub fn new(first: &FirstPassageRecord, s: &PointSummary, delta: Option<f64>) -> Self {
        Self {
            engine: first.engine,
            topology: first.topology.clone(),
            size: first.size,
            gamma: first.gamma,
            lambda: first.lambda,
            beta: first.beta,
            slices: first.slices,
            runs: s.runs,
            censored: s.censored,
            mean: s.mean,
            stderr: s.stderr,
            median: s.median,
            usable: s.usable,
            delta,
        }
    }
}

/// A fit or a comparison verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitRow {
    pub name: String,
    /// Abscissa of the fit: `L`, `beta` or `ln(1/delta^2)`.
    pub x: String,
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: Option<f64>,
    pub intercept_stderr: Option<f64>,
    pub n_points: Option<usize>,
    pub window_lo: Option<f64>,
    pub window_hi: Option<f64>,
    pub errors: String,
    pub reference: Option<f64>,
    pub reference_stderr: Option<f64>,
    pub sigmas: Option<f64>,
    pub pass: Option<bool>,
}

impl FitRow {
    pub fn from_fit(name: &str, x: &str, f: &FitResult) -> Self {
        Self {
            name: name.into(),
            x: x.into(),
            slope: f.slope,
            slope_stderr: f.slope_stderr,
            intercept: Some(f.intercept),
            intercept_stderr: Some(f.intercept_stderr),
            n_points: Some(f.n_points),
            window_lo: Some(f.fit_window.0),
            window_hi: Some(f.fit_window.1),
            errors: match f.errors {
                ErrorMethod::Analytic => "analytic".into(),
                ErrorMethod::Bootstrap { resamples } => format!("bootstrap-{resamples}"),
            },
            reference: None,
            reference_stderr: None,
            sigmas: None,
            pass: None,
        }
    }

    pub fn verdict(name: &str, x: &str, v: &ExponentVerdict) -> Self {
        Self {
            name: name.into(),
            x: x.into(),
            slope: v.qmc.value,
            slope_stderr: v.qmc.stderr,
            intercept: None,
            intercept_stderr: None,
            n_points: None,
            window_lo: None,
            window_hi: None,
            errors: "combined".into(),
            reference: Some(v.reference.value),
            reference_stderr: Some(v.reference.stderr),
            sigmas: Some(v.sigmas),
            pass: Some(v.pass),
        }
    }
}

/// Buffered artifacts of one experiment.
pub struct ExperimentOutput {
    records: csv::Writer<Vec<u8>>,
    summary: csv::Writer<Vec<u8>>,
    fits: csv::Writer<Vec<u8>>,
    json: Map<String, Value>,
    extra: Vec<(String, Vec<u8>)>,
}

impl Default for ExperimentOutput {
    fn default() -> Self {
        let mut json = Map::new();
        json.insert("summary".into(), Value::Array(Vec::new()));
        json.insert("fits".into(), Value::Array(Vec::new()));
        Self {
            records: csv::Writer::from_writer(Vec::new()),
            summary: csv::Writer::from_writer(Vec::new()),
            fits: csv::Writer::from_writer(Vec::new()),
            json,
            extra: Vec::new(),
        }
    }
}

impl ExperimentOutput {
    pub fn record<T: Serialize>(&mut self, row: &T) -> Result<(), CliError> {
        Ok(self.records.serialize(row)?)
    }

    pub fn summary<T: Serialize>(&mut self, row: &T) -> Result<(), CliError> {
        self.push_json("summary", row);
        Ok(self.summary.serialize(row)?)
    }

    pub fn fit(&mut self, row: &FitRow) -> Result<(), CliError> {
        self.push_json("fits", row);
        Ok(self.fits.serialize(row)?)
    }

    /// Extra entry of the JSON summary.
    pub fn note<T: Serialize>(&mut self, key: &str, value: &T) {
        self.json.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    /// Additional CSV file of the experiment directory.
    pub fn table<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        self.extra.push((name.into(), finish(w)?));
        Ok(())
    }

    fn push_json<T: Serialize>(&mut self, key: &str, row: &T) {
        if let Some(Value::Array(a)) = self.json.get_mut(key) {
            a.push(serde_json::to_value(row).unwrap_or(Value::Null));
        }
    }

    /// Writes the experiment directory. `error` marks a failed experiment
    /// whose partial results are kept.
    pub fn write(self, dir: &Path, config: &Config, error: Option<&CliError>) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
        let put = |name: &str, bytes: &[u8]| {
            fs::write(dir.join(name), bytes).map_err(|e| CliError::io(format!("{}: {e}", dir.join(name).display())))
        };
        put("manifest.toml", manifest(config).as_bytes())?;
        put("records.csv", &finish(self.records)?)?;
        put("summary.csv", &finish(self.summary)?)?;
        put("fits.csv", &finish(self.fits)?)?;
        for (name, bytes) in &self.extra {
            put(name, bytes)?;
        }
        let mut json = self.json;
        json.insert("kind".into(), Value::String(config.kind().name().into()));
        json.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
        json.insert("master_seed".into(), Value::from(config.master_seed.unwrap_or_default()));
        json.insert("status".into(), Value::String(if error.is_some() { "failed" } else { "ok" }.into()));
        json.insert("config".into(), serde_json::to_value(config).unwrap_or(Value::Null));
        let text = serde_json::to_string_pretty(&Value::Object(json)).expect("summary serializes");
        put("summary.json", text.as_bytes())?;
        if let Some(e) = error {
            put("error.json", e.to_json().as_bytes())?;
        }
        Ok(())
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, CliError> {
    w.into_inner().map_err(|e| CliError::io(e.to_string()))
}

/// Resolved configuration as TOML, with the code version in a comment.
pub fn manifest(config: &Config) -> String {
    format!(
        "# qmctunnel {}\n# resolved configuration; rerun with `qmctunnel run --config manifest.toml`\n{}",
        env!("CARGO_PKG_VERSION"),
        config.to_toml()
    )
}
