//! Experiment configuration: TOML file, command-line overrides, defaults.
//!
//! A config is resolved before anything runs: every default is written back
//! into it, so the manifest of an experiment reruns it exactly.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use qmctunnel::harness::{Engine, ExponentMode, DEFAULT_FRACTION, DEFAULT_SLICES, DEFAULT_TARGET_ACCEPTANCE, DEFAULT_THRESHOLD};
use qmctunnel::qmc::UpdateScheme;
use serde::{Deserialize, Serialize};

use crate::report::CliError;

/// Default run budget in sweeps.
pub const DEFAULT_BUDGET: u64 = 100_000_000;
/// Default number of runs per point.
pub const DEFAULT_RUNS: usize = 200;
pub const DEFAULT_BEADS: usize = 64;
pub const DEFAULT_BOOTSTRAP: usize = 1000;
pub const DEFAULT_MASTER_SEED: u64 = 1;
/// Langevin defaults: step `δ` and friction `γ` near critical damping of the
/// ring-polymer centroid in the wells.
pub const DEFAULT_LANGEVIN_DELTA: f64 = 0.25;
pub const DEFAULT_LANGEVIN_FRICTION: f64 = 0.7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    EdGap,
    Wkb,
    PimcSpin,
    PigsSpin,
    PimcWell,
    PimdWell,
    TempScan,
    SizeScan,
    Fit,
    Compare,
}

impl Kind {
    pub const ALL: [Kind; 10] = [
        Kind::EdGap,
        Kind::Wkb,
        Kind::PimcSpin,
        Kind::PigsSpin,
        Kind::PimcWell,
        Kind::PimdWell,
        Kind::TempScan,
        Kind::SizeScan,
        Kind::Fit,
        Kind::Compare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::EdGap => "ed-gap",
            Kind::Wkb => "wkb",
            Kind::PimcSpin => "pimc-spin",
            Kind::PigsSpin => "pigs-spin",
            Kind::PimcWell => "pimc-well",
            Kind::PimdWell => "pimd-well",
            Kind::TempScan => "temp-scan",
            Kind::SizeScan => "size-scan",
            Kind::Fit => "fit",
            Kind::Compare => "compare",
        }
    }

    fn is_well(self) -> bool {
        matches!(self, Kind::PimcWell | Kind::PimdWell)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CliError::config("kind", format!("unknown experiment kind {s:?}; see `qmctunnel list`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyName {
    Chain,
    OpenChain,
    FullyConnected,
    DoubleWell,
}

impl TopologyName {
    pub fn is_spin(self) -> bool {
        self != TopologyName::DoubleWell
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialName {
    CurieWeiss,
    Grover,
}

/// Abscissa of a fit of `ln ξ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitAxis {
    /// System size `L`.
    Size,
    /// Inverse temperature `β` (Arrhenius).
    Beta,
    /// `ln(1/Δ²)` from the exact splitting of each point.
    Gap,
}

/// Integer list written as `12`, `[12, 14]` or `"12..16"` (inclusive).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizeList {
    One(usize),
    Many(Vec<usize>),
    Text(String),
}

impl SizeList {
    pub fn expand(&self) -> Result<Vec<usize>, CliError> {
        match self {
            SizeList::One(l) => Ok(vec![*l]),
            SizeList::Many(v) => Ok(v.clone()),
            SizeList::Text(s) => parse_sizes(s).map_err(|m| CliError::config("model.sizes", m)),
        }
    }
}

/// Real list written as `0.1` or `[0.1, 0.2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RealList {
    One(f64),
    Many(Vec<f64>),
}

impl RealList {
    pub fn values(&self) -> Vec<f64> {
        match self {
            RealList::One(x) => vec![*x],
            RealList::Many(v) => v.clone(),
        }
    }
}

/// Parses `12`, `12,14,16` or `12..16`.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("cannot read sizes from {s:?}; use 12, 12,14,16 or 12..16");
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

/// Parses `0.5` or `0.5,1,2`.
pub fn parse_reals(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("cannot read a number from {t:?}")))
        .collect()
}

/// Parses a pair `a,b` or `a..b`.
pub fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s
        .split_once("..")
        .or_else(|| s.split_once(','))
        .ok_or_else(|| format!("expected two numbers as a,b or a..b, got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("cannot read a number from {t:?}"));
    Ok([p(a)?, p(b)?])
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<SizeList>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Longitudinal field.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Quartic coefficient(s) of the double well.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<RealList>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    /// Mean-field potential of `wkb` experiments.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialName>,
    /// Rescaled spin `ℓ` of `wkb` experiments.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Temperature of double-well runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    /// Trotter slices or beads `P`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slices: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<UpdateScheme>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    /// Fixed Metropolis step of double-well runs; tuned when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_acceptance: Option<f64>,
    /// Langevin time step.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Langevin friction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub friction: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub betas: Option<RealList>,
    /// β range of the Arrhenius fit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub high_t_window: Option<[f64; 2]>,
    /// β range of the quantum plateau.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub low_t_window: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// Bootstrap resamples; 0 keeps the analytic errors.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<usize>,
    /// `records.csv` of an earlier experiment (`fit` and `compare`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<FitAxis>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ExponentMode>,
    /// QMC exponent `[value, stderr]` given directly instead of fitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<[f64; 2]>,
    /// Exponent of `1/Δ` `[value, stderr]`; computed exactly when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_exponent: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    /// Output directory, relative to the output root.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub engine: EngineSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub scan: ScanSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub fit: FitSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub compare: CompareSection,
}

fn is_default<T: Default + PartialEq>(t: &T) -> bool {
    *t == T::default()
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let key = match (unknown_key(&message), e.span()) {
                (Some(k), Some(span)) => match section_at(text, span.start) {
                    Some(sec) => format!("{sec}.{k}"),
                    None => k,
                },
                (Some(k), None) => k,
                _ => String::new(),
            };
            CliError::config(&key, message)
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    /// Copies every key set in `other` over this config.
    pub fn overlay(&mut self, other: Config) {
        macro_rules! take {
            ($($dst:expr => $src:expr),* $(,)?) => { $( if $src.is_some() { $dst = $src; } )* };
        }
        take!(self.kind => other.kind, self.master_seed => other.master_seed,
              self.output => other.output, self.threads => other.threads);
        let (m, o) = (&mut self.model, other.model);
        take!(m.topology => o.topology, m.sizes => o.sizes, m.gamma => o.gamma, m.h => o.h,
              m.lambda => o.lambda, m.mass => o.mass, m.potential => o.potential, m.ell => o.ell);
        let (e, o) = (&mut self.engine, other.engine);
        take!(e.name => o.name, e.beta => o.beta, e.temperature => o.temperature, e.slices => o.slices,
              e.scheme => o.scheme, e.threshold => o.threshold, e.fraction => o.fraction,
              e.budget => o.budget, e.runs => o.runs, e.step => o.step,
              e.target_acceptance => o.target_acceptance, e.delta => o.delta, e.friction => o.friction);
        let (s, o) = (&mut self.scan, other.scan);
        take!(s.betas => o.betas, s.high_t_window => o.high_t_window, s.low_t_window => o.low_t_window);
        let (f, o) = (&mut self.fit, other.fit);
        take!(f.window => o.window, f.bootstrap => o.bootstrap, f.records => o.records, f.x => o.x);
        let (c, o) = (&mut self.compare, other.compare);
        take!(c.mode => o.mode, c.exponent => o.exponent, c.gap_exponent => o.gap_exponent);
    }

    pub fn kind(&self) -> Kind {
        self.kind.expect("resolved config has a kind")
    }

    pub fn engine(&self) -> Engine {
        self.engine.name.as_deref().and_then(|n| n.parse().ok()).expect("resolved config has an engine")
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.model.sizes.as_ref().map(|s| s.expand().unwrap_or_default()).unwrap_or_default()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.model.lambda.as_ref().map(RealList::values).unwrap_or_default()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.scan.betas.as_ref().map(RealList::values).unwrap_or_default()
    }

    /// Fills every default for the experiment kind and validates ranges. The
    /// result is what the manifest records.
    pub fn resolve(mut self) -> Result<Config, CliError> {
        let kind = self.kind.ok_or_else(|| CliError::config("kind", "no experiment kind given"))?;
        self.master_seed.get_or_insert(DEFAULT_MASTER_SEED);
        self.threads.get_or_insert(0);
        self.output.get_or_insert_with(|| PathBuf::from(kind.name()));
        match kind {
            Kind::EdGap => self.resolve_ed()?,
            Kind::Wkb => self.resolve_wkb()?,
            Kind::Fit | Kind::Compare => self.resolve_fit(kind)?,
            _ => self.resolve_simulation(kind)?,
        }
        Ok(self)
    }

    fn resolve_ed(&mut self) -> Result<(), CliError> {
        let topology = *self.model.topology.get_or_insert(TopologyName::Chain);
        if topology.is_spin() {
            self.require_spin_model()?;
        } else {
            self.require_well_model()?;
        }
        Ok(())
    }

    fn resolve_wkb(&mut self) -> Result<(), CliError> {
        let m = &mut self.model;
        let potential = *m.potential.get_or_insert(PotentialName::CurieWeiss);
        let gamma = m.gamma.ok_or_else(|| CliError::config("model.gamma", "required"))?;
        positive("model.gamma", gamma)?;
        if potential == PotentialName::CurieWeiss {
            m.h.get_or_insert(0.0);
            let ell = *m.ell.get_or_insert(1.0);
            if !(ell > 0.0 && ell <= 1.0) {
                return Err(CliError::config("model.ell", format!("must lie in (0, 1], got {ell}")));
            }
        } else if m.h.is_some() || m.ell.is_some() {
            return Err(CliError::config("model.h", "the Grover potential takes neither h nor ell"));
        }
        Ok(())
    }

    fn resolve_fit(&mut self, kind: Kind) -> Result<(), CliError> {
        let direct = kind == Kind::Compare && self.compare.exponent.is_some();
        if !direct {
            let records = self.fit.records.as_ref().ok_or_else(|| {
                CliError::config("fit.records", "path to a records.csv of an earlier experiment is required")
            })?;
            if !records.is_file() {
                return Err(CliError::config("fit.records", format!("{} is not a file", records.display())));
            }
            self.fit.x.get_or_insert(FitAxis::Size);
            self.fit.bootstrap.get_or_insert(DEFAULT_BOOTSTRAP);
        }
        if let Some([lo, hi]) = self.fit.window {
            if !(lo <= hi) {
                return Err(CliError::config("fit.window", format!("empty window [{lo}, {hi}]")));
            }
        }
        if kind == Kind::Compare {
            if self.compare.mode.is_none() {
                let open = match &self.fit.records {
                    Some(path) if !direct => crate::output::read_records(path)?.iter().any(|r| r.engine.is_open()),
                    _ => false,
                };
                self.compare.mode = Some(if open { ExponentMode::Linear } else { ExponentMode::Squared });
            }
            for (key, pair) in [("compare.exponent", self.compare.exponent), ("compare.gap_exponent", self.compare.gap_exponent)] {
                if let Some([_, err]) = pair {
                    if !(err >= 0.0) {
                        return Err(CliError::config(key, format!("standard error must be >= 0, got {err}")));
                    }
                }
            }
            if self.compare.gap_exponent.is_none() {
                if direct {
                    self.model.topology.get_or_insert(TopologyName::Chain);
                    self.require_spin_model()?;
                    if self.sizes().len() < 3 {
                        return Err(CliError::config("model.sizes", "the exact exponent needs at least 3 sizes"));
                    }
                } else {
                    // the model of the records supplies size and field; the
                    // topology and h can still be set here
                    self.model.h.get_or_insert(0.0);
                }
            }
        }
        Ok(())
    }

    fn resolve_simulation(&mut self, kind: Kind) -> Result<(), CliError> {
        let default_engine = match kind {
            Kind::PigsSpin => Engine::PigsContinuous,
            Kind::PimcWell => Engine::PimcWell,
            Kind::PimdWell => Engine::PimdWell,
            _ => Engine::PimcContinuous,
        };
        let engine = match self.engine.name.as_deref() {
            None => default_engine,
            Some(name) => parse_engine(name)?,
        };
        self.engine.name = Some(engine.name().into());
        let compatible = match kind {
            Kind::PimcSpin => engine.is_spin() && !engine.is_open(),
            Kind::PigsSpin => engine.is_open(),
            Kind::PimcWell | Kind::PimdWell => engine == default_engine,
            _ => engine.is_spin(),
        };
        if !compatible {
            return Err(CliError::config("engine.name", format!("engine {engine} cannot run a {kind} experiment")));
        }
        let e = &mut self.engine;
        let threshold = *e.threshold.get_or_insert(DEFAULT_THRESHOLD);
        let fraction = *e.fraction.get_or_insert(DEFAULT_FRACTION);
        in_unit("engine.threshold", threshold)?;
        in_unit("engine.fraction", fraction)?;
        if *e.budget.get_or_insert(DEFAULT_BUDGET) == 0 {
            return Err(CliError::config("engine.budget", "must be at least one sweep"));
        }
        if *e.runs.get_or_insert(DEFAULT_RUNS) == 0 {
            return Err(CliError::config("engine.runs", "must be at least 1"));
        }
        if kind.is_well() {
            self.resolve_well(engine)?;
        } else {
            self.resolve_spin(kind, engine)?;
        }
        self.fit.bootstrap.get_or_insert(DEFAULT_BOOTSTRAP);
        Ok(())
    }

    fn resolve_spin(&mut self, kind: Kind, engine: Engine) -> Result<(), CliError> {
        let topology = *self.model.topology.get_or_insert(TopologyName::Chain);
        if !topology.is_spin() {
            return Err(CliError::config("model.topology", format!("{kind} needs a spin model")));
        }
        self.require_spin_model()?;
        let e = &mut self.engine;
        for (key, set) in [
            ("engine.temperature", e.temperature.is_some()),
            ("engine.step", e.step.is_some()),
            ("engine.target_acceptance", e.target_acceptance.is_some()),
            ("engine.delta", e.delta.is_some()),
            ("engine.friction", e.friction.is_some()),
        ] {
            if set {
                return Err(CliError::config(key, "only applies to double-well engines"));
            }
        }
        let scheme = *e.scheme.get_or_insert(UpdateScheme::SwendsenWang);
        if engine.is_discrete() {
            if *e.slices.get_or_insert(DEFAULT_SLICES) < 2 {
                return Err(CliError::config("engine.slices", "need at least 2 slices"));
            }
        } else {
            if e.slices.is_some() {
                return Err(CliError::config("engine.slices", format!("{engine} works in continuous time")));
            }
            if scheme == UpdateScheme::Local {
                return Err(CliError::config("engine.scheme", "continuous-time engines need a cluster scheme"));
            }
        }
        if kind == Kind::TempScan {
            if e.beta.is_some() {
                return Err(CliError::config("engine.beta", "temp-scan takes its β grid from scan.betas"));
            }
            let betas = self.betas();
            if betas.len() < 2 {
                return Err(CliError::config("scan.betas", "a temperature scan needs at least 2 β values"));
            }
            for &b in &betas {
                positive("scan.betas", b)?;
            }
            let lo = betas.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = betas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            self.scan.high_t_window.get_or_insert([lo, lo.max(2.0)]);
            self.scan.low_t_window.get_or_insert([hi.min(8.0), hi]);
        } else {
            positive("engine.beta", e.beta.ok_or_else(|| CliError::config("engine.beta", "required"))?)?;
            if self.scan != ScanSection::default() {
                return Err(CliError::config("scan", "only temp-scan takes a scan section"));
            }
        }
        if kind == Kind::SizeScan {
            let sizes = self.sizes();
            if sizes.len() < 3 {
                return Err(CliError::config("model.sizes", "a size scan needs at least 3 sizes"));
            }
            let default = if engine.is_open() { [12.0, 18.0] } else { [12.0, 16.0] };
            self.fit.window.get_or_insert(default);
            self.fit.x.get_or_insert(FitAxis::Size);
            let mode = if engine.is_open() { ExponentMode::Linear } else { ExponentMode::Squared };
            self.compare.mode.get_or_insert(mode);
        }
        Ok(())
    }

    fn resolve_well(&mut self, engine: Engine) -> Result<(), CliError> {
        let topology = *self.model.topology.get_or_insert(TopologyName::DoubleWell);
        if topology != TopologyName::DoubleWell {
            return Err(CliError::config("model.topology", "double-well engines need topology = \"double-well\""));
        }
        self.require_well_model()?;
        let e = &mut self.engine;
        if e.beta.is_some() || e.scheme.is_some() {
            let key = if e.beta.is_some() { "engine.beta" } else { "engine.scheme" };
            return Err(CliError::config(key, "double-well runs take engine.temperature and no update scheme"));
        }
        positive(
            "engine.temperature",
            e.temperature.ok_or_else(|| CliError::config("engine.temperature", "required"))?,
        )?;
        if *e.slices.get_or_insert(DEFAULT_BEADS) < 2 {
            return Err(CliError::config("engine.slices", "need at least 2 beads"));
        }
        if engine == Engine::PimcWell {
            if e.delta.is_some() || e.friction.is_some() {
                return Err(CliError::config("engine.delta", "Langevin parameters only apply to pimd-well"));
            }
            if let Some(step) = e.step {
                positive("engine.step", step)?;
            } else {
                in_unit("engine.target_acceptance", *e.target_acceptance.get_or_insert(DEFAULT_TARGET_ACCEPTANCE))?;
            }
        } else {
            if e.step.is_some() || e.target_acceptance.is_some() {
                return Err(CliError::config("engine.step", "Metropolis parameters only apply to pimc-well"));
            }
            let delta = *e.delta.get_or_insert(DEFAULT_LANGEVIN_DELTA);
            let friction = *e.friction.get_or_insert(DEFAULT_LANGEVIN_FRICTION);
            positive("engine.delta", delta)?;
            positive("engine.friction", friction)?;
            if delta * friction >= 2.0 {
                return Err(CliError::config("engine.friction", "δ·γ must stay below 2"));
            }
        }
        if self.lambdas().len() >= 3 {
            self.fit.x.get_or_insert(FitAxis::Gap);
        }
        Ok(())
    }

    fn require_spin_model(&mut self) -> Result<(), CliError> {
        let m = &mut self.model;
        if m.lambda.is_some() || m.mass.is_some() {
            return Err(CliError::config("model.lambda", "spin models take no double-well parameters"));
        }
        if m.potential.is_some() || m.ell.is_some() {
            return Err(CliError::config("model.potential", "only wkb experiments take a potential"));
        }
        positive("model.gamma", m.gamma.ok_or_else(|| CliError::config("model.gamma", "required"))?)?;
        let h = *m.h.get_or_insert(0.0);
        if !h.is_finite() {
            return Err(CliError::config("model.h", "must be finite"));
        }
        let sizes = m.sizes.as_ref().ok_or_else(|| CliError::config("model.sizes", "required"))?.expand()?;
        if sizes.is_empty() || sizes.iter().any(|&l| l < 2) {
            return Err(CliError::config("model.sizes", "every size must be at least 2"));
        }
        m.sizes = Some(SizeList::Many(sizes));
        Ok(())
    }

    fn require_well_model(&mut self) -> Result<(), CliError> {
        let m = &mut self.model;
        if m.gamma.is_some() || m.h.is_some() || m.sizes.is_some() {
            return Err(CliError::config("model.gamma", "the double well takes lambda and mass only"));
        }
        let lambdas = m.lambda.as_ref().ok_or_else(|| CliError::config("model.lambda", "required"))?.values();
        if lambdas.is_empty() {
            return Err(CliError::config("model.lambda", "needs at least one value"));
        }
        for &l in &lambdas {
            positive("model.lambda", l)?;
        }
        m.lambda = Some(RealList::Many(lambdas));
        positive("model.mass", *m.mass.get_or_insert(0.5))?;
        Ok(())
    }
}

/// Engine names with the short aliases `pimc` and `pigs` for the
/// continuous-time samplers.
pub fn parse_engine(name: &str) -> Result<Engine, CliError> {
    match name {
        "pimc" => Ok(Engine::PimcContinuous),
        "pigs" => Ok(Engine::PigsContinuous),
        other => other.parse().map_err(|_| {
            let known: Vec<&str> = Engine::ALL.iter().map(|e| e.name()).collect();
            CliError::config("engine.name", format!("unknown engine {other:?}; known: pimc, pigs, {}", known.join(", ")))
        }),
    }
}

fn positive(key: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(key, format!("must be positive and finite, got {x}")))
    }
}

fn in_unit(key: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(CliError::config(key, format!("must lie in (0, 1], got {x}")))
    }
}

/// Table header in force at byte `pos` of a TOML document.
fn section_at(text: &str, pos: usize) -> Option<String> {
    text[..pos.min(text.len())]
        .lines()
        .filter_map(|l| l.trim().strip_prefix('[')?.split(']').next())
        .last()
        .map(|s| s.trim().to_string())
}

/// Key named in a serde "unknown field" message.
fn unknown_key(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest.split('`').next()?.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_lists() {
        assert_eq!(parse_sizes("12..15").unwrap(), vec![12, 13, 14, 15]);
        assert_eq!(parse_sizes("8, 12").unwrap(), vec![8, 12]);
        assert_eq!(parse_sizes("10").unwrap(), vec![10]);
        assert!(parse_sizes("16..12").is_err());
        assert!(parse_sizes("a").is_err());
    }

    #[test]
    fn pairs() {
        assert_eq!(parse_pair("12..18").unwrap(), [12.0, 18.0]);
        assert_eq!(parse_pair("0.5,2").unwrap(), [0.5, 2.0]);
        assert!(parse_pair("3").is_err());
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = Config::from_toml("kind = \"wkb\"\n[model]\ngama = 0.5\n").unwrap_err();
        assert_eq!(err.key(), Some("model.gama"));
        let err = Config::from_toml("kind = \"wkb\"\nseeed = 3\n").unwrap_err();
        assert_eq!(err.key(), Some("seeed"));
    }

    #[test]
    fn sizes_accept_ranges_in_toml() {
        let c = Config::from_toml("kind = \"ed-gap\"\n[model]\nsizes = \"4..6\"\ngamma = 0.5\n").unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.sizes(), vec![4, 5, 6]);
        assert_eq!(r.model.topology, Some(TopologyName::Chain));
    }

    #[test]
    fn resolution_fills_defaults() {
        let c = Config::from_toml("kind = \"size-scan\"\n[model]\nsizes = [6, 7, 8]\ngamma = 0.8\n[engine]\nname = \"pigs\"\nbeta = 4.0\n")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(c.engine(), Engine::PigsContinuous);
        assert_eq!(c.engine.budget, Some(DEFAULT_BUDGET));
        assert_eq!(c.fit.window, Some([12.0, 18.0]));
        assert_eq!(c.compare.mode, Some(ExponentMode::Linear));
        assert_eq!(c.engine.slices, None);
        let again = Config::from_toml(&c.to_toml()).unwrap().resolve().unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn incompatible_engine_is_rejected() {
        let c = Config::from_toml("kind = \"pimc-spin\"\n[model]\nsizes = 6\ngamma = 0.8\n[engine]\nname = \"pigs\"\nbeta = 4.0\n")
            .unwrap();
        assert_eq!(c.resolve().unwrap_err().key(), Some("engine.name"));
    }

    #[test]
    fn missing_keys_are_named() {
        let c = Config::from_toml("kind = \"pimd-well\"\n[model]\nlambda = 0.2\n").unwrap();
        assert_eq!(c.resolve().unwrap_err().key(), Some("engine.temperature"));
    }

    #[test]
    fn overlay_prefers_the_overlay() {
        let mut base = Config::from_toml("kind = \"wkb\"\n[model]\ngamma = 0.5\nh = 0.1\n").unwrap();
        let mut flags = Config::default();
        flags.model.gamma = Some(0.6);
        base.overlay(flags);
        assert_eq!(base.model.gamma, Some(0.6));
        assert_eq!(base.model.h, Some(0.1));
    }
}
