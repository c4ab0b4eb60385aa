//! Runners of the experiment kinds.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};

use qmctunnel::harness::{
    compare_estimates, ed_exponent, exact_splitting, exponent_comparison, fit_exponential, measure_first_passage,
    summarize, Bootstrap, Engine, Estimate, ExponentMode, FirstPassageRecord, FitPoint, FitResult, ReversalCriterion,
    RunSpec, ScanRow, ScanTable, SpinRun, WellMover, WellRun,
};
use qmctunnel::qmc::LangevinParams;
use qmctunnel::rng::run_seed;
use qmctunnel::spectrum::gap_double_well;
use qmctunnel::wkb::{action, instanton_trajectory, splitting_closed_form, turning_points};
use qmctunnel::{DoubleWell64, GridSpec, SpinModel64, SpectrumResult64, WkbProblem64};
use serde::Serialize;

use crate::config::{Config, FitAxis, Kind, PotentialName, TopologyName};
use crate::output::{ExperimentOutput, FitRow, RecordRow, SummaryRow};
use crate::report::{panic_message, CliError};

/// Seed of the bootstrap stream, derived from the master seed.
const BOOTSTRAP_STREAM: u64 = 0xb007_5742;
/// Samples of the instanton trajectory written by `wkb`.
const TRAJECTORY_SAMPLES: usize = 201;
const TRAJECTORY_EPSILON: f64 = 1e-6;

pub fn execute(config: &Config, out: &mut ExperimentOutput) -> Result<(), CliError> {
    match config.kind() {
        Kind::EdGap => ed_gap(config, out),
        Kind::Wkb => wkb(config, out),
        Kind::PimcSpin | Kind::PigsSpin | Kind::SizeScan | Kind::TempScan => spin_experiment(config, out),
        Kind::PimcWell | Kind::PimdWell => well_experiment(config, out),
        Kind::Fit => fit_records(config, out),
        Kind::Compare => compare(config, out),
    }
}

pub fn spin_model(topology: TopologyName, size: usize, gamma: f64, h: f64) -> Result<SpinModel64, CliError> {
    let model = match topology {
        TopologyName::Chain => SpinModel64::chain(size, gamma)?,
        TopologyName::OpenChain => SpinModel64::open_chain(size, gamma)?,
        TopologyName::FullyConnected => SpinModel64::fully_connected(size, gamma)?,
        TopologyName::DoubleWell => return Err(CliError::config("model.topology", "not a spin model")),
    };
    Ok(if h != 0.0 { model.with_field(h)? } else { model })
}

fn topology_of(name: &str) -> Result<TopologyName, CliError> {
    match name {
        "chain" => Ok(TopologyName::Chain),
        "open-chain" => Ok(TopologyName::OpenChain),
        "fully-connected" => Ok(TopologyName::FullyConnected),
        "double-well" => Ok(TopologyName::DoubleWell),
        other => Err(CliError::config("fit.records", format!("unsupported topology {other:?}"))),
    }
}

fn bootstrap(config: &Config) -> Option<Bootstrap> {
    let resamples = config.fit.bootstrap.unwrap_or(0);
    (resamples > 0).then(|| Bootstrap {
        resamples,
        seed: run_seed(config.master_seed.unwrap_or_default(), BOOTSTRAP_STREAM),
    })
}

fn window(config: &Config) -> Option<(f64, f64)> {
    config.fit.window.map(|[a, b]| (a, b))
}

#[derive(Serialize)]
struct SpectrumRow {
    topology: TopologyName,
    #[serde(rename = "L")]
    size: Option<usize>,
    gamma: Option<f64>,
    h: Option<f64>,
    lambda: Option<f64>,
    mass: Option<f64>,
    method: String,
    e0: f64,
    e1: f64,
    delta: f64,
    residual: f64,
    accuracy: Option<f64>,
    /// All computed levels, space separated.
    eigenvalues: String,
}

impl SpectrumRow {
    fn new(topology: TopologyName, r: &SpectrumResult64) -> Self {
        Self {
            topology,
            size: None,
            gamma: None,
            h: None,
            lambda: None,
            mass: None,
            method: r.method.to_string(),
            e0: r.eigenvalues[0],
            e1: r.eigenvalues[1],
            delta: r.delta,
            residual: r.residual,
            accuracy: r.accuracy,
            eigenvalues: r.eigenvalues.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" "),
        }
    }
}

fn ed_gap(config: &Config, out: &mut ExperimentOutput) -> Result<(), CliError> {
    let m = &config.model;
    let topology = m.topology.expect("resolved");
    if topology == TopologyName::DoubleWell {
        let mass = m.mass.expect("resolved");
        for lambda in config.lambdas() {
            let r = gap_double_well(&DoubleWell64::with_mass(lambda, mass)?, &GridSpec::default())?;
            let row = SpectrumRow {
                lambda: Some(lambda),
                mass: Some(mass),
                ..SpectrumRow::new(topology, &r)
            };
            out.record(&row)?;
            out.summary(&row)?;
        }
        return Ok(());
    }
    let (gamma, h) = (m.gamma.expect("resolved"), m.h.expect("resolved"));
    let sizes = config.sizes();
    for &l in &sizes {
        let r = exact_splitting(&spin_model(topology, l, gamma, h)?)?;
        let row = SpectrumRow {
            size: Some(l),
            gamma: Some(gamma),
            h: Some(h),
            ..SpectrumRow::new(topology, &r)
        };
        out.record(&row)?;
        out.summary(&row)?;
    }
    if sizes.len() >= 3 {
        for (power, name) in [(1.0, "ed 1/delta"), (2.0, "ed 1/delta^2")] {
            let fit = ed_exponent(&sizes, power, |l| Ok(spin_model(topology, l, gamma, h).map_err(to_core)?))?;
            out.fit(&FitRow::from_fit(name, "L", &fit))?;
        }
    }
    Ok(())
}

fn to_core(e: CliError) -> qmctunnel::Error {
    qmctunnel::Error::Input(e.message)
}

#[derive(Serialize)]
struct WkbRow {
    potential: PotentialName,
    gamma: f64,
    h: Option<f64>,
    ell: f64,
    energy: f64,
    m_start: f64,
    m_end: f64,
    action: f64,
    /// Splitting exponent `a/2`: `Δ ∝ e^{-L a/2}`.
    exponent: f64,
    closed_form_c: Option<f64>,
    closed_form_difference: Option<f64>,
}

#[derive(Serialize)]
struct TrajectoryRow {
    s: f64,
    m: f64,
}

fn wkb(config: &Config, out: &mut ExperimentOutput) -> Result<(), CliError> {
    let m = &config.model;
    let gamma = m.gamma.expect("resolved");
    let potential = m.potential.expect("resolved");
    let problem = match potential {
        PotentialName::CurieWeiss => WkbProblem64::curie_weiss(gamma, m.h.expect("resolved"), m.ell.expect("resolved"))?,
        PotentialName::Grover => WkbProblem64::grover(gamma)?,
    };
    let a = action(&problem)?;
    let (m_start, m_end) = turning_points(&problem)?;
    // the closed form covers the unbiased Curie-Weiss model at full spin
    let closed = (potential == PotentialName::CurieWeiss && m.h == Some(0.0) && m.ell == Some(1.0) && gamma < 1.0)
        .then(|| splitting_closed_form(gamma, 1).map(|c| c.c))
        .transpose()?;
    let row = WkbRow {
        potential,
        gamma,
        h: m.h,
        ell: problem.ell,
        energy: problem.energy,
        m_start,
        m_end,
        action: a,
        exponent: a / 2.0,
        closed_form_c: closed,
        closed_form_difference: closed.map(|c| (a / 2.0 - c).abs()),
    };
    out.record(&row)?;
    out.summary(&row)?;
    let traj = instanton_trajectory(&problem, TRAJECTORY_SAMPLES, TRAJECTORY_EPSILON)?;
    let rows: Vec<TrajectoryRow> = traj.s.iter().zip(&traj.m).map(|(&s, &m)| TrajectoryRow { s, m }).collect();
    out.table("trajectory.csv", &rows)?;
    Ok(())
}

/// Runs one point inside the worker pool, turning a worker panic into an
/// error so that earlier points survive.
fn measure(spec: &RunSpec, config: &Config, point: u64) -> Result<Vec<FirstPassageRecord>, CliError> {
    let e = &config.engine;
    let (runs, budget) = (e.runs.expect("resolved"), e.budget.expect("resolved"));
    let master = run_seed(config.master_seed.expect("resolved"), point);
    match catch_unwind(AssertUnwindSafe(|| measure_first_passage(spec, runs, budget, master))) {
        Ok(r) => Ok(r?),
        Err(payload) => Err(CliError::panic(format!("point {point}: {}", panic_message(&*payload)))),
    }
}

fn criterion(config: &Config) -> ReversalCriterion {
    ReversalCriterion {
        threshold: config.engine.threshold.expect("resolved"),
        fraction: config.engine.fraction.expect("resolved"),
    }
}

fn emit_point(out: &mut ExperimentOutput, records: &[FirstPassageRecord], delta: Option<f64>) -> Result<(), CliError> {
    for r in records {
        out.record(&RecordRow::from(r))?;
    }
    if let Some(first) = records.first() {
        out.summary(&SummaryRow::new(first, &summarize(records), delta))?;
    }
    Ok(())
}

fn spin_experiment(config: &Config, out: &mut ExperimentOutput) -> Result<(), CliError> {
    let kind = config.kind();
    let engine = config.engine();
    let m = &config.model;
    let (topology, gamma, h) = (m.topology.expect("resolved"), m.gamma.expect("resolved"), m.h.expect("resolved"));
    let sizes = config.sizes();
    let betas = match kind {
        Kind::TempScan => config.betas(),
        _ => vec![config.engine.beta.expect("resolved")],
    };
    // point k = (size index) * |β| + (β index), as in the library scan
    let mut table = ScanTable::default();
    for (i, &size) in sizes.iter().enumerate() {
        for (j, &beta) in betas.iter().enumerate() {
            let mut run = SpinRun::new(engine, spin_model(topology, size, gamma, h)?, beta)?;
            if let Some(p) = config.engine.slices {
                run.slices = p;
            }
            run.scheme = config.engine.scheme.expect("resolved");
            run.criterion = criterion(config);
            let records = measure(&RunSpec::Spin(run), config, (i * betas.len() + j) as u64)?;
            emit_point(out, &records, None)?;
            table.rows.push(ScanRow {
                size,
                beta,
                summary: summarize(&records),
                records,
            });
        }
    }
    match kind {
        Kind::SizeScan => size_fit(config, &table, out),
        Kind::TempScan => crossover(config, &table, &sizes, &betas, out),
        _ => Ok(()),
    }
}

fn size_fit(config: &Config, table: &ScanTable, out: &mut ExperimentOutput) -> Result<(), CliError> {
    let points = table
        .rows
        .iter()
        .map(|r| FitPoint::from_records(r.size as f64, &r.records))
        .collect::<Result<Vec<_>, _>>()?;
    let fit = fit_exponential(&points, window(config), bootstrap(config))?;
    out.fit(&FitRow::from_fit("qmc", "L", &fit))?;
    let m = &config.model;
    let sizes: Vec<usize> = table.rows.iter().map(|r| r.size).collect();
    ed_verdict(config, m.topology.expect("resolved"), m.gamma.expect("resolved"), &sizes, fit.estimate(), out)
}

/// Exact exponent of `1/Δ` over the fitted sizes and the comparison verdict.
fn ed_verdict(
    config: &Config,
    topology: TopologyName,
    gamma: f64,
    sizes: &[usize],
    qmc: Estimate,
    out: &mut ExperimentOutput,
) -> Result<(), CliError> {
    let mode = config.compare.mode.expect("resolved");
    let reference = match config.compare.gap_exponent {
        Some([v, s]) => Estimate::new(v, s),
        None => {
            let inside: Vec<usize> = sizes
                .iter()
                .copied()
                .filter(|&l| window(config).is_none_or(|(a, b)| l as f64 >= a && l as f64 <= b))
                .collect();
            let h = config.model.h.unwrap_or(0.0);
            let ed = ed_exponent(&inside, 1.0, |l| spin_model(topology, l, gamma, h).map_err(to_core))?;
            out.fit(&FitRow::from_fit("ed 1/delta", "L", &ed))?;
            ed.estimate()
        }
    };
    let verdict = compare_estimates(qmc, reference.scaled(power(mode)), mode);
    let name = match mode {
        ExponentMode::Squared => "qmc vs ed 1/delta^2",
        ExponentMode::Linear => "qmc vs ed 1/delta",
    };
    out.fit(&FitRow::verdict(name, "L", &verdict))?;
    out.note("verdict", &verdict);
    Ok(())
}

fn power(mode: ExponentMode) -> f64 {
    match mode {
        ExponentMode::Squared => 2.0,
        ExponentMode::Linear => 1.0,
    }
}

#[derive(Serialize)]
struct Crossover {
    high_t_beta: f64,
    /// Largest z-score between sizes at the highest temperature.
    high_t_size_spread: f64,
    low_t_window: [f64; 2],
    /// Largest z-score between β values inside the low-T window, per size.
    low_t_beta_spread: BTreeMap<usize, f64>,
    /// Largest z-score between sizes at the lowest temperature.
    low_t_size_spread: f64,
}

fn crossover(
    config: &Config,
    table: &ScanTable,
    sizes: &[usize],
    betas: &[f64],
    out: &mut ExperimentOutput,
) -> Result<(), CliError> {
    let [lo, hi] = config.scan.high_t_window.expect("resolved");
    let mut failure = None;
    for &l in sizes {
        match table.arrhenius(l, (lo, hi), bootstrap(config)) {
            Ok(fit) => out.fit(&FitRow::from_fit(&format!("arrhenius L={l}"), "beta", &fit))?,
            Err(e) => failure = Some(e),
        }
    }
    let low = config.scan.low_t_window.expect("resolved");
    let plateau: Vec<f64> = betas.iter().copied().filter(|&b| b >= low[0] && b <= low[1]).collect();
    let b_min = betas.iter().copied().fold(f64::INFINITY, f64::min);
    let b_max = betas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    out.note(
        "crossover",
        &Crossover {
            high_t_beta: b_min,
            high_t_size_spread: table.size_spread(b_min),
            low_t_window: low,
            low_t_beta_spread: sizes.iter().map(|&l| (l, table.beta_spread(l, &plateau))).collect(),
            low_t_size_spread: table.size_spread(b_max),
        },
    );
    failure.map_or(Ok(()), |e| Err(e.into()))
}

fn well_experiment(config: &Config, out: &mut ExperimentOutput) -> Result<(), CliError> {
    let e = &config.engine;
    let mass = config.model.mass.expect("resolved");
    let temperature = e.temperature.expect("resolved");
    let beads = e.slices.expect("resolved");
    let with_gap = config.fit.x == Some(FitAxis::Gap);
    let mut points = Vec::new();
    for (k, lambda) in config.lambdas().into_iter().enumerate() {
        let well = DoubleWell64::with_mass(lambda, mass)?;
        let mut run = match config.engine() {
            Engine::PimdWell => WellRun::langevin(
                well,
                temperature,
                beads,
                LangevinParams::new(e.delta.expect("resolved"), e.friction.expect("resolved"))?,
            ),
            _ => {
                let mut r = WellRun::metropolis(well, temperature, beads);
                r.mover = WellMover::Metropolis {
                    step: e.step,
                    target_acceptance: e.target_acceptance.unwrap_or(qmctunnel::harness::DEFAULT_TARGET_ACCEPTANCE),
                };
                r
            }
        };
        run.criterion = criterion(config);
        let records = measure(&RunSpec::Well(run), config, k as u64)?;
        let delta = if with_gap { Some(gap_double_well(&well, &GridSpec::default())?.delta) } else { None };
        emit_point(out, &records, delta)?;
        if let Some(d) = delta {
            points.push(FitPoint::from_records((1.0 / (d * d)).ln(), &records)?);
        }
    }
    if with_gap {
        let fit = fit_exponential(&points, window(config), bootstrap(config))?;
        out.fit(&FitRow::from_fit("qmc vs 1/delta^2", "ln(1/delta^2)", &fit))?;
    }
    Ok(())
}

/// Records grouped by the fit abscissa, in ascending order.
fn grouped(config: &Config, records: Vec<FirstPassageRecord>) -> Result<Vec<(f64, Vec<FirstPassageRecord>)>, CliError> {
    let axis = config.fit.x.expect("resolved");
    let mut groups: Vec<(f64, Vec<FirstPassageRecord>)> = Vec::new();
    for r in records {
        let x = match axis {
            FitAxis::Size => r.size as f64,
            FitAxis::Beta => r.beta,
            FitAxis::Gap => {
                if let Some((_, g)) = groups.iter_mut().find(|(_, g)| same_point(&g[0], &r)) {
                    g.push(r);
                    continue;
                }
                let d = record_delta(config, &r)?;
                (1.0 / (d * d)).ln()
            }
        };
        match groups.iter_mut().find(|(gx, _)| *gx == x) {
            Some((_, g)) => g.push(r),
            None => groups.push((x, vec![r])),
        }
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(groups)
}

fn same_point(a: &FirstPassageRecord, b: &FirstPassageRecord) -> bool {
    a.topology == b.topology && a.size == b.size && a.gamma == b.gamma && a.lambda == b.lambda
}

fn record_delta(config: &Config, r: &FirstPassageRecord) -> Result<f64, CliError> {
    let topology = topology_of(&r.topology)?;
    if topology == TopologyName::DoubleWell {
        let lambda = r.lambda.ok_or_else(|| CliError::config("fit.records", "double-well record without lambda"))?;
        let well = DoubleWell64::with_mass(lambda, config.model.mass.unwrap_or(0.5))?;
        return Ok(gap_double_well(&well, &GridSpec::default())?.delta);
    }
    let gamma = r.gamma.ok_or_else(|| CliError::config("fit.records", "spin record without gamma"))?;
    Ok(exact_splitting(&spin_model(topology, r.size, gamma, config.model.h.unwrap_or(0.0))?)?.delta)
}

fn axis_label(axis: FitAxis) -> &'static str {
    match axis {
        FitAxis::Size => "L",
        FitAxis::Beta => "beta",
        FitAxis::Gap => "ln(1/delta^2)",
    }
}

/// Fit of `ln ξ` over the records of an earlier experiment.
fn fit_from_records(config: &Config, out: &mut ExperimentOutput) -> Result<(FitResult, Vec<FirstPassageRecord>), CliError> {
    let path = config.fit.records.as_ref().expect("resolved");
    let records = crate::output::read_records(path)?;
    let groups = grouped(config, records.clone())?;
    let mut points = Vec::with_capacity(groups.len());
    for (x, g) in &groups {
        out.summary(&SummaryRow::new(&g[0], &summarize(g), None))?;
        points.push(FitPoint::from_records(*x, g)?);
    }
    let fit = fit_exponential(&points, window(config), bootstrap(config))?;
    out.fit(&FitRow::from_fit("qmc", axis_label(config.fit.x.expect("resolved")), &fit))?;
    Ok((fit, records))
}

fn fit_records(config: &Config, out: &mut ExperimentOutput) -> Result<(), CliError> {
    fit_from_records(config, out).map(|_| ())
}

fn compare(config: &Config, out: &mut ExperimentOutput) -> Result<(), CliError> {
    let mode = config.compare.mode.expect("resolved");
    if let Some([v, s]) = config.compare.exponent {
        let qmc = Estimate::new(v, s);
        let m = &config.model;
        return ed_verdict(config, m.topology.expect("resolved"), m.gamma.unwrap_or_default(), &config.sizes(), qmc, out);
    }
    if config.fit.x != Some(FitAxis::Size) {
        return Err(CliError::config("fit.x", "compare fits ln ξ against L"));
    }
    let (fit, records) = fit_from_records(config, out)?;
    if let Some([v, s]) = config.compare.gap_exponent {
        let verdict = exponent_comparison(&fit, Estimate::new(v, s), mode);
        out.fit(&FitRow::verdict("qmc vs reference", "L", &verdict))?;
        out.note("verdict", &verdict);
        return Ok(());
    }
    let first = &records[0];
    let topology = topology_of(&first.topology)?;
    let gamma = first.gamma.ok_or_else(|| {
        CliError::config("compare.gap_exponent", "records carry no spin model; give the reference exponent")
    })?;
    if records.iter().any(|r| r.topology != first.topology || r.gamma != first.gamma) {
        return Err(CliError::config("fit.records", "records mix models; compare needs one topology and Γ"));
    }
    let mut sizes: Vec<usize> = records.iter().map(|r| r.size).collect();
    sizes.dedup();
    sizes.sort_unstable();
    sizes.dedup();
    ed_verdict(config, topology, gamma, &sizes, fit.estimate(), out)
}
