//! `qmctunnel`: configuration-driven experiments on quantum tunneling times.

mod catalog;
mod config;
mod experiments;
mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_pair, parse_reals, parse_sizes, Config, FitAxis, Kind, PotentialName, RealList, SizeList, TopologyName};
use output::ExperimentOutput;
use qmctunnel::harness::ExponentMode;
use qmctunnel::qmc::UpdateScheme;
use report::CliError;

#[derive(Parser)]
#[command(name = "qmctunnel", version, about = "Tunneling times of path-integral quantum Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file and/or flags.
    Run(RunArgs),
    /// List the experiment kinds.
    List,
    /// Describe an experiment kind and its config keys.
    Describe { kind: String },
}

#[derive(Args, Default)]
struct RunArgs {
    /// Experiment kind; overrides `kind` of the config file.
    kind: Option<String>,
    /// TOML experiment file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_topology)]
    model: Option<TopologyName>,
    /// Sizes: 12, 12,14,16 or 12..16.
    #[arg(long = "L", value_name = "SIZES")]
    sizes: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    /// Quartic coefficient(s) of the double well, comma separated.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long, value_parser = parse_potential)]
    potential: Option<PotentialName>,
    #[arg(long)]
    ell: Option<f64>,
    /// pimc, pigs, pimc-ct, pigs-ct, pimc-discrete, pigs-discrete, pimc-well, pimd-well.
    #[arg(long)]
    engine: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    /// β grid of temp-scan, comma separated.
    #[arg(long)]
    betas: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    /// Trotter slices or beads.
    #[arg(long = "P", value_name = "SLICES")]
    slices: Option<usize>,
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<UpdateScheme>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    target_acceptance: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    friction: Option<f64>,
    /// Fit window lo,hi or lo..hi.
    #[arg(long)]
    window: Option<String>,
    /// Bootstrap resamples; 0 keeps analytic errors.
    #[arg(long)]
    bootstrap: Option<usize>,
    /// records.csv of an earlier experiment.
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long, value_parser = parse_axis)]
    x: Option<FitAxis>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<ExponentMode>,
    /// QMC exponent value,stderr.
    #[arg(long)]
    exponent: Option<String>,
    /// Exponent of 1/Δ value,stderr.
    #[arg(long)]
    gap_exponent: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory below the output root.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
}

fn kebab<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown value {s:?}"))
}

fn parse_topology(s: &str) -> Result<TopologyName, String> {
    kebab(s)
}

fn parse_potential(s: &str) -> Result<PotentialName, String> {
    kebab(s)
}

fn parse_scheme(s: &str) -> Result<UpdateScheme, String> {
    kebab(s)
}

fn parse_axis(s: &str) -> Result<FitAxis, String> {
    kebab(s)
}

fn parse_mode(s: &str) -> Result<ExponentMode, String> {
    kebab(s)
}

impl RunArgs {
    /// Flags as a config overlay.
    fn overlay(self) -> Result<Config, CliError> {
        fn flag(key: &'static str) -> impl Fn(String) -> CliError {
            move |m| CliError::config(key, m)
        }
        let mut c = Config::default();
        c.kind = self.kind.as_deref().map(str::parse).transpose()?;
        c.master_seed = self.seed;
        c.output = self.out;
        c.threads = self.threads;
        let m = &mut c.model;
        m.topology = self.model;
        m.sizes = self.sizes.map(|s| parse_sizes(&s).map(SizeList::Many)).transpose().map_err(flag("model.sizes"))?;
        m.gamma = self.gamma;
        m.h = self.h;
        m.lambda = self.lambda.map(|s| parse_reals(&s).map(RealList::Many)).transpose().map_err(flag("model.lambda"))?;
        m.mass = self.mass;
        m.potential = self.potential;
        m.ell = self.ell;
        let e = &mut c.engine;
        e.name = self.engine;
        e.beta = self.beta;
        e.temperature = self.temperature;
        e.slices = self.slices;
        e.scheme = self.scheme;
        e.threshold = self.threshold;
        e.fraction = self.fraction;
        e.budget = self.budget;
        e.runs = self.runs;
        e.step = self.step;
        e.target_acceptance = self.target_acceptance;
        e.delta = self.delta;
        e.friction = self.friction;
        c.scan.betas = self.betas.map(|s| parse_reals(&s).map(RealList::Many)).transpose().map_err(flag("scan.betas"))?;
        c.fit.window = self.window.map(|s| parse_pair(&s)).transpose().map_err(flag("fit.window"))?;
        c.fit.bootstrap = self.bootstrap;
        c.fit.records = self.records;
        c.fit.x = self.x;
        c.compare.mode = self.mode;
        c.compare.exponent = self.exponent.map(|s| parse_pair(&s)).transpose().map_err(flag("compare.exponent"))?;
        c.compare.gap_exponent =
            self.gap_exponent.map(|s| parse_pair(&s)).transpose().map_err(flag("compare.gap_exponent"))?;
        Ok(c)
    }
}

fn load(args: RunArgs) -> Result<Config, CliError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config("", format!("cannot read {}: {e}", path.display())))?;
            Config::from_toml(&text)?
        }
        None => Config::default(),
    };
    config.overlay(args.overlay()?);
    config.resolve()
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let config = load(args)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::config("threads", e.to_string()))?;
    let dir = output::output_dir(&config);
    let mut out = ExperimentOutput::default();
    let result = pool.install(|| experiments::execute(&config, &mut out));
    out.write(&dir, &config, result.as_ref().err())?;
    result?;
    println!("{}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::List => {
            for kind in Kind::ALL {
                println!("{:<10} {}", kind.name(), catalog::summary(kind));
            }
            Ok(())
        }
        Command::Describe { kind } => kind.parse().map(|k| print!("{}", catalog::describe(k))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
