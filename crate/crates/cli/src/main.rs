//! Command-line runner for the droplet experiments.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure. Errors are
//! reported on stderr as a JSON object.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{Experiment, ExperimentConfig, ParamsConfig};

#[derive(Parser)]
#[command(
    name = "droplet",
    version,
    about = "Reproducible experiments on critical droplets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Table of R_c, Φ, C₁–C₃, G_κ, τ*, μ*, σ².
    Constants(RunArgs),
    /// Expansion residuals over an ε grid.
    ExpansionSweep(RunArgs),
    /// Agreement counts of the triplet test and global extremality.
    LocalityAgreement(RunArgs),
    /// Renewal-series values along a β grid and their extrapolated limit.
    RenewalAsymptotics(RunArgs),
    /// Contour-membership probabilities and their slope diagnostics.
    Membership(RunArgs),
    /// Gibbs sampler particle-number distribution against the small-system oracle.
    GibbsValidate(RunArgs),
    /// Runs the experiment named in the config file.
    Run(RunArgs),
    /// Checks a config file without running it.
    ValidateConfig {
        /// Config file to check.
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args, Default)]
struct RunArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Torus side.
    #[arg(long = "L", alias = "l")]
    l: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    beta_grid: Option<Vec<f64>>,
    #[arg(long, alias = "eps", value_delimiter = ',')]
    eps_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    m_grid: Option<Vec<f64>>,
    #[arg(long)]
    chi_delta: Option<f64>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Contours per ε (expansion-sweep) or oracle truncation (gibbs-validate).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    burn_in: Option<u64>,
}

const CONFIG_ERROR: u8 = 2;
const NUMERIC_FAILURE: u8 = 3;

fn fail(code: u8, kind: &str, messages: Vec<String>) -> ExitCode {
    let body = json!({ "error": kind, "messages": messages, "exit_code": code });
    eprintln!("{body}");
    ExitCode::from(code)
}

fn overrides(a: &RunArgs, file: Option<&ParamsConfig>) -> ExperimentConfig {
    let params = if a.kappa.is_some() || a.beta.is_some() || a.l.is_some() {
        let base = file.copied().unwrap_or(ParamsConfig {
            kappa: 2.0,
            beta: 1.0,
            l: 40.0,
        });
        Some(ParamsConfig {
            kappa: a.kappa.unwrap_or(base.kappa),
            beta: a.beta.unwrap_or(base.beta),
            l: a.l.unwrap_or(base.l),
        })
    } else {
        None
    };
    ExperimentConfig {
        experiment: None,
        params,
        seed: a.seed,
        beta_grid: a.beta_grid.clone(),
        eps_grid: a.eps_grid.clone(),
        m_grid: a.m_grid.clone(),
        chi_delta: a.chi_delta,
        replicas: a.replicas,
        n: a.n,
        steps: a.steps,
        burn_in: a.burn_in,
        out: a.out.clone(),
    }
}

fn run(experiment: Option<Experiment>, a: RunArgs) -> ExitCode {
    let file = match &a.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => return fail(CONFIG_ERROR, "config", vec![e]),
        },
        None => ExperimentConfig::default(),
    };
    if let (Some(want), Some(have)) = (experiment, file.experiment) {
        if want != have {
            return fail(
                CONFIG_ERROR,
                "config",
                vec![format!(
                    "config is for {}, not {}",
                    have.name(),
                    want.name()
                )],
            );
        }
    }
    let mut cfg = file
        .clone()
        .overridden_by(overrides(&a, file.params.as_ref()));
    if experiment.is_some() {
        cfg.experiment = experiment;
    }
    let resolved = match cfg.resolve() {
        Ok(r) => r,
        Err(v) => return fail(CONFIG_ERROR, "config", v),
    };
    let out = match experiments::run(&resolved) {
        Ok(o) => o,
        Err(e) => {
            let code = match e {
                droplet_core::Error::Domain(_) => CONFIG_ERROR,
                _ => NUMERIC_FAILURE,
            };
            return fail(code, e.kind(), vec![e.to_string()]);
        }
    };
    match output::write(&resolved.out, &resolved, &out) {
        Ok(files) => {
            for t in &out.tables {
                if t.csv.lines().count() <= 12 {
                    print!("{}", t.csv);
                }
            }
            println!(
                "{}",
                json!({ "experiment": resolved.experiment.name(), "out": resolved.out, "artifacts": files })
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(NUMERIC_FAILURE, "io", vec![e.to_string()]),
    }
}

fn validate(path: PathBuf) -> ExitCode {
    let cfg = match ExperimentConfig::load(&path) {
        Ok(c) => c,
        Err(e) => return fail(CONFIG_ERROR, "config", vec![e]),
    };
    match cfg.resolve() {
        Ok(r) => {
            println!(
                "{}",
                json!({ "valid": true, "experiment": r.experiment.name() })
            );
            ExitCode::SUCCESS
        }
        Err(v) => {
            println!("{}", json!({ "valid": false, "violations": v }));
            ExitCode::from(CONFIG_ERROR)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => return fail(CONFIG_ERROR, "usage", vec![e.to_string()]),
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match cli.command {
        Command::Constants(a) => run(Some(Experiment::Constants), a),
        Command::ExpansionSweep(a) => run(Some(Experiment::ExpansionSweep), a),
        Command::LocalityAgreement(a) => run(Some(Experiment::LocalityAgreement), a),
        Command::RenewalAsymptotics(a) => run(Some(Experiment::RenewalAsymptotics), a),
        Command::Membership(a) => run(Some(Experiment::Membership), a),
        Command::GibbsValidate(a) => run(Some(Experiment::GibbsValidate), a),
        Command::Run(a) => run(None, a),
        Command::ValidateConfig { config } => validate(config),
    }
}
