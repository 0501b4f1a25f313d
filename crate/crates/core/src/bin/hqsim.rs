use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hqsim::harness::{
    lambda_prediction, render_alpha, render_exponents, render_lambda, render_report,
    run_experiment, run_validation, summarize, sweep_alpha, sweep_lambda, write_outputs,
    ExperimentConfig, THREADS_ENV,
};
use hqsim::sim::Policy;
use hqsim::traffic::ArrivalSpec;
use hqsim::Error;

const EXIT_OTHER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_DEPTH: u8 = 4;

#[derive(Parser)]
#[command(name = "hqsim", version, about = "Heavy/light two-queue simulator", after_help = after_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn after_help() -> String {
    format!(
        "Exit codes: 0 success, {EXIT_OTHER} other error, {EXIT_CONFIG} config error, \
         {EXIT_VALIDATION} validation failure, {EXIT_DEPTH} estimator depth.\n\
         {THREADS_ENV} caps the worker pool."
    )
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Slots per replication.
    #[arg(long)]
    slots: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write summary.json plus CCDF tables.
    Simulate(Common),
    /// Light-queue tail coefficient across alpha_L/alpha_H.
    SweepAlpha {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0, 4.0])]
        ratios: Vec<f64>,
    },
    /// Light-queue decay rate under log-max-weight across light loads.
    SweepLambda {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6])]
        lambdas: Vec<f64>,
    },
    /// Intrinsic exponent of the light law and the log-max-weight prediction.
    Exponent {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5, 0.7, 0.9])]
        lambdas: Vec<f64>,
    },
    /// Run the validation suite.
    Validate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config { .. }
            | Error::Unstable { .. }
            | Error::InvalidSpec(_)
            | Error::Parse { .. } => EXIT_CONFIG,
            Error::WindowTooThin { .. } => EXIT_DEPTH,
            _ => EXIT_OTHER,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<u8, Failure>;

fn default_config() -> ExperimentConfig {
    ExperimentConfig::new(
        ArrivalSpec::poisson(0.5),
        ArrivalSpec::heavy_pareto(2.5, 0.25),
        Policy::LogMaxWeight,
    )
}

fn load(common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => default_config(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(r) = common.replications {
        cfg.replications = r;
    }
    if let Some(n) = common.slots {
        cfg.n_slots = n;
    }
    if let Some(o) = &common.out {
        cfg.output_dir = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(dir: Option<&Path>, name: &str, body: &str) -> Result<(), Failure> {
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d).map_err(|e| Failure {
                code: EXIT_OTHER,
                message: format!("cannot create {}: {e}", d.display()),
            })?;
            let path = d.join(name);
            std::fs::write(&path, body).map_err(|e| Failure {
                code: EXIT_OTHER,
                message: format!("cannot write {}: {e}", path.display()),
            })?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn simulate(common: &Common) -> CliResult {
    let cfg = load(common)?;
    let stats = run_experiment(&cfg)?;
    let summary = summarize(&cfg, &stats);
    match &cfg.output_dir {
        Some(dir) => write_outputs(&summary, dir)?,
        None => println!(
            "{}",
            serde_json::to_string_pretty(&summary).map_err(Error::from)?
        ),
    }
    for c in &summary.checks {
        eprintln!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let thin =
        (summary.prediction.is_some() && summary.tail_h.is_thin()) || summary.decay_l.is_thin();
    Ok(if thin { EXIT_DEPTH } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: CliResult = match &cli.command {
        Command::Simulate(common) => simulate(common),
        Command::SweepAlpha { common, ratios } => (|| {
            let cfg = load(common)?;
            let rows = sweep_alpha(&cfg, ratios)?;
            emit(
                cfg.output_dir.as_deref(),
                "sweep_alpha.csv",
                &render_alpha(&rows),
            )?;
            Ok(if rows.iter().any(|r| r.measured.is_thin()) {
                EXIT_DEPTH
            } else {
                0
            })
        })(),
        Command::SweepLambda { common, lambdas } => (|| {
            let cfg = load(common)?;
            let rows = sweep_lambda(&cfg, lambdas)?;
            emit(
                cfg.output_dir.as_deref(),
                "sweep_lambda.csv",
                &render_lambda(&rows),
            )?;
            Ok(if rows.iter().any(|r| r.measured.is_thin()) {
                EXIT_DEPTH
            } else {
                0
            })
        })(),
        Command::Exponent { common, lambdas } => (|| {
            let cfg = load(common)?;
            let rows = lambdas
                .iter()
                .map(|&l| lambda_prediction(&cfg, l))
                .collect::<Result<Vec<_>, _>>()?;
            emit(
                cfg.output_dir.as_deref(),
                "exponent.csv",
                &render_exponents(&rows),
            )?;
            Ok(0)
        })(),
        Command::Validate { out } => (|| {
            let checks = run_validation();
            emit(out.as_deref(), "validation.txt", &render_report(&checks))?;
            Ok(if checks.iter().all(|c| c.passed) {
                0
            } else {
                EXIT_VALIDATION
            })
        })(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
