use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pacmc_cli::config::Plan;
use pacmc_cli::pipeline::{self, Stage, StageError, StageResult};
use pacmc_core::lp::load_model;
use pacmc_core::pac::{Budget, PacBudget, TwoLevelBudget};
use pacmc_core::Error;

/// Environment variable holding the worker thread count.
const WORKERS_VAR: &str = "PACMC_WORKERS";

#[derive(Parser)]
#[command(
    name = "pacmc",
    version,
    about = "PAC model learning and safety verification for black-box systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the sample sizes a budget requires.
    Bounds {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        beta: f64,
        /// LP decision variables, including the tube half-width.
        #[arg(long)]
        dims: usize,
        #[arg(long, requires = "beta2")]
        epsilon2: Option<f64>,
        #[arg(long, requires = "epsilon2")]
        beta2: Option<f64>,
    },
    /// Draw the training dataset.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn a model from a dataset.
    Learn {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a learned model against the unsafe set.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte-Carlo validation against ground-truth trajectories.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage and write all artifacts into a directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        outdir: PathBuf,
    },
}

fn config_error(e: Error) -> StageError {
    StageError::new(Stage::Config, e)
}

fn set_workers() -> StageResult<()> {
    let Ok(value) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            config_error(Error::Config(format!(
                "{WORKERS_VAR} must be a positive integer, got `{value}`"
            )))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| config_error(Error::Config(format!("cannot start {n} workers: {e}"))))
}

fn load(path: &PathBuf) -> StageResult<Plan> {
    Plan::load(path).map_err(config_error)
}

fn execute(command: Command) -> StageResult<()> {
    match command {
        Command::Bounds {
            epsilon,
            beta,
            dims,
            epsilon2,
            beta2,
        } => {
            let budget = match (epsilon2, beta2) {
                (Some(e2), Some(b2)) => {
                    TwoLevelBudget::new(epsilon, beta, e2, b2, dims).map(Budget::TwoLevel)
                }
                _ => PacBudget::new(epsilon, beta, dims).map(Budget::Single),
            }
            .map_err(config_error)?;
            let (m, n) = budget.required_sizes().map_err(config_error)?;
            println!("M = {m}");
            if let Some(n) = n {
                println!("N = {n}");
            }
        }
        Command::Sample { config, out } => {
            let plan = load(&config)?;
            let samples = pipeline::sample(&plan)?;
            for path in pipeline::write_samples(&plan, &samples, &out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Learn { config, data, out } => {
            let plan = load(&config)?;
            let samples = pipeline::read_samples(&plan, &data)?;
            let model = pipeline::learn_model(&plan, &samples)?;
            pipeline::write_model(&model, &out)?;
            println!("xi = {}", model.xi);
        }
        Command::Verify { config, model, out } => {
            let plan = load(&config)?;
            let model = load_model(&model).map_err(|e| StageError::new(Stage::Verify, e))?;
            let verdict = pipeline::verify(&plan, &model)?;
            let text = pipeline::verdict_text(&plan, &verdict)?;
            std::fs::write(&out, text)
                .map_err(|e| StageError::new(Stage::Verify, Error::io(&out, e)))?;
            println!("{}", verdict.statement);
        }
        Command::Validate { config, model, out } => {
            let plan = load(&config)?;
            let model = load_model(&model).map_err(|e| StageError::new(Stage::Validate, e))?;
            let v = pipeline::validate(&plan, &model)?;
            pipeline::write_validation(&plan, &v, &out)?;
            println!("{}", v.report.summary());
        }
        Command::Run { config, outdir } => {
            let plan = load(&config)?;
            let outcome = pipeline::run(&plan, &outdir)?;
            println!("{}", outcome.verdict.statement);
            if let Some(report) = outcome.validation {
                println!("{}", report.summary());
            }
            println!("artifacts in {}", outdir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match set_workers().and_then(|_| execute(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pacmc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
