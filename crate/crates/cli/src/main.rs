use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use litlvm_cli::commands::{self, Context};
use litlvm_cli::config::{Overrides, RunConfig};
use litlvm_cli::CliError;

#[derive(Parser)]
#[command(name = "litlvm", version, about = "Interaction models regularized toward a latent structure")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for simulation, splitting and initialization (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for grid searches and experiments.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory for all outputs.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Standardize features with training-set statistics.
    #[arg(long, global = true)]
    standardize: Option<Switch>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with its ground truth.
    Simulate,
    /// Fit one model on the configured dataset.
    Fit {
        /// Training CSV (overrides the config's data path).
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Score a dataset with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Compute metrics of a saved model on a labelled dataset.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated: rmse, auc, cox_loglik, c_index, ibs.
        #[arg(long, value_delimiter = ',')]
        metrics: Vec<String>,
    },
    /// Cross-validated hyperparameter search, then refit the best cell.
    GridSearch {
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Write latent coordinates and their pairwise table.
    ExportLatent {
        #[arg(long)]
        model: PathBuf,
    },
    /// Run a simulation sweep over methods, p and seeds.
    Experiment,
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_overrides(Overrides {
        seed: cli.seed,
        standardize: cli.standardize.map(|s| matches!(s, Switch::On)),
    });
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let ctx = Context::new(&cli.out_dir);
    match &cli.command {
        Command::Simulate => commands::simulate(&load_config(cli)?, &ctx),
        Command::Fit { data } => commands::fit(&load_config(cli)?, data.as_deref(), &ctx),
        Command::Predict { model, data } => commands::predict(model, data, &ctx),
        Command::Evaluate { model, data, metrics } => commands::evaluate(model, data, metrics, &ctx),
        Command::GridSearch { data } => commands::grid_search(&load_config(cli)?, data.as_deref(), &ctx),
        Command::ExportLatent { model } => commands::export_latent(model, &ctx),
        Command::Experiment => commands::experiment(&load_config(cli)?, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("litlvm: config error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(j);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("litlvm: cannot start worker threads: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("litlvm: {} error: {e}", e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
