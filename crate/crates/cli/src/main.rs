//! Command-line frontend: fits Gaussian reference models, runs gap / pool
//! analyses, checks the sigmoid-GDA equivalence, samples sub-pools and
//! simulates gap-aware selection. Every command writes JSON (plus CSV side
//! tables where useful) with an embedded run manifest, and is deterministic
//! given its inputs and `--seed`.
//!
//! Exit codes: 0 success, 2 invalid input or arguments, 3 numerical failure.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "embedgap", version, about = "Distribution-gap analysis for feature embeddings")]
struct Cli {
    /// Seed for every random choice the invocation makes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for data-parallel sections (default: all cores).
    /// Results do not depend on this setting.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Primary output path of the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a Gaussian reference model to a feature set and write it as JSON.
    Fit {
        /// Reference features (.csv, or .fset/.bin binary).
        #[arg(long)]
        reference: PathBuf,
        /// Diagonal ridge added to the covariance before factorization.
        #[arg(long, default_value_t = 0.0)]
        ridge: f64,
    },
    /// Distribution-gap report of a test set against a fitted model.
    Gap {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Fractions for the filtered gaps, e.g. 0.5,1.0.
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0])]
        fractions: Vec<f64>,
        /// Histogram bin count.
        #[arg(long, default_value_t = 20)]
        bins: usize,
        /// Histogram range as lo,hi (default: 0 to the largest distance).
        #[arg(long)]
        range: Option<String>,
    },
    /// Density, diversity and domain gap of a synthetic pool on its grid.
    Pool {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        pool: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        /// Diversity exponent k.
        #[arg(long, default_value_t = 10.0)]
        exponent: f64,
    },
    /// Write the ids of a sub-pool selected by a scheme (builtin name or
    /// JSON file).
    Subset {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        scheme: String,
    },
    /// Randomized check that the GDA posterior equals its sigmoid classifier.
    EquivCheck {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        dim_max: usize,
    },
    /// Select ids from a per-item gap list, gap-weighted or uniformly.
    Select {
        /// Per-item distances: a gap report (.json) or id,mahalanobis_sq CSV.
        #[arg(long)]
        per_item: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum, default_value_t = commands::ModeArg::GapWeighted)]
        mode: commands::ModeArg,
        /// Temperature of the gap-weighted mode.
        #[arg(long, default_value_t = 1.0)]
        temperature: f64,
    },
    /// Fréchet distance between two fitted models.
    Frechet {
        #[arg(long)]
        model_a: PathBuf,
        #[arg(long)]
        model_b: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // ignore failure: the global pool can only be built once
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let result = match &cli.command {
        Command::Fit { reference, ridge } => {
            commands::cmd_fit(reference, *ridge, cli.out.as_deref(), cli.seed)
        }
        Command::Gap {
            model,
            test,
            fractions,
            bins,
            range,
        } => commands::cmd_gap(
            model,
            test,
            fractions,
            *bins,
            range.as_deref(),
            cli.out.as_deref(),
            cli.seed,
        ),
        Command::Pool {
            model,
            pool,
            grid,
            exponent,
        } => commands::cmd_pool(model, pool, grid, *exponent, cli.out.as_deref(), cli.seed),
        Command::Subset { grid, scheme } => {
            commands::cmd_subset(grid, scheme, cli.out.as_deref(), cli.seed)
        }
        Command::EquivCheck { trials, dim_max } => {
            commands::cmd_equiv_check(*trials, *dim_max, cli.seed, cli.out.as_deref())
        }
        Command::Select {
            per_item,
            count,
            mode,
            temperature,
        } => commands::cmd_select(
            per_item,
            *count,
            *mode,
            *temperature,
            cli.seed,
            cli.out.as_deref(),
        ),
        Command::Frechet { model_a, model_b } => {
            commands::cmd_frechet(model_a, model_b, cli.out.as_deref(), cli.seed)
        }
    };

    match result {
        Ok(code) => code,
        Err(err) => {
            let category = if err.is_numeric() { "numeric" } else { "data" };
            let obj = serde_json::json!({
                "error": { "category": category, "message": err.to_string() }
            });
            eprintln!("{obj}");
            if err.is_numeric() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
