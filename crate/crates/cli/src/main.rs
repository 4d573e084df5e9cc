mod commands;
mod error;
mod manifest;
mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Nested Dirichlet process inference for row-exchangeable categorical data.
#[derive(Parser, Debug)]
#[command(name = "ndp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run sequential imputation and summarize queries.
    Infer(InferArgs),
    /// Kernel density estimate from an `atom,weight` sample file.
    Density(DensityArgs),
    /// Exact posterior by partition enumeration (at most 12 rows).
    Oracle(OracleArgs),
    /// Gamer distribution utilities.
    Gamer {
        #[command(subcommand)]
        action: GamerAction,
    },
    /// Built-in example scenarios.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Built-in scenario name.
    #[arg(long, conflicts_with_all = ["data", "config"])]
    pub scenario: Option<String>,
    /// Observation file: labels CSV, counts CSV or rows JSON.
    #[arg(long, requires = "config")]
    pub data: Option<PathBuf>,
    /// Model configuration JSON.
    #[arg(long, requires = "data")]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InferArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Number of weighted simulations.
    #[arg(long = "K")]
    pub num_sims: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Log scale factor log c added per row to the reported weights.
    #[arg(long = "log-scale", allow_negative_numbers = true)]
    pub log_scale: Option<f64>,
    /// Drop this many heaviest simulations before summarizing.
    #[arg(long)]
    pub trim: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Query such as "component 5 1"; append "below T" for P(f < T).
    #[arg(long = "query")]
    pub queries: Vec<String>,
    /// Size of the prior Monte Carlo sample in new-agent laws.
    #[arg(long, default_value_t = ndp_core::posterior::DEFAULT_PRIOR_SAMPLES)]
    pub prior_samples: usize,
    /// Also write the full batch as batch.json.
    #[arg(long)]
    pub save_batch: bool,
    #[arg(long, default_value = "ndp-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    /// `atom,weight` CSV written by `infer`.
    pub samples: PathBuf,
    /// "auto" for weighted Scott's rule, or a positive number.
    #[arg(long, default_value = "auto")]
    pub bandwidth: String,
    #[arg(long, default_value_t = ndp_core::kde::DEFAULT_GRID_POINTS)]
    pub points: usize,
    /// Clip the default grid to LO,HI, e.g. 0,1 for probabilities.
    #[arg(long, value_name = "LO,HI", allow_hyphen_values = true)]
    pub clip: Option<String>,
    /// Output prefix: writes PREFIX.csv and PREFIX.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write an SVG line plot.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long = "query")]
    pub queries: Vec<String>,
    /// Number of most probable partitions to list.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct GamerShape {
    #[arg(long, default_value_t = 7.0 / 3.0)]
    pub r: f64,
    #[arg(long, default_value_t = 28.0)]
    pub c: f64,
    #[arg(long, default_value_t = 3.0)]
    pub alpha: f64,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    #[arg(long, default_value_t = 500.0)]
    pub to: f64,
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
}

#[derive(Subcommand, Debug)]
pub enum GamerAction {
    /// Density on a grid (x = 0 is skipped).
    Pdf {
        #[command(flatten)]
        shape: GamerShape,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distribution function on a grid.
    Cdf {
        #[command(flatten)]
        shape: GamerShape,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draws from the Pareto-mixed gamma sampler.
    Sample {
        #[command(flatten)]
        shape: GamerShape,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Base measure over scores 0..L-1.
    Discretize {
        #[command(flatten)]
        shape: GamerShape,
        #[arg(long = "L", default_value_t = 500)]
        num_states: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ExamplesAction {
    /// List scenario names.
    List,
    /// Write data, configuration and metadata files for scenarios.
    Export {
        /// Scenario names; all when omitted.
        #[arg(long = "name")]
        names: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let args: Vec<String> = std::env::args().collect();
    let result = match cli.command {
        Command::Infer(a) => commands::infer(&a, &args),
        Command::Density(a) => commands::density(&a),
        Command::Oracle(a) => commands::oracle(&a),
        Command::Gamer { action } => commands::gamer(&action),
        Command::Examples { action } => commands::examples(&action),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
