use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use matfact::FitMethod;
use matfact_cli::commands::{cmd_fit, cmd_rank, cmd_simulate, cmd_validate};
use matfact_cli::config::read_experiment_spec;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Pe,
    Rmfa,
}

impl From<MethodArg> for FitMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Pe => FitMethod::Pe,
            MethodArg::Rmfa => FitMethod::Rmfa,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "matfact",
    version,
    about = "Matrix factor models: robust estimation, rank selection, simulation studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo experiment from a spec file and write a summary CSV
    Simulate {
        /// Experiment spec file (flat key = value text with [setting ...] sections)
        #[arg(long)]
        spec: PathBuf,
        /// Output directory for the summary CSV
        #[arg(long)]
        out: PathBuf,
        /// Base seed; replication seeds derive from it deterministically
        #[arg(long)]
        seed: u64,
        /// Worker threads (default: the spec file's value, else all cores)
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Fit a factor model to a dataset CSV and write loadings, scores, diagnostics
    Fit {
        /// Input dataset (long-format CSV with `# p1=.. p2=.. T=..` metadata line)
        #[arg(long)]
        input: PathBuf,
        /// Number of row factors
        #[arg(long)]
        k1: usize,
        /// Number of column factors
        #[arg(long)]
        k2: usize,
        /// Estimator
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the factor-number pair; prints the estimate and ratio traces
    Rank {
        #[arg(long)]
        input: PathBuf,
        /// Largest candidate factor number
        #[arg(long)]
        kmax: usize,
        /// Use Huber-weighted covariance matrices
        #[arg(long)]
        robust: bool,
    },
    /// Rolling-window validation; prints per-window statistics
    Validate {
        #[arg(long)]
        input: PathBuf,
        /// Training window length in years
        #[arg(long)]
        window: usize,
        /// Observations per year
        #[arg(long)]
        periods: usize,
        /// Number of factors per side (k1 = k2 = k)
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum)]
        method: MethodArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            spec,
            out,
            seed,
            threads,
        } => read_experiment_spec(&spec).and_then(|s| cmd_simulate(&s, &out, seed, threads)),
        Command::Fit {
            input,
            k1,
            k2,
            method,
            out,
        } => cmd_fit(&input, k1, k2, method.into(), &out),
        Command::Rank {
            input,
            kmax,
            robust,
        } => cmd_rank(&input, kmax, robust),
        Command::Validate {
            input,
            window,
            periods,
            k,
            method,
        } => cmd_validate(&input, window, periods, k, method.into()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
