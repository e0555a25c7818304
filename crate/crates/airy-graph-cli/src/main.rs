use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use airy_graph_cli::{classify, export, load_config, simulate, validate, CliError, Outcome, DEFAULT_TOL};

/// Vertex-condition classification and simulation for the Airy equation on star graphs.
///
/// Exit codes: 0 success, 1 config or I/O error, 2 NotGenerator or failed
/// validation, 3 solver failure. AIRY_GRAPH_THREADS is reserved and ignored.
#[derive(Debug, Parser)]
#[command(name = "airy-graph", version)]
struct Cli {
    /// Tolerance for the unitarity and contraction tests.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify the vertex condition of a configuration.
    Classify {
        #[arg(long)]
        config: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolve the configured initial data and write a CSV time series.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// CSV path; overrides output.path. Metadata goes to <stem>.meta.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run even when the condition does not generate a contraction semigroup.
        #[arg(long)]
        force: bool,
    },
    /// Check the whole catalog and the free-line convergence study.
    Validate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Catalog operations.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
enum CatalogAction {
    /// Write every catalog entry as JSON.
    Export {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<Outcome, CliError> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(CliError::Config(format!("--tol must be positive and finite, got {}", cli.tol)));
    }
    match cli.command {
        Command::Classify { config, out } => {
            let (cfg, _) = load_config(&config)?;
            classify::run(&cfg, cli.tol, out.as_deref())
        }
        Command::Simulate { config, out, force } => {
            let (cfg, bytes) = load_config(&config)?;
            simulate::run(&cfg, &bytes, cli.tol, force, out.as_deref())
        }
        Command::Validate { out } => validate::run(cli.tol, out.as_deref()),
        Command::Catalog { action: CatalogAction::Export { out } } => export::run(out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(o) => {
            print!("{}", o.stdout);
            ExitCode::from(o.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
