mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ssdkit::GridSpec;

#[derive(Parser, Debug)]
#[command(name = "ssdkit", version, about = "Grid verification of SSD-space constructions")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Space JSON file, or the label of a catalog space.
    #[arg(long, global = true)]
    space: Option<String>,
    /// Grid function CSV file, or the name of a catalog function.
    #[arg(long = "fn", global = true)]
    function: Option<String>,
    /// Point set CSV file, or the name of a catalog set.
    #[arg(long, global = true)]
    set: Option<String>,
    /// Primal grid, "lo:hi:n,..." with one triple per axis.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<GridSpec>,
    /// Tolerance override for suites with a single configurable tolerance.
    #[arg(long, global = true, value_parser = parse_tol)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "ssdkit-out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Cap on the number of points of any grid.
    #[arg(long, global = true, env = "SSDKIT_BUDGET")]
    budget: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a named suite, or all of them.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Helix pitch for the helix suite.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Fenchel conjugate (and optionally the biconjugate) of a grid function.
    Conjugate {
        /// Dual grid; sized from the observed slopes when omitted.
        #[arg(long, value_parser = parse_grid)]
        dual_grid: Option<GridSpec>,
        #[arg(long)]
        biconjugate: bool,
    },
    /// Theta, Phi and star-Theta of a set, with the family checks.
    Fitzpatrick,
    /// Project a point onto P(f) by the certified iteration.
    Project {
        /// Starting point, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
    },
    /// Negative alignment of a point against a monotone set.
    Align {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        xstar: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    /// Aggregate the JSON reports in the output directory.
    Report,
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    GridSpec::parse(s).map_err(|e| e.to_string())
}

fn parse_tol(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("tolerance must be a positive number, got `{s}`")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(b) = cli.common.budget {
        ssdkit::grid::set_budget(b);
    }
    let outcome = match cli.command {
        Command::Verify { suite, lambda } => commands::verify(&cli.common, &suite, lambda),
        Command::Conjugate { dual_grid, biconjugate } => commands::conjugate(&cli.common, dual_grid, biconjugate),
        Command::Fitzpatrick => commands::fitzpatrick(&cli.common),
        Command::Project { point, epsilon } => commands::project(&cli.common, &point, epsilon),
        Command::Align { x, xstar, alpha, beta } => commands::align(&cli.common, &x, &xstar, alpha, beta),
        Command::Report => commands::report(&cli.common),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
