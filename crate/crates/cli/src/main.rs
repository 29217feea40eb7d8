//! `mumford`: batch front end for the Mumford-form expansions.
//!
//! Exit status: 0 when every check passes, 1 when a mathematical check fails,
//! 2 on configuration or input errors.

mod commands;
mod settings;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mumford_core::Error;

#[derive(Parser, Debug)]
#[command(name = "mumford", version, about = "Exact and numeric expansions of the genus-g Mumford form")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Zograf product F1 as a truncated series.
    ExpandF1,
    /// McIntyre–Takhtajan product F2 as a truncated series.
    ExpandF2,
    /// The pairing matrix and its determinant.
    ExpandDetLambda,
    /// The assembled Mumford-form coefficient with its structural checks.
    ExpandMu2,
    /// Compares the leading term of det(Λ) with the closed-form τ product.
    VerifyLeading,
    /// Coefficients of q ∏ (1 − q^n)^24.
    Genus1Delta,
    /// Quadrature versus specialized symbolic values on a concrete group.
    CompareNumeric,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    #[arg(long, global = true)]
    pub genus: Option<usize>,
    /// y-adic truncation order N.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub trunc: Option<i32>,
    /// Word-length bound L for the Poincaré series (defaults to N).
    #[arg(long, global = true)]
    pub wordlen: Option<usize>,
    /// Merge each primitive class with its inverse in the products.
    #[arg(long, global = true)]
    pub identify_inverses: bool,
    /// Keep all fixed points as free variables instead of x1 = 0, x-1 = ∞, x2 = 1.
    #[arg(long, global = true)]
    pub general_x: bool,
    /// TOML group description for compare-numeric.
    #[arg(long, global = true)]
    pub group_file: Option<String>,
    /// Primes for the primitivity table, e.g. 2,3,5.
    #[arg(long, global = true, value_delimiter = ',')]
    pub primes: Option<Vec<u64>>,
    /// Output directory (default: $MUMFORD_OUT_DIR, then the current directory).
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Print artifacts instead of writing files.
    #[arg(long, global = true)]
    pub stdout: bool,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Mantissa bits for numeric work: 53 or 106.
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Quadrature nodes per circle.
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// TOML run configuration; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<String>,
}

/// Maps pipeline errors to the exit-code contract.
fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Input(_)
        | Error::Parse { .. }
        | Error::Version { .. }
        | Error::Io(_)
        | Error::Policy(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let settings = match settings::Settings::resolve(cli.command, &cli.flags) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("mumford: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = settings.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("mumford: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(cli.command, &settings) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("mumford: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
