//! `saddle`: command-line front end for center-manifold expansions,
//! `S∞` estimates, normal forms, Borel-plane diagnostics and Riccati scans.
//!
//! Exit codes are 0 on success, 1 when a verification suite fails and 2 on
//! usage or input errors.

mod commands;
mod meta;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use saddle_core::riccati::DEFAULT_ORDER;

#[derive(Parser)]
#[command(name = "saddle", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coefficients φₙ and rescaled partial sums sₙ as CSV or JSON.
    Expand(ExpandArgs),
    /// Estimate of S∞ = lim (−1)ⁿφₙ/Γ(n + a) as JSON.
    Sinf(SinfArgs),
    /// Sign map of S_N over a grid of Riccati parameters (a, b).
    Scan(ScanArgs),
    /// Normal form with a ≥ 2 together with its transform record.
    Normalize(NormalizeArgs),
    /// Borel coefficients Φₙ, deconvolved Zₙ and Borel-plane residuals.
    Borel(BorelArgs),
    /// Sampled inequality and special-function checks.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    #[value(alias = "last_term")]
    Last,
    Aitken,
}

#[derive(Args)]
pub struct ExpandArgs {
    /// System file (JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Truncation order N.
    #[arg(long = "order", default_value_t = DEFAULT_ORDER)]
    pub order: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args)]
pub struct SinfArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "order", default_value_t = DEFAULT_ORDER)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Last)]
    pub method: MethodArg,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct ScanArgs {
    /// Range of a as lo:hi.
    #[arg(long, default_value = "-6:0", allow_hyphen_values = true, value_parser = parse_range)]
    pub a_range: (f64, f64),
    /// Range of b as lo:hi.
    #[arg(long, default_value = "-2:2", allow_hyphen_values = true, value_parser = parse_range)]
    pub b_range: (f64, f64),
    /// Grid size as NAxNB.
    #[arg(long, default_value = "101x101", value_parser = parse_grid)]
    pub grid: (usize, usize),
    #[arg(long = "order", default_value_t = DEFAULT_ORDER)]
    pub order: usize,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output prefix for PREFIX.csv, PREFIX.pgm and PREFIX.contours.csv.
    #[arg(long, default_value = "scan")]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct NormalizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "order", default_value_t = DEFAULT_ORDER)]
    pub order: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct BorelArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "order", default_value_t = DEFAULT_ORDER)]
    pub order: usize,
    /// Gauss–Legendre panels for Borel-plane convolutions.
    #[arg(long, default_value_t = saddle_core::borel::DEFAULT_PANELS)]
    pub panels: usize,
    /// Bring a raw system to normal form before transforming.
    #[arg(long)]
    pub normal_form: bool,
    /// Also evaluate the Borel–Padé–Laplace sum at this x > 0.
    #[arg(long)]
    pub x: Option<f64>,
    /// Padé order for the Laplace sum; defaults to N/2 − 1.
    #[arg(long)]
    pub pade_order: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Monte-Carlo trials of the lower-bound sampler.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Quadrature panels of the beta-integral check.
    #[arg(long, default_value_t = saddle_core::special::BETA_DEFAULT_PANELS)]
    pub panels: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound {lo:?}: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound {hi:?}: {e}"))?;
    Ok((lo, hi))
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (na, nb) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NAxNB, got {s:?}"))?;
    let na: usize = na.trim().parse().map_err(|e| format!("bad NA {na:?}: {e}"))?;
    let nb: usize = nb.trim().parse().map_err(|e| format!("bad NB {nb:?}: {e}"))?;
    Ok((na, nb))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Expand(args) => commands::expand(&args).map(|_| true),
        Command::Sinf(args) => commands::sinf(&args).map(|_| true),
        Command::Scan(args) => commands::scan(&args).map(|_| true),
        Command::Normalize(args) => commands::normalize(&args).map(|_| true),
        Command::Borel(args) => commands::borel(&args).map(|_| true),
        Command::Verify(args) => commands::verify(&args),
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
