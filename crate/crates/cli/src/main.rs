//! `hypball`: evaluate hyperbolic-ball Poisson kernels and Green functions,
//! dump data tables, and run the validation suites.
//!
//! Exit status: 0 on success, 2 for invalid input, 3 for numerical failures
//! and failed validations. Errors are also printed to standard error as a
//! one-line JSON record.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::CliError;
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "hypball",
    version,
    about = "Harmonic measure and Green functions of hyperbolic balls",
    args_override_self = true,
    after_help = "Options may also come from a key=value file given with --config <file>; \
                  flags on the command line override it. A CSV produced by this tool is a \
                  valid config file and reproduces its own run."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Poisson kernel by its spectral series on a grid of angles.
    PkEval(PkEvalArgs),
    /// Green function by its spectral series on a grid of angles.
    GreenEval(GreenEvalArgs),
    /// Normalized Gegenbauer coefficients of the Poisson kernel.
    Coeffs(CoeffsArgs),
    /// Closed-form Poisson kernel (n = 4, 6) against the series, or its Laplace weight.
    PkClosed(PkClosedArgs),
    /// Closed-form Green function (n = 4, 6) against the series.
    GreenClosed(GreenClosedArgs),
    /// Monte Carlo exit-law coefficients and gauges against analytic values.
    McValidate(McValidateArgs),
    /// Numerical identity suites (Wronskian, generating functions, Laplace moments).
    IdentityCheck(IdentityCheckArgs),
    /// Probes of the real-part and zero-location properties of f_z(k).
    ConjectureScan(ConjectureScanArgs),
}

const SUBCOMMANDS: [&str; 8] = [
    "pk-eval",
    "green-eval",
    "coeffs",
    "pk-closed",
    "green-closed",
    "mc-validate",
    "identity-check",
    "conjecture-scan",
];

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct OutputOpts {
    /// Output encoding.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file ("-" for standard output). Without it, output goes to
    /// $HYPBALL_OUTPUT_DIR/<command>.<ext> when that variable is set, else to
    /// standard output.
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DomainOpts {
    /// Dimension n ≥ 3.
    #[arg(long)]
    pub n: u32,
    /// Euclidean radius r ∈ (0, 1) of the ball.
    #[arg(long)]
    pub r: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SeriesOpts {
    /// Highest degree a spectral series may use.
    #[arg(long, default_value_t = 4000)]
    pub series_kmax: u32,
    /// Target absolute error of spectral series.
    #[arg(long, default_value_t = 1e-12)]
    pub series_tol: f64,
    /// Terms always summed before the tail bound is consulted.
    #[arg(long, default_value_t = 10)]
    pub series_min_terms: u32,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct QuadOpts {
    /// Absolute tolerance of adaptive quadrature.
    #[arg(long, default_value_t = 1e-10)]
    pub quad_tol: f64,
    /// Panel budget of adaptive quadrature.
    #[arg(long, default_value_t = 2000)]
    pub quad_max_panels: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct AngleOpts {
    /// Number of midpoint angles θ_j = (j + ½)π/N in [0, π].
    #[arg(long, default_value_t = 64)]
    pub theta_grid: u32,
    /// Evaluate at this single angle instead of the grid.
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PkEvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub domain: DomainOpts,
    /// |x|, the distance of the pole from the centre (x lies on the first axis).
    #[arg(long)]
    pub x: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub angles: AngleOpts,
    #[command(flatten)]
    #[serde(flatten)]
    pub series: SeriesOpts,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputOpts,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GreenEvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub domain: DomainOpts,
    /// |x| (x lies on the first axis).
    #[arg(long)]
    pub x: f64,
    /// |y|; y is placed at angle θ from x.
    #[arg(long)]
    pub y: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub angles: AngleOpts,
    #[command(flatten)]
    #[serde(flatten)]
    pub series: SeriesOpts,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputOpts,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CoeffsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub domain: DomainOpts,
    /// |x|.
    #[arg(long)]
    pub x: f64,
    /// Highest degree listed.
    #[arg(long, default_value_t = 10)]
    pub kmax: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosedTable {
    /// θ against the closed-form and series kernels.
    Kernel,
    /// v against the Laplace weight w(v).
    Weight,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PkClosedArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub domain: DomainOpts,
    /// |x|.
    #[arg(long)]
    pub x: f64,
    /// Which table to emit.
    #[arg(long, value_enum, default_value = "kernel")]
    pub table: ClosedTable,
    #[command(flatten)]
    #[serde(flatten)]
    pub angles: AngleOpts,
    /// Number of v samples for the weight table.
    #[arg(long, default_value_t = 101)]
    pub v_grid: u32,
    /// Largest v of the weight table.
    #[arg(long, default_value_t = 5.0)]
    pub v_max: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub series: SeriesOpts,
    #[command(flatten)]
    #[serde(flatten)]
    pub quad: QuadOpts,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputOpts,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GreenClosedArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub domain: DomainOpts,
    /// |x|.
    #[arg(long)]
    pub x: f64,
    /// |y|.
    #[arg(long)]
    pub y: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub angles: AngleOpts,
    #[command(flatten)]
    #[serde(flatten)]
    pub series: SeriesOpts,
    #[command(flatten)]
    #[serde(flatten)]
    pub quad: QuadOpts,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeChoice {
    Cartesian,
    Polar,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExitChoice {
    /// First grid point outside the ball.
    Grid,
    /// Brownian-bridge crossing test between grid points.
    Bridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialChoice {
    /// Left-endpoint Riemann sum.
    Left,
    /// Brownian-bridge mean of each step.
    BridgeMean,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct McValidateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub domain: DomainOpts,
    /// |x0|, the starting distance from the centre.
    #[arg(long)]
    pub x: f64,
    /// Number of simulated paths per run.
    #[arg(long, default_value_t = 100_000)]
    pub paths: u64,
    /// Time step.
    #[arg(long, default_value_t = 5e-4)]
    pub dt: f64,
    /// RNG seed; path i uses stream i of ChaCha8 seeded with it.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Step budget per path; paths exceeding it are reported as censored.
    #[arg(long, default_value_t = 200_000)]
    pub max_steps: u64,
    /// Lower clamp for R = |X|² in the polar scheme.
    #[arg(long, default_value_t = 1e-6)]
    pub r_floor: f64,
    /// Discretizations to run.
    #[arg(long, value_enum, default_value = "both")]
    pub scheme: SchemeChoice,
    /// Exit detection rule.
    #[arg(long, value_enum, default_value = "bridge")]
    pub exit_rule: ExitChoice,
    /// Per-step rule for the gauge potential integral.
    #[arg(long, value_enum, default_value = "bridge-mean")]
    pub potential_rule: PotentialChoice,
    /// Highest coefficient degree compared.
    #[arg(long, default_value_t = 5)]
    pub kmax: u32,
    /// Highest gauge degree compared.
    #[arg(long, default_value_t = 3)]
    pub gauge_kmax: u32,
    /// Richardson-extrapolate from dt and 2·dt.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub extrapolate: bool,
    /// Also report raw estimates at 2·dt, dt and dt/2 (informational).
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub bias_curve: bool,
    /// Pass threshold on |z|.
    #[arg(long, default_value_t = 3.0)]
    pub z_threshold: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteChoice {
    Wronskian,
    Generating,
    Laplace,
    All,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct IdentityCheckArgs {
    /// Suite to run.
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteChoice,
    /// Dimensions: a single value, a list "4,6" or a range "3..8".
    #[arg(long, default_value = "3..8")]
    pub n: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputOpts,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ConjectureScanArgs {
    /// Dimension (even n for the zero count).
    #[arg(long)]
    pub n: u32,
    /// Argument z ∈ (0, 1) of f_z.
    #[arg(long)]
    pub z: f64,
    /// Highest k of the real-part residual scan.
    #[arg(long, default_value_t = 500)]
    pub kmax: u32,
    /// Count zeros of f_z in the rectangle "re_min,re_max,im_min,im_max"
    /// instead of scanning residuals.
    #[arg(long)]
    pub rect: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputOpts,
}

fn run(args: Vec<String>) -> Result<(), CliError> {
    let args = config::expand_args(args, &SUBCOMMANDS)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return Ok(());
            }
            let _ = e.print();
            return Err(CliError::Usage(e.kind().to_string()));
        }
    };
    commands::dispatch(cli.command)
}

fn main() {
    if let Err(e) = run(std::env::args().collect()) {
        eprintln!("{}", e.record());
        std::process::exit(e.exit_code());
    }
}
