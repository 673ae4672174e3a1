mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_ORACLE_DISAGREES: u8 = 3;

/// Environment variable overriding the default seed grid resolution.
pub const GRID_ENV: &str = "SQUAREPEG_SEED_GRID";

#[derive(Parser, Debug)]
#[command(name = "squarepeg", version, about = "Curves with a prescribed number of inscribed squares")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a curve and write its JSON spec.
    Construct(ConstructArgs),
    /// Enumerate the inscribed squares of a curve.
    FindSquares(FindArgs),
    /// Search for the bump amplitude at which the graph touches the locus.
    CriticalC(CriticalArgs),
    /// Signed-curvature convexity check of a smooth curve.
    Convexity(ConvexityArgs),
    /// Draw a curve and its squares as SVG.
    Render(RenderArgs),
    /// Run the reproduction suite.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Nonsmooth2,
    Smooth2,
    Nsquare,
    Circle,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    pub kind: Kind,
    /// Bump amplitude (smooth2 defaults to the critical amplitude, nsquare
    /// to half the convexity limit).
    #[arg(long)]
    pub c: Option<f64>,
    /// Bump sharpness.
    #[arg(long, default_value_t = 0.02)]
    pub a: f64,
    /// Number of squares for nsquare.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated anchor angles in (-pi/4, pi/4) for nsquare.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub anchors: Option<Vec<f64>>,
    /// Output file (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Seeds per parameter dimension.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Smallest side length reported.
    #[arg(long = "min-side")]
    pub min_side: Option<f64>,
    /// Newton residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug)]
pub struct FindArgs {
    /// Curve spec JSON.
    pub curve: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Cross-check with the diagonal-pair oracle.
    #[arg(long)]
    pub oracle: bool,
    /// Report file; a `.csv` extension writes CSV, anything else JSON
    /// (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CriticalArgs {
    #[arg(long, default_value_t = squarepeg::constructions::CRITICAL_BRACKET.0)]
    pub low: f64,
    #[arg(long, default_value_t = squarepeg::constructions::CRITICAL_BRACKET.1)]
    pub high: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConvexityArgs {
    /// Curve spec JSON.
    pub curve: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    /// Curve spec JSON.
    pub curve: PathBuf,
    /// Solve report JSON whose squares are drawn.
    #[arg(long)]
    pub squares: Option<PathBuf>,
    /// Overlay the square-base locus.
    #[arg(long)]
    pub locus: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Run only these criteria (comma-separated ids).
    #[arg(long, value_delimiter = ',')]
    pub criteria: Option<Vec<u8>>,
    /// Also write the rows as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Construct(args) => commands::construct(&args),
        Command::FindSquares(args) => commands::find_squares(&args),
        Command::CriticalC(args) => commands::critical(&args),
        Command::Convexity(args) => commands::convexity(&args),
        Command::Render(args) => commands::render(&args),
        Command::Verify(args) => commands::verify(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
