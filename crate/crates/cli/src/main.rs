//! `riemann-ifs`: runs the experiments of the `riemann-ifs` library from a
//! JSON configuration and writes CSV/JSON products with a manifest.

mod commands;
mod config;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

pub const OUT_DIR_ENV: &str = "RIFS_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Hypothesis(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Hypothesis(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Hypothesis(m) => write!(f, "theorem hypotheses violated: {m} (rerun with --force to proceed)"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl From<riemann_ifs::Error> for CliError {
    fn from(e: riemann_ifs::Error) -> Self {
        use riemann_ifs::Error as E;
        match e {
            E::InvalidParameter(_) | E::InvalidPoint(_) | E::InvalidMap(_) | E::DegenerateStart(_) | E::NotKoenigs(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "riemann-ifs", version, about = "Random iterated function systems on the Riemann sphere")]
pub struct Cli {
    /// JSON run configuration; defaults are used for anything missing.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory [default: config output.directory, then $RIFS_OUT_DIR, then ./out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for trial ensembles. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Run even when the theorem hypotheses fail.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Single orbit trace.
    Simulate,
    /// Occupation fraction of the neighbourhood W over independent trials.
    Occupation,
    /// Laminar/burst decomposition of one orbit.
    Sojourn,
    /// Return times to the annulus cylinder.
    Kac,
    /// Hill tail index of laminar durations.
    Tail,
    /// Empirical Cesàro histogram on the sphere.
    Measure,
    /// Semigroup-orbit coverage of the sphere.
    Coverage,
    /// Arithmetic class of cl{2^m λ^n}.
    ClassifyLambda {
        #[arg(long, allow_hyphen_values = true)]
        re: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        im: Option<f64>,
    },
    /// Koenigs linearizer of one generator at 0.
    Linearize {
        #[arg(long, value_enum, default_value_t = MapName::F0)]
        map: MapName,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Image of the unit circle under f₁ in the coordinate w = z + 1.
    Curve,
    /// The eleven finite candidate sets tested for f₁-invariance.
    InvariantsCheck,
    /// Derivative ratio along the cone word policy.
    ProbeNonnormal,
    /// Möbius preset: Cesàro mass and exponent at 0.
    Mobius,
    /// Logistic preset: occupation of (0, ε) with both probability orders.
    Logistic,
    /// Prints the configuration JSON Schema.
    Schema,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapName {
    F0,
    F1,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("riemann-ifs: {e}");
            ExitCode::from(e.code())
        }
    }
}
