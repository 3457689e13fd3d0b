//! Command-line front end.
//!
//! Exit status contract: 0 all checks pass, 1 a check or artifact write
//! failed, 2 the config or flags failed validation, 3 the config could
//! not be parsed.

mod commands;
mod config;
mod verify;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Failures ranked by exit status.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or syntactically malformed input (status 3).
    Parse(String),
    /// A core gate rejected the system, weights or tolerances (status 2).
    Validation(staircase::Error),
    /// A flag combination that no command accepts (status 2).
    Invalid(String),
    /// A verification or rank check did not pass (status 1).
    Check(String),
    /// An artifact could not be written (status 1).
    Io(std::io::Error),
}

impl Failure {
    fn status(&self) -> i32 {
        match self {
            Failure::Parse(_) => 3,
            Failure::Validation(_) | Failure::Invalid(_) => 2,
            Failure::Check(_) | Failure::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Parse(msg) => write!(f, "parse error: {msg}"),
            Failure::Validation(e) => write!(f, "{}: {e}", variant_name(e)),
            Failure::Invalid(msg) => write!(f, "invalid request: {msg}"),
            Failure::Check(msg) => write!(f, "check failed: {msg}"),
            Failure::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

/// The variant name of a core error, so diagnostics state the violated
/// condition in a greppable form.
pub fn variant_name(e: &staircase::Error) -> &'static str {
    use staircase::Error::*;
    match e {
        TooFewMaps(_) => "TooFewMaps",
        BadMap(_) => "BadMap",
        OrderingViolation(_) => "OrderingViolation",
        CoverViolation => "CoverViolation",
        NotContractive { .. } => "NotContractive",
        DigitOutOfRange { .. } => "DigitOutOfRange",
        OutOfImage { .. } => "OutOfImage",
        DepthTooLarge { .. } => "DepthTooLarge",
        DomainError(_) => "DomainError",
        NotInAttractor(_) => "NotInAttractor",
        EmptyTruncated => "EmptyTruncated",
        TruncatedAddress => "TruncatedAddress",
        LastDigitIsN { .. } => "LastDigitIsN",
        AddressParse(_) => "AddressParse",
        BadProbability(_) => "BadProbability",
        BadWeights(_) => "BadWeights",
        LengthMismatch { .. } => "LengthMismatch",
        MixedSystems => "MixedSystems",
        DuplicateVectors => "DuplicateVectors",
        VectorsEqual => "VectorsEqual",
        BadEpsilon(_) => "BadEpsilon",
        _ => "Error",
    }
}

pub fn rational_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Fixed-width decimal with 17 fractional digits: full precision for
/// values in [0, 1] and byte-stable across runs.
pub fn fmt17(x: f64) -> String {
    format!("{x:.17}")
}

/// Exact scalars as reduced fractions, approximate ones as decimals.
pub fn show(s: &staircase::Scalar) -> String {
    match s.as_exact() {
        Some(r) => r.to_string(),
        None => format!("{}", s.to_f64()),
    }
}

/// Write an artifact to the chosen path, or to stdout when none is set.
pub fn emit(out: Option<&Path>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(Failure::Io),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

#[derive(Args)]
struct Common {
    /// System configuration file
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Uniform grid size (curve rows; independence sample count)
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Depth for set, gap and cylinder enumerations
    #[arg(long, value_name = "K")]
    depth: Option<usize>,
    /// Monte Carlo sample count
    #[arg(long, value_name = "N")]
    samples: Option<usize>,
    /// Seed override (defaults to the config seed)
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Output file (defaults to the config `out` entry, then stdout)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Override the evaluation tolerance tol_phi
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
    /// Emit JSON instead of text or CSV
    #[arg(long)]
    json: bool,
}

impl Common {
    fn load(&self) -> Result<config::RunConfig, Failure> {
        config::load(&self.config, self.tol)
    }

    fn out_path<'a>(&'a self, cfg: &'a config::RunConfig) -> Option<&'a Path> {
        self.out.as_deref().or(cfg.out.as_deref())
    }

    fn seed(&self, cfg: &config::RunConfig) -> u64 {
        self.seed.unwrap_or(cfg.seed)
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Points to evaluate, decimal or rational like 5/9
    #[arg(value_name = "X", required = true)]
    points: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config and print the system summary
    Validate(Common),
    /// Sample the staircase on a uniform grid as x,phi rows
    Curve(Common),
    /// Enumerate attractor gaps (with --json, the full decomposition)
    Gaps(Common),
    /// Evaluate the staircase at explicit points
    Eval(EvalArgs),
    /// Report the level-k cover of the attractor
    Attractor(Common),
    /// Run the full verification suite against the config
    Verify(Common),
    /// Rank check across the solutions of all p lines in the config
    Independence(Common),
    /// Draw random addresses and their attractor points
    Sample(Common),
}

/// Gapped iterated function systems on [0, 1]: attractors, invariant
/// measures and their singular staircase solutions.
#[derive(Parser)]
#[command(name = "staircase", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate(args) => commands::validate(&args.load()?),
        Command::Curve(args) => {
            let cfg = args.load()?;
            commands::curve(&cfg, &args)
        }
        Command::Gaps(args) => {
            let cfg = args.load()?;
            commands::gaps(&cfg, &args)
        }
        Command::Eval(args) => {
            let cfg = args.common.load()?;
            commands::eval(&cfg, &args.common, &args.points)
        }
        Command::Attractor(args) => {
            let cfg = args.load()?;
            commands::attractor(&cfg, &args)
        }
        Command::Verify(args) => {
            let cfg = args.load()?;
            verify::run(&cfg, &args)
        }
        Command::Independence(args) => {
            let cfg = args.load()?;
            commands::independence(&cfg, &args)
        }
        Command::Sample(args) => {
            let cfg = args.load()?;
            commands::sample(&cfg, &args)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(failure) = run(cli) {
        eprintln!("{failure}");
        std::process::exit(failure.status());
    }
}
