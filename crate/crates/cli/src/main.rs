mod commands;
mod schema;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::schema::InputError;

#[derive(Parser)]
#[command(name = "pell", version, about = "p-ellipticity margins, ranges and solvability exponents")]
struct Cli {
    /// Leave the wall-clock duration out of the manifest so reruns are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Margins of the pointwise conditions at one exponent p.
    Check(CheckArgs),
    /// Interval of p on which a pointwise condition holds.
    Range(RangeArgs),
    /// Closed-form Lamé constants, admissibility and Poisson ratio.
    Lame(LameArgs),
    /// Dirichlet-problem solvability ranges.
    Solvability(SolvabilityArgs),
    /// Search for test functions violating the integral condition.
    Falsify(FalsifyArgs),
}

#[derive(Args, Clone)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Multistart count for the outer search.
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
}

#[derive(Args)]
pub struct CheckArgs {
    /// Tensor or field file, `-` for stdin.
    pub input: String,
    #[arg(long)]
    pub p: f64,
    /// strong, legendre-hadamard (lh) or all.
    #[arg(long, default_value = "all")]
    pub kind: String,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Args)]
pub struct RangeArgs {
    pub input: String,
    #[arg(long, default_value = "strong")]
    pub kind: String,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Args)]
pub struct LameArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Sampled moduli file `{"schema": 1, "lambda": [...], "mu": [...]}`.
    #[arg(long)]
    pub moduli: Option<String>,
    /// Lower bound required of both admissibility margins.
    #[arg(long)]
    pub mu0: Option<f64>,
}

#[derive(Args)]
pub struct SolvabilityArgs {
    /// extrapolation, homogenization or lame-corollary.
    #[arg(long)]
    pub theorem: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long)]
    pub q: Option<f64>,
    /// Accepts `inf`.
    #[arg(long)]
    pub p0: Option<f64>,
    #[arg(long)]
    pub drift_bound: Option<f64>,
    #[arg(long)]
    pub q_strong: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Minimize the Lamé endpoint over admissible ratios λ/μ.
    #[arg(long)]
    pub worst_case: bool,
    #[arg(long, default_value_t = 10_000)]
    pub grid_points: usize,
}

#[derive(Args)]
pub struct FalsifyArgs {
    pub input: String,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lattice points per axis.
    #[arg(long, default_value_t = 33)]
    pub size: usize,
}

/// Command result: JSON payload plus whether it reports a refutation or an
/// empty range.
pub struct Outcome {
    pub config: Value,
    pub seed: Option<u64>,
    pub result: Value,
    pub negative: bool,
}

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<pell_core::Error> for Failure {
    fn from(e: pell_core::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("PELL_THREADS") else {
        return Ok(());
    };
    let k: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&k| k > 0)
        .ok_or_else(|| Failure::Input(format!("PELL_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| Failure::Numerical(e.to_string()))
}

fn run(cli: &Cli) -> Result<(&'static str, Outcome), Failure> {
    configure_threads()?;
    Ok(match &cli.command {
        Command::Check(a) => ("check", commands::check(a)?),
        Command::Range(a) => ("range", commands::range(a)?),
        Command::Lame(a) => ("lame", commands::lame(a)?),
        Command::Solvability(a) => ("solvability", commands::solvability(a)?),
        Command::Falsify(a) => ("falsify", commands::falsify(a)?),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let start = Instant::now();
    match run(&cli) {
        Ok((name, out)) => {
            let mut manifest = json!({
                "command": name,
                "config": out.config,
                "seed": out.seed,
                "version": env!("CARGO_PKG_VERSION"),
            });
            if !cli.no_timing {
                manifest["duration_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
            }
            let doc = json!({"manifest": manifest, "result": out.result});
            println!("{}", serde_json::to_string_pretty(&doc).expect("JSON values always serialize"));
            ExitCode::from(if out.negative { 1 } else { 0 })
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
