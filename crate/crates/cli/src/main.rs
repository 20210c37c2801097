//! `pqd-slln`: one binary with a subcommand per computation.
//!
//! Each run writes `manifest.json` (the resolved parameters and tool
//! version) plus `result.json` and/or CSV tables into the output directory,
//! and prints the JSON result on standard output. Errors go to standard
//! error as one JSON line; the exit code is 2 for bad parameters and 3 for
//! numeric failures.

mod commands;
mod config;
mod error;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use commands::{CenteringArg, GMethod, Outcome, SpecialFunction};
use config::{resolve, FileConfig};
use error::{CliError, EXIT_OK};

/// Overrides the default output directory.
const OUT_DIR_ENV: &str = "PQD_SLLN_OUT";
const DEFAULT_OUT_DIR: &str = "pqd-slln-out";
const TOOL: &str = "pqd-slln";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Debug, Parser)]
#[command(
    name = "pqd-slln",
    version,
    about = "Strong-law diagnostics for pairwise PQD sequences"
)]
struct Cli {
    /// Output directory [env: PQD_SLLN_OUT] [default: pqd-slln-out]
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Which artifacts to write besides the manifest [default: both]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Flat `key = value` file or an emitted manifest.json; flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores); does not affect outputs
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Special functions
    Specfun {
        #[command(subcommand)]
        cmd: SpecfunCmd,
    },
    /// The covariance functional G
    G {
        #[command(subcommand)]
        cmd: GCmd,
    },
    /// Truncated series conditions
    Condition {
        #[command(subcommand)]
        cmd: ConditionCmd,
    },
    /// Exact event probabilities and second-moment ratios
    Bc {
        #[command(subcommand)]
        cmd: BcCmd,
    },
    /// Monte Carlo paths
    Simulate {
        #[command(subcommand)]
        cmd: SimulateCmd,
    },
    /// Pareto(2) marginal with a GFM power schedule, checked end to end
    Report {
        #[command(subcommand)]
        cmd: ReportCmd,
    },
}

#[derive(Debug, Subcommand)]
enum SpecfunCmd {
    Eval(SpecfunFlags),
}

#[derive(Debug, Subcommand)]
enum GCmd {
    Eval(GFlags),
}

#[derive(Debug, Subcommand)]
enum ConditionCmd {
    Check(ConditionFlags),
}

#[derive(Debug, Subcommand)]
enum BcCmd {
    /// Rényi–Lamperti ratio on an n-grid with its running minimum
    Ratio(BcRatioFlags),
    /// Bracket inequality for one pair (k, j)
    Bracket(BcBracketFlags),
    /// Scaled tail-sum ratio and its bounds
    TailRatio(BcTailRatioFlags),
}

#[derive(Debug, Subcommand)]
enum SimulateCmd {
    Slln(SimulateFlags),
}

#[derive(Debug, Subcommand)]
enum ReportCmd {
    Example(ReportFlags),
}

#[derive(Debug, Args, Serialize)]
struct SpecfunFlags {
    #[arg(long = "function", value_parser = parse_function)]
    function: Option<SpecialFunction>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
}

fn parse_function(s: &str) -> Result<SpecialFunction, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|_| "expected gamma, hyp2f1 or pochhammer".into())
}

#[derive(Debug, Args, Serialize)]
struct GFlags {
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<GMethod>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct ConditionFlags {
    /// cs11, nec12 or l1
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Truncation point
    #[arg(long = "N", visible_alias = "n")]
    n: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
struct BcRatioFlags {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// zero, const:THETA or power:MU,NU
    #[arg(long, allow_hyphen_values = true)]
    theta_spec: Option<String>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    /// Comma-separated increasing n values
    #[arg(long)]
    n_grid: Option<String>,
    /// upper or lower
    #[arg(long)]
    side: Option<String>,
}

#[derive(Debug, Args, Serialize)]
struct BcBracketFlags {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta_spec: Option<String>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    j: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    side: Option<String>,
}

#[derive(Debug, Args, Serialize)]
struct BcTailRatioFlags {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long = "N", visible_alias = "n")]
    n: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
struct SimulateFlags {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// zero or power:MU,NU,SCALE
    #[arg(long, allow_hyphen_values = true)]
    theta_spec: Option<String>,
    #[arg(long)]
    n_max: Option<u64>,
    #[arg(long)]
    replicates: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Centering constant, or `mean`
    #[arg(long, allow_hyphen_values = true)]
    c: Option<CenteringArg>,
}

#[derive(Debug, Args, Serialize)]
struct ReportFlags {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long = "N", visible_alias = "n")]
    n: Option<u64>,
}

/// A run reduced to its command name and the parameter flags given.
struct Invocation {
    name: &'static str,
    flags: Value,
}

fn to_value<T: Serialize>(flags: &T) -> Value {
    serde_json::to_value(flags).expect("flag structs serialize")
}

const COMMAND_NAMES: [&str; 8] = [
    "specfun eval",
    "g eval",
    "condition check",
    "bc ratio",
    "bc bracket",
    "bc tail-ratio",
    "simulate slln",
    "report example",
];

impl Invocation {
    fn from_command(cmd: &Command) -> Self {
        let (name, flags) = match cmd {
            Command::Specfun {
                cmd: SpecfunCmd::Eval(f),
            } => ("specfun eval", to_value(f)),
            Command::G { cmd: GCmd::Eval(f) } => ("g eval", to_value(f)),
            Command::Condition {
                cmd: ConditionCmd::Check(f),
            } => ("condition check", to_value(f)),
            Command::Bc { cmd: BcCmd::Ratio(f) } => ("bc ratio", to_value(f)),
            Command::Bc { cmd: BcCmd::Bracket(f) } => ("bc bracket", to_value(f)),
            Command::Bc {
                cmd: BcCmd::TailRatio(f),
            } => ("bc tail-ratio", to_value(f)),
            Command::Simulate {
                cmd: SimulateCmd::Slln(f),
            } => ("simulate slln", to_value(f)),
            Command::Report {
                cmd: ReportCmd::Example(f),
            } => ("report example", to_value(f)),
        };
        Self { name, flags }
    }

    fn from_name(name: &str) -> Result<Self, CliError> {
        let name = COMMAND_NAMES
            .iter()
            .find(|n| **n == name.trim())
            .ok_or_else(|| CliError::Usage(format!("unknown command '{name}' in config")))?;
        Ok(Self {
            name,
            flags: Value::Object(Map::new()),
        })
    }
}

/// Resolves parameters, runs the command and returns (resolved params, outcome).
fn execute(name: &str, flags: &Value, base: &Map<String, Value>) -> Result<(Value, Outcome), CliError> {
    fn go<P, F>(flags: &Value, base: &Map<String, Value>, run: F) -> Result<(Value, Outcome), CliError>
    where
        P: serde::de::DeserializeOwned + Serialize,
        F: FnOnce(&P) -> Result<Outcome, CliError>,
    {
        let params: P = resolve(flags, base)?;
        let echoed = serde_json::to_value(&params).map_err(|e| CliError::Internal(e.to_string()))?;
        Ok((echoed, run(&params)?))
    }
    match name {
        "specfun eval" => go(flags, base, commands::specfun_eval),
        "g eval" => go(flags, base, commands::g_eval),
        "condition check" => go(flags, base, commands::condition_check),
        "bc ratio" => go(flags, base, commands::bc_ratio),
        "bc bracket" => go(flags, base, commands::bc_bracket),
        "bc tail-ratio" => go(flags, base, commands::bc_tail_ratio),
        "simulate slln" => go(flags, base, commands::simulate_slln),
        "report example" => go(flags, base, commands::report_example),
        other => Err(CliError::Internal(format!("no handler for '{other}'"))),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

fn parse_format(s: &str) -> Result<Format, CliError> {
    Format::from_str(s, true).map_err(|_| CliError::Usage(format!("format must be json, csv or both, got '{s}'")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        configure_threads(threads)?;
    }
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let invocation = match (&cli.command, &file.command) {
        (Some(cmd), cfg) => {
            let inv = Invocation::from_command(cmd);
            if let Some(cfg) = cfg {
                if cfg.trim() != inv.name {
                    return Err(CliError::Usage(format!(
                        "config is for '{cfg}' but the command line runs '{}'",
                        inv.name
                    )));
                }
            }
            inv
        }
        (None, Some(name)) => Invocation::from_name(name)?,
        (None, None) => return Err(CliError::Usage("no command given (see --help)".into())),
    };
    let format = match (cli.format, &file.format) {
        (Some(f), _) => f,
        (None, Some(s)) => parse_format(s)?,
        (None, None) => Format::Both,
    };
    let out_dir = cli
        .out_dir
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

    let (params, outcome) = execute(invocation.name, &invocation.flags, &file.params)?;
    let manifest = json!({
        "tool": TOOL,
        "version": env!("CARGO_PKG_VERSION"),
        "command": invocation.name,
        "format": format,
        "params": params,
    });
    fs::create_dir_all(&out_dir)?;
    write_file(&out_dir, "manifest.json", &pretty(&manifest))?;
    if matches!(format, Format::Json | Format::Both) {
        write_file(&out_dir, "result.json", &pretty(&outcome.result))?;
    }
    if matches!(format, Format::Csv | Format::Both) {
        for (name, table) in &outcome.tables {
            write_file(&out_dir, name, table)?;
        }
    }
    print!("{}", pretty(&outcome.result));
    Ok(())
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: usize) -> Result<(), CliError> {
    if threads == 0 {
        return Err(CliError::Usage("--threads must be >= 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(threads: usize) -> Result<(), CliError> {
    if threads == 0 {
        return Err(CliError::Usage("--threads must be >= 1".into()));
    }
    log::warn!("built without the parallel feature; --threads {threads} has no effect");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::from(EXIT_OK as u8);
            }
            let first = e.to_string().lines().next().unwrap_or("invalid arguments").to_string();
            let err = CliError::Usage(first.trim_start_matches("error: ").to_string());
            eprintln!("{}", err.to_json_line());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
