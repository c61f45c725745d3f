//! `depbound` command-line tool.

mod commands;
mod emit;
mod parse;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use commands::{
    BoundArgs, CompareArgs, DivergenceArgs, KernelArgs, McmcArgs, OracleArgs, SimulateArgs, TensorArgs,
};

const SCENARIOS: &str = "\
Scenarios (--scenario):
  binary      binary chain on {0,1}, uniform start, flip probability --lambda
  ssrw        simple symmetric random walk S_i = S_(i-1) + X_i, S_0 = 0
  nonmarkov   +-1 process with P(X_i = 1 | past) = sum_k p_k x_k, x_0 = 1 (--weights, default p_k = 2^-(k+1))
  coins       independent fair {0,1} coins
  chain       finite chain given by --kernel, started from --init (default: stationary law)";

const TOP_HELP: &str = "\
Scenarios (--scenario):
  binary      binary chain on {0,1}, uniform start, flip probability --lambda
  ssrw        simple symmetric random walk S_i = S_(i-1) + X_i, S_0 = 0
  nonmarkov   +-1 process with P(X_i = 1 | past) = sum_k p_k x_k, x_0 = 1 (--weights, default p_k = 2^-(k+1))
  coins       independent fair {0,1} coins
  chain       finite chain given by --kernel, started from --init (default: stationary law)

Formula index by command:
  divergence  Hellinger integral, Renyi divergence, KL, total variation, chi-square
  kernel      Dobrushin coefficient, spectral gap, backward channel, operator norm,
              hypercontractive exponent (closed form and bisection), Renyi SDPI point-mass ratio
  tensor      exact joint-vs-product Hellinger integral, Hoelder tensorisation upper and lower bounds,
              Renyi chain-rule sum
  bound       dependent McDiarmid bound, binary-chain closed form, walk closed form,
              past-dependent closed form, hypercontractive route, SDPI route, mean-gap and median recentring
  compare     Kontorovich-Ramanan bound, Fan-Jiang-Sun Hoeffding bound, Marton blow-up bound,
              crossover thresholds
  simulate    Monte Carlo tails with exact binomial intervals against every applicable bound
  oracle      exact enumeration against the tensorisation sandwich, exact tails
  mcmc        burn-in bound for empirical means against the spectral-gap bound, minimal burn-in
  schema      keys accepted in a --config file

Exit codes: 0 success, 2 invalid input, 3 computation error. Errors are JSON on stderr.
DEPBOUND_SEED overrides the seed of sampling commands.";

#[derive(Parser, Debug)]
#[command(name = "depbound", version, about = "Concentration bounds for dependent processes")]
#[command(after_long_help = TOP_HELP)]
struct Cli {
    /// Read the command and its options from a JSON file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the run manifest here (default: next to --out, else standard error for CSV).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Divergences between two distributions on states 0..k-1.
    #[command(after_long_help = commands::DIVERGENCE_HELP)]
    Divergence(DivergenceArgs),
    /// Contraction and spectral summary of a Markov kernel.
    #[command(after_long_help = commands::KERNEL_HELP)]
    Kernel(KernelArgs),
    /// Exact and tensorised Hellinger integrals of a process.
    #[command(after_long_help = commands::TENSOR_HELP)]
    Tensor(TensorArgs),
    /// Tail bound for a function of a dependent process.
    #[command(after_long_help = commands::BOUND_HELP)]
    Bound(BoundArgs),
    /// This method against a baseline, with the crossover threshold.
    #[command(after_long_help = commands::COMPARE_HELP)]
    Compare(CompareArgs),
    /// Monte Carlo tails against the bounds.
    #[command(after_long_help = commands::SIMULATE_HELP)]
    Simulate(SimulateArgs),
    /// Exact enumeration for small n.
    #[command(after_long_help = commands::ORACLE_HELP)]
    Oracle(OracleArgs),
    /// Burn-in bounds for MCMC empirical means.
    #[command(after_long_help = commands::MCMC_HELP)]
    Mcmc(McmcArgs),
    /// Print the keys accepted in a --config file.
    Schema,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Divergence(_) => "divergence",
            Command::Kernel(_) => "kernel",
            Command::Tensor(_) => "tensor",
            Command::Bound(_) => "bound",
            Command::Compare(_) => "compare",
            Command::Simulate(_) => "simulate",
            Command::Oracle(_) => "oracle",
            Command::Mcmc(_) => "mcmc",
            Command::Schema => "schema",
        }
    }

    fn config(&self) -> Value {
        let v = match self {
            Command::Divergence(a) => emit::to_value(a),
            Command::Kernel(a) => emit::to_value(a),
            Command::Tensor(a) => emit::to_value(a),
            Command::Bound(a) => emit::to_value(a),
            Command::Compare(a) => emit::to_value(a),
            Command::Simulate(a) => emit::to_value(a),
            Command::Oracle(a) => emit::to_value(a),
            Command::Mcmc(a) => emit::to_value(a),
            Command::Schema => Ok(json!({})),
        };
        v.expect("argument structs serialize")
    }
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError { kind: "InvalidConfig".into(), message: message.into(), code: 2 }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError { kind: "IoError".into(), message: format!("{}: {e}", path.display()), code: 3 }
    }
}

impl From<depbound::Error> for CliError {
    fn from(e: depbound::Error) -> Self {
        CliError { kind: e.kind().into(), message: e.to_string(), code: if e.is_validation() { 2 } else { 3 } }
    }
}

/// Output of a command: a JSON object, or CSV text plus a JSON summary for the manifest.
pub enum Report {
    Json(Map<String, Value>),
    Csv(String),
}

/// Command-specific extra manifest entries, such as the resolved seed.
pub struct Outcome {
    pub report: Report,
    pub extra: Map<String, Value>,
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let v = json!({ "error": { "kind": e.kind, "message": e.message, "exit_code": e.code } });
            eprintln!("{}", emit::json_string(&v));
            ExitCode::from(e.code)
        }
    }
}

fn run() -> Result<(), CliError> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => return clap_exit(e),
    };
    let cli = match &cli.config {
        Some(path) => {
            if cli.command.is_some() {
                return Err(CliError::validation("--config replaces the subcommand; give one or the other"));
            }
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let argv = config_argv(&text)?;
            match Cli::try_parse_from(argv) {
                Ok(c) => c,
                Err(e) => return clap_exit(e),
            }
        }
        None => cli,
    };
    let Some(command) = &cli.command else {
        return Err(CliError::validation("no subcommand given; see --help"));
    };
    if let Command::Schema = command {
        println!("{}", emit::json_string(&schema()));
        return Ok(());
    }
    let outcome = match command {
        Command::Divergence(a) => commands::divergence(a)?,
        Command::Kernel(a) => commands::kernel(a)?,
        Command::Tensor(a) => commands::tensor(a)?,
        Command::Bound(a) => commands::bound(a, cli.format)?,
        Command::Compare(a) => commands::compare(a, cli.format)?,
        Command::Simulate(a) => commands::simulate(a, cli.format)?,
        Command::Oracle(a) => commands::oracle(a)?,
        Command::Mcmc(a) => commands::mcmc(a)?,
        Command::Schema => unreachable!(),
    };
    let mut manifest = Map::new();
    manifest.insert("tool".into(), json!("depbound"));
    manifest.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    manifest.insert("command".into(), json!(command.name()));
    manifest.insert("config".into(), command.config());
    manifest.insert("format".into(), json!(cli.format));
    manifest.extend(outcome.extra);
    let manifest = Value::Object(manifest);

    let text = match outcome.report {
        Report::Json(mut obj) => {
            if cli.format == Format::Csv {
                return Err(CliError::validation(format!("{} has no CSV form", command.name())));
            }
            obj.insert("manifest".into(), manifest.clone());
            emit::json_string(&Value::Object(obj)) + "\n"
        }
        Report::Csv(s) => s,
    };
    match &cli.out {
        Some(p) => fs::write(p, &text).map_err(|e| CliError::io(p, e))?,
        None => print!("{text}"),
    }
    let manifest_path = cli.manifest.clone().or_else(|| {
        cli.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    match manifest_path {
        Some(p) => fs::write(&p, emit::json_string(&manifest) + "\n").map_err(|e| CliError::io(&p, e))?,
        None if cli.format == Format::Csv => eprintln!("{}", emit::json_string(&json!({ "manifest": manifest }))),
        None => {}
    }
    Ok(())
}

fn clap_exit(e: clap::Error) -> Result<(), CliError> {
    use clap::error::ErrorKind;
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            let _ = e.print();
            Ok(())
        }
        _ => {
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            Err(CliError { kind: "InvalidArguments".into(), message: first, code: 2 })
        }
    }
}

/// Turn `{"command": ..., key: value, ...}` into an argument vector. Keys
/// must name a long option of the command or a global option.
fn config_argv(text: &str) -> Result<Vec<String>, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::validation(format!("config: {e}")))?;
    let Value::Object(obj) = v else {
        return Err(CliError::validation("config must be a JSON object"));
    };
    let cmd_name = obj
        .get("command")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::validation("config needs a string \"command\""))?
        .to_string();
    let root = Cli::command();
    let sub = root
        .find_subcommand(&cmd_name)
        .ok_or_else(|| CliError::validation(format!("unknown command {cmd_name:?}")))?;
    let mut argv = vec!["depbound".to_string(), cmd_name.clone()];
    for (key, val) in &obj {
        if key == "command" {
            continue;
        }
        if key == "config" {
            return Err(CliError::validation("config files cannot nest"));
        }
        let long = key.replace('_', "-");
        let arg = sub
            .get_arguments()
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(long.as_str()))
            .ok_or_else(|| CliError::validation(format!("unknown key {key:?} for {cmd_name}")))?;
        if !arg.get_action().takes_values() {
            match val {
                Value::Bool(true) => argv.push(format!("--{long}")),
                Value::Bool(false) => {}
                _ => return Err(CliError::validation(format!("key {key:?} takes true or false"))),
            }
            continue;
        }
        let s = match val {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            Value::Array(items) => items
                .iter()
                .map(|x| match x {
                    Value::String(s) => Ok(s.clone()),
                    Value::Number(n) => Ok(n.to_string()),
                    _ => Err(CliError::validation(format!("key {key:?}: list entries must be numbers or strings"))),
                })
                .collect::<Result<Vec<_>, _>>()?
                .join(","),
            Value::Null => continue,
            _ => return Err(CliError::validation(format!("key {key:?}: unsupported value"))),
        };
        argv.push(format!("--{long}={s}"));
    }
    Ok(argv)
}

/// Keys accepted per command, with defaults and help, as a JSON document.
fn schema() -> Value {
    let root = Cli::command();
    let describe = |args: &mut dyn Iterator<Item = &clap::Arg>| -> Value {
        let mut m = Map::new();
        for a in args {
            let Some(long) = a.get_long() else { continue };
            if long == "help" || long == "version" || long == "config" {
                continue;
            }
            let defaults: Vec<String> =
                a.get_default_values().iter().map(|d| d.to_string_lossy().into_owned()).collect();
            m.insert(
                long.replace('-', "_"),
                json!({
                    "flag": !a.get_action().takes_values(),
                    "required": a.is_required_set(),
                    "default": defaults.first(),
                    "help": a.get_help().map(|h| h.to_string()),
                }),
            );
        }
        Value::Object(m)
    };
    let mut cmds = Map::new();
    for sub in root.get_subcommands() {
        if sub.get_name() == "schema" {
            continue;
        }
        cmds.insert(sub.get_name().into(), describe(&mut sub.get_arguments()));
    }
    json!({
        "command": cmds.keys().cloned().collect::<Vec<_>>(),
        "global": describe(&mut root.get_arguments()),
        "commands": cmds,
        "scenarios": SCENARIOS,
    })
}
