use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use twistforge::cli::{run, Command, RunConfig, EXIT_INVALID};

#[derive(Parser)]
#[command(
    name = "twistforge",
    version,
    about = "Twisted Poincare coproducts, phase-space relations and uncertainty checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Twisted translation coproducts and the phase-space relation table.
    Derive(Flags),
    /// Cocycle, coassociativity, hermiticity, Jacobi and realization checks.
    Check(Flags),
    /// Numeric uncertainty suite and limit scan.
    Uncertainty(Flags),
    /// Twisted coproduct of one generator.
    Expand(Flags),
}

#[derive(Args)]
struct Flags {
    /// JSON config document.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// `i` or `ii`.
    #[arg(long)]
    case: Option<String>,
    /// `corrected` or `printed`.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    hermitian: Option<bool>,
    /// Parameter value, `name=value`; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    order: Option<u32>,
    #[arg(long)]
    generator: Option<String>,
    /// Check to run; repeatable.
    #[arg(long = "check", value_name = "KIND")]
    checks: Vec<String>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    states: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    hbar: Option<f64>,
    /// `text`, `json` or `csv`.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override any config key: `dotted.key=<json>`; repeatable.
    #[arg(long = "set", value_name = "KEY=JSON")]
    sets: Vec<String>,
}

impl Flags {
    fn overrides(&self) -> Result<Vec<(String, Value)>, String> {
        let mut out: Vec<(String, Value)> = Vec::new();
        let mut put = |k: &str, v: Value| out.push((k.to_string(), v));
        for s in &self.sets {
            let (k, v) = s.split_once('=').ok_or(format!("--set expects KEY=JSON, got `{s}`"))?;
            let v = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
            put(k, v);
        }
        if let Some(v) = &self.preset {
            put("preset", json!(v));
        }
        if let Some(v) = &self.case {
            put("case", json!(v));
        }
        if let Some(v) = &self.variant {
            put("variant", json!(v));
        }
        if let Some(v) = self.hermitian {
            put("hermitian", json!(v));
        }
        for p in &self.params {
            let (k, v) = p.split_once('=').ok_or(format!("--param expects NAME=VALUE, got `{p}`"))?;
            put(&format!("parameters.{k}"), json!(v));
        }
        if let Some(v) = self.order {
            put("order", json!(v));
        }
        if let Some(v) = &self.generator {
            put("generator", json!(v));
        }
        if !self.checks.is_empty() {
            put("checks", json!(self.checks));
        }
        if let Some(v) = self.points {
            put("grid.points", json!(v));
        }
        if let Some(v) = self.cutoff {
            put("grid.cutoff", json!(v));
        }
        if let Some(v) = self.states {
            put("grid.states", json!(v));
        }
        if let Some(v) = self.seed {
            put("grid.seed", json!(v));
        }
        if let Some(v) = self.hbar {
            put("grid.hbar", json!(v));
        }
        if let Some(v) = &self.format {
            put("format", json!(v));
        }
        if let Some(v) = &self.output {
            put("output", json!(v));
        }
        Ok(out)
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("TWISTFORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or(format!("TWISTFORGE_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn load(flags: &Flags) -> Result<RunConfig, String> {
    let doc = match &flags.config {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?),
        None => None,
    };
    RunConfig::load(doc.as_deref(), &flags.overrides()?).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INVALID as u8);
    }
    let (command, flags) = match &cli.command {
        Sub::Derive(f) => (Command::Derive, f),
        Sub::Check(f) => (Command::Check, f),
        Sub::Uncertainty(f) => (Command::Uncertainty, f),
        Sub::Expand(f) => (Command::Expand, f),
    };
    let cfg = match load(flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID as u8);
        }
    };
    let outcome = run(command, &cfg);
    if outcome.code == EXIT_INVALID {
        eprint!("{}", outcome.output);
    } else if let Some(path) = &cfg.output {
        if let Err(e) = std::fs::write(path, &outcome.output) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_INVALID as u8);
        }
    } else {
        print!("{}", outcome.output);
    }
    ExitCode::from(outcome.code as u8)
}
