mod config;
mod document;
mod experiments;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::{json, Value};

use config::{Action, Cli, ExperimentConfig, GlobalArgs};
use document::{first_difference, render, write_csv, SCHEMA_VERSION};

mod status {
    pub const OK: u8 = 0;
    pub const ERROR: u8 = 1;
    pub const AUDIT_FAILED: u8 = 2;
    pub const REPLAY_MISMATCH: u8 = 3;
    pub const USAGE: u8 = 64;
    pub const SCHEMA: u8 = 65;
}

struct Failure {
    status: u8,
    message: String,
}

impl Failure {
    fn new(status: u8, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => status::OK,
                _ => status::USAGE,
            });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.status)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(Failure::new(status::USAGE, "--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::new(status::ERROR, format!("thread pool: {e}")))?;
    }
    match cli.action {
        Action::Run(experiment) => {
            let g = &cli.global;
            let config = ExperimentConfig::new(experiment, g.seed, &g.calib, g.dump_states)
                .map_err(|e| Failure::new(status::USAGE, e.to_string()))?;
            run(&config, g)
        }
        Action::Replay { file } => replay(&file),
    }
}

/// Runs `config` and assembles the result document.
fn execute(config: &ExperimentConfig) -> Result<(Value, experiments::RunOutput), Failure> {
    let started = Instant::now();
    let out = experiments::run(config).map_err(|e| Failure::new(status::ERROR, e.to_string()))?;
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": config.experiment.name(),
        "config_echo": config,
        "seed": config.seed,
        "metrics": out.metrics,
        "audits": out.audits,
        "calibration": config.calibration,
        "wall_time_ms": started.elapsed().as_millis() as u64,
    });
    Ok((doc, out))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::new(status::ERROR, format!("writing {}: {e}", path.display())))
}

fn run(config: &ExperimentConfig, g: &GlobalArgs) -> Result<u8, Failure> {
    let (doc, out) = execute(config)?;
    let text = render(&doc);
    match &g.out {
        Some(path) => write_file(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    if let Some(path) = &g.csv {
        let mut buf = Vec::new();
        write_csv(&mut buf, &out.records).map_err(|e| Failure::new(status::ERROR, e.to_string()))?;
        write_file(path, &buf)?;
    }
    let mut failed = false;
    for a in &out.audits {
        eprintln!(
            "audit {}: {} (lhs {:.6e}, rhs {:.6e}, margin {:.3e})",
            a.name,
            if a.pass { "pass" } else { "FAIL" },
            a.lhs,
            a.rhs,
            a.margin
        );
        failed |= !a.pass;
    }
    Ok(if failed { status::AUDIT_FAILED } else { status::OK })
}

fn replay(path: &Path) -> Result<u8, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(status::ERROR, format!("reading {}: {e}", path.display())))?;
    let stored: Value =
        serde_json::from_str(&text).map_err(|e| Failure::new(status::SCHEMA, format!("not a result document: {e}")))?;
    match stored.get("schema_version").and_then(Value::as_u64) {
        Some(SCHEMA_VERSION) => {}
        other => {
            return Err(Failure::new(
                status::SCHEMA,
                format!("schema version {other:?} does not match supported version {SCHEMA_VERSION}"),
            ))
        }
    }
    let echo = stored.get("config_echo").cloned().unwrap_or(Value::Null);
    let config: ExperimentConfig = serde_json::from_value(echo)
        .map_err(|e| Failure::new(status::SCHEMA, format!("config_echo does not describe an experiment: {e}")))?;
    config.validate().map_err(|e| Failure::new(status::SCHEMA, format!("config_echo is invalid: {e}")))?;

    let (fresh, _) = execute(&config)?;
    let fresh: Value = serde_json::from_str(&render(&fresh)).expect("rendered documents parse");
    for key in ["metrics", "audits"] {
        let (a, b) = (stored.get(key).unwrap_or(&Value::Null), &fresh[key]);
        if let Some(at) = first_difference(a, b) {
            eprintln!("replay mismatch in {key} at {at}");
            return Ok(status::REPLAY_MISMATCH);
        }
    }
    eprintln!("replay matches: {}", config.experiment.name());
    Ok(status::OK)
}
