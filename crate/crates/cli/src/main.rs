mod args;
mod commands;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command};
use commands::Outcome;
use manifest::{differences, unix_now, versions, RunManifest};
use qwalk_core::{Error, Result};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::ResourceCap { .. } => EXIT_RESOURCE,
        Error::ArityMismatch { .. }
        | Error::GroupDescriptor(_)
        | Error::NotSquare { .. }
        | Error::ShapeMismatch(_)
        | Error::NotHadamard { .. }
        | Error::NotDephased
        | Error::NotSquareConfiguration { .. }
        | Error::Crossing
        | Error::InvalidArgument(_)
        | Error::Io(_)
        | Error::Json(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Model(_) => "model",
        Command::Moments(_) => "moments",
        Command::Walk(_) => "walk",
        Command::Asympt(_) => "asympt",
        Command::Mc(_) => "mc",
        Command::Verify(_) => "verify",
        Command::Replay(_) => "replay",
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Model(a) => commands::model(a),
        Command::Moments(a) => commands::moments(a),
        Command::Walk(a) => commands::walk(a),
        Command::Asympt(a) => commands::asympt(a),
        Command::Mc(a) => commands::mc(a),
        Command::Verify(a) => commands::verify(a),
        Command::Replay(a) => replay(&a.manifest),
    }
}

/// Re-runs the recorded command in-process and compares with its stored result.
fn replay(path: &Path) -> Result<Outcome> {
    let recorded = RunManifest::load(path)?;
    if matches!(recorded.args.command, Command::Replay(_)) {
        return Err(Error::InvalidArgument("cannot replay a replay".into()));
    }
    let result_path = recorded
        .outputs
        .iter()
        .find(|p| p.file_name().is_some_and(|n| n == "result.json"))
        .cloned()
        .unwrap_or_else(|| path.with_file_name("result.json"));
    let stored: Value = serde_json::from_str(&std::fs::read_to_string(&result_path)?)?;
    let rerun = dispatch(&recorded.args)?;
    let diffs = differences(&stored, &rerun.json);
    let matches = diffs.is_empty();
    Ok(Outcome {
        json: json!({
            "manifest": path,
            "command": recorded.command,
            "matches": matches,
            "differences": diffs,
        }),
        csv: None,
        ok: matches,
        seeds: recorded.seeds,
    })
}

fn write_outputs(dir: &Path, outcome: &Outcome) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json_path = dir.join("result.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(&outcome.json)?)?;
    written.push(json_path);
    if let Some(csv) = &outcome.csv {
        let csv_path = dir.join("result.csv");
        std::fs::write(&csv_path, csv)?;
        written.push(csv_path);
    }
    Ok(written)
}

fn run(cli: Cli, argv: Vec<String>) -> u8 {
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return EXIT_USAGE;
        }
    }
    let started_unix = unix_now();
    let outcome = match dispatch(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    match (&outcome.csv, cli.csv) {
        (Some(csv), true) => print!("{csv}"),
        _ => match serde_json::to_string_pretty(&outcome.json) {
            Ok(s) => println!("{s}"),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_FAILURE;
            }
        },
    }
    let code = if outcome.ok { 0 } else { EXIT_FAILURE };

    let outputs = match &cli.out {
        Some(dir) => match write_outputs(dir, &outcome) {
            Ok(paths) => paths,
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code_for(&e);
            }
        },
        None => Vec::new(),
    };
    let mut manifest = RunManifest {
        command: command_name(&cli.command).to_string(),
        args: cli.clone(),
        argv,
        seeds: outcome.seeds,
        versions: versions(),
        threads: rayon::current_num_threads(),
        started_unix,
        finished_unix: unix_now(),
        outputs,
        exit_code: code as i32,
    };
    // A replayed run must not rewrite the directory it was recorded into.
    manifest.args.out = None;
    let text = match serde_json::to_string_pretty(&manifest) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    };
    match &cli.out {
        Some(dir) => {
            if let Err(e) = std::fs::write(dir.join("manifest.json"), text) {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        }
        None => eprintln!("manifest: {text}"),
    }
    code
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::try_parse_from(&argv).unwrap_or_else(|e| e.exit());
    ExitCode::from(run(cli, argv))
}
