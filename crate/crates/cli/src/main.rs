//! `twocopy` command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use twocopy::bellmeas::{exact_distribution, sample_outcomes, write_outcomes_csv, Method};
use twocopy::channels::{positivity_class, ChoiMatrix};
use twocopy::experiment::{error_json, run_experiment, ExperimentConfig, Shots, StateSource};
use twocopy::states::PSD_TOL;
use twocopy::Error;

#[derive(Parser)]
#[command(name = "twocopy", version, about = "Two-copy quantum measurement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config (`-` reads standard input).
    Run {
        config: String,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's shots ("exact" or a count).
        #[arg(long)]
        shots: Option<String>,
        /// Overrides the config's task.
        #[arg(long)]
        task: Option<String>,
        /// Overrides the config's state (e.g. `ghz:3`, `random:2:1:7`, a JSON path).
        #[arg(long)]
        state: Option<String>,
    },
    /// Classify a map given as a Choi matrix JSON file.
    CertifyMap {
        choi: PathBuf,
        #[arg(long, default_value_t = PSD_TOL)]
        tol: f64,
    },
    /// Sample joint Bell outcomes on two copies of a state and dump them as CSV.
    Sample {
        state: String,
        #[arg(long)]
        shots: usize,
        #[arg(long)]
        seed: u64,
        /// CSV destination; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_config(path: &str) -> Result<String, Error> {
    let mut text = String::new();
    if path == "-" {
        io::stdin().read_to_string(&mut text).map_err(|e| Error::Parse(format!("stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {path}: {e}")))?;
    }
    Ok(text)
}

fn apply_overrides(
    mut doc: Value,
    seed: Option<u64>,
    shots: Option<String>,
    task: Option<String>,
    state: Option<String>,
) -> Result<Value, Error> {
    let obj = doc.as_object_mut().ok_or_else(|| Error::Parse("config must be a JSON object".into()))?;
    if let Some(seed) = seed {
        obj.insert("seed".into(), json!(seed));
    }
    if let Some(shots) = shots {
        let shots: Shots = shots.parse()?;
        obj.insert("shots".into(), serde_json::to_value(shots).expect("shots serialize"));
    }
    if let Some(task) = task {
        obj.insert("task".into(), json!(task));
    }
    if let Some(state) = state {
        let state: StateSource = state.parse()?;
        obj.insert("state".into(), serde_json::to_value(state).expect("state serializes"));
    }
    Ok(doc)
}

fn execute(command: Command) -> Result<(), Error> {
    let stdout = io::stdout();
    match command {
        Command::Run { config, seed, shots, task, state } => {
            let doc: Value =
                serde_json::from_str(&read_config(&config)?).map_err(|e| Error::Parse(format!("config: {e}")))?;
            let doc = apply_overrides(doc, seed, shots, task, state)?;
            let config: ExperimentConfig =
                serde_json::from_value(doc).map_err(|e| Error::Parse(format!("config: {e}")))?;
            let report = run_experiment(&config)?;
            let mut out = stdout.lock();
            serde_json::to_writer_pretty(&mut out, &report).expect("report serializes");
            writeln!(out).ok();
        }
        Command::CertifyMap { choi, tol } => {
            let text = std::fs::read_to_string(&choi)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", choi.display())))?;
            let map: ChoiMatrix =
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", choi.display())))?;
            let report = positivity_class(&map, tol);
            let doc = json!({
                "classification": report.class.to_string(),
                "min_eig_cp": report.min_eig_cp,
                "min_eig_ccp": report.min_eig_ccp,
                "tol": tol,
            });
            let mut out = stdout.lock();
            serde_json::to_writer_pretty(&mut out, &doc).expect("json");
            writeln!(out).ok();
        }
        Command::Sample { state, shots, seed, out } => {
            let rho = state.parse::<StateSource>()?.load()?;
            let dist = exact_distribution(&rho, &rho, Method::ClosedForm)?;
            let outcomes = sample_outcomes(&dist, shots, seed);
            let io_err = |e: io::Error| Error::Parse(format!("writing CSV: {e}"));
            match out {
                Some(path) => {
                    let file = File::create(&path).map_err(io_err)?;
                    write_outcomes_csv(rho.n(), &outcomes, BufWriter::new(file)).map_err(io_err)?;
                    let doc = json!({ "n": rho.n(), "shots": shots, "seed": seed, "out": path });
                    serde_json::to_writer(stdout.lock(), &doc).expect("json");
                    println!();
                }
                None => write_outcomes_csv(rho.n(), &outcomes, BufWriter::new(stdout.lock())).map_err(io_err)?,
            }
        }
    }
    Ok(())
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("{}", error_json(err));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&Error::Argument(e.to_string().trim().to_string())),
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
