//! `stampcheck`: validate models, check formulas, and run the joint-behavior
//! analyses and built-in scenarios from the command line.
//!
//! Exit codes: 0 success, 1 usage, parse or lookup error, 2 invalid or
//! malformed model, 3 failed assertion.

mod commands;
mod failure;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use commands::{Outcome, TheoremArgs};
use failure::{Failure, USAGE};

#[derive(Parser)]
#[command(
    name = "stampcheck",
    version,
    about = "Model checker for belief, common belief and its time- and action-stamped variants"
)]
struct Cli {
    /// Print a machine-readable JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file against every well-formedness and KD45 rule.
    Validate { model: PathBuf },

    /// Evaluate a formula at some or all points of a model.
    Check {
        model: PathBuf,
        #[arg(short, long)]
        formula: String,
        /// A point `run,time`; may be repeated.
        #[arg(long, conflicts_with = "all")]
        point: Vec<String>,
        /// Evaluate at every point (the default).
        #[arg(long)]
        all: bool,
        /// Exit with code 3 unless the formula holds at every selected point.
        #[arg(long)]
        assert: bool,
        /// Check a model whose only violations are KD45 properties.
        #[arg(long)]
        allow_invalid: bool,
    },

    /// Report JB for a group: acting members believe the group behaves.
    Jb {
        model: PathBuf,
        #[arg(long)]
        group: String,
        /// Exit with code 3 when JB fails.
        #[arg(long)]
        assert: bool,
    },

    /// Compare JB-style conditions with action-stamped common belief.
    /// Exits with code 3 on any disagreement.
    Theorems {
        #[arg(required_unless_present = "random", conflicts_with = "random")]
        model: Option<PathBuf>,
        /// Group to analyse; defaults to every declared group.
        #[arg(long)]
        group: Option<String>,
        /// Use this formula instead of χ.
        #[arg(long)]
        phi: Option<String>,
        /// Run on N generated models instead of a file.
        #[arg(long, value_name = "N")]
        random: Option<usize>,
        /// First generator seed for --random.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// Run a built-in scenario (or `all`), or export its model.
    Scenario {
        name: String,
        /// Write the scenario's model to this path instead of running it.
        #[arg(long, value_name = "PATH")]
        export: Option<PathBuf>,
    },

    /// Write a built-in scenario's model as JSON.
    Export {
        name: String,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },

    /// Generate a random KD45 model.
    Random {
        #[arg(long)]
        seed: u64,
        /// Output path; the model is printed when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Check { .. } => "check",
            Command::Jb { .. } => "jb",
            Command::Theorems { .. } => "theorems",
            Command::Scenario { .. } => "scenario",
            Command::Export { .. } => "export",
            Command::Random { .. } => "random",
        }
    }

    fn run(self) -> Outcome {
        match self {
            Command::Validate { model } => commands::validate(&model),
            Command::Check {
                model,
                formula,
                point,
                all: _,
                assert,
                allow_invalid,
            } => commands::check(&model, &formula, &point, assert, allow_invalid),
            Command::Jb {
                model,
                group,
                assert,
            } => commands::jb(&model, &group, assert),
            Command::Theorems {
                model,
                group,
                phi,
                random,
                seed,
            } => commands::theorems(&TheoremArgs {
                model,
                group,
                phi,
                random,
                seed,
            }),
            Command::Scenario { name, export } => commands::scenario(&name, export.as_deref()),
            Command::Export { name, out } => commands::export(&name, &out),
            Command::Random { seed, out } => commands::random(seed, out.as_deref()),
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    command: Option<&'a str>,
    argv: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    outcome: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a Failure>,
    exit_code: i32,
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn print_json(envelope: &Envelope<'_>) {
    emit(&(serde_json::to_string_pretty(envelope).expect("envelope serializes") + "\n"));
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let args = &argv[1..];
    let json = args.iter().any(|a| a == "--json");

    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            if json {
                let rendered = e.render().to_string();
                let first = rendered.lines().next().unwrap_or_default();
                let failure = Failure::usage(first.trim_start_matches("error: "));
                print_json(&Envelope {
                    command: None,
                    argv: args,
                    outcome: None,
                    error: Some(&failure),
                    exit_code: USAGE,
                });
            }
            return ExitCode::from(USAGE as u8);
        }
    };

    let name = cli.command.name();
    let code = match cli.command.run() {
        Ok(done) => {
            if cli.json {
                print_json(&Envelope {
                    command: Some(name),
                    argv: args,
                    outcome: Some(done.outcome),
                    error: None,
                    exit_code: done.code,
                });
            } else {
                emit(&done.text);
            }
            done.code
        }
        Err(failure) => {
            eprint!("{}", failure.render());
            if cli.json {
                print_json(&Envelope {
                    command: Some(name),
                    argv: args,
                    outcome: None,
                    error: Some(&failure),
                    exit_code: failure.code,
                });
            }
            failure.code
        }
    };
    ExitCode::from(code as u8)
}
