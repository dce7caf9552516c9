use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use redundancy::detection::{detect, DetectOptions, Method};
use redundancy::generators::{gen_a1, gen_a2, gen_a3, gen_random_fulldim};
use redundancy::io::{parse_any, serialize_system, verify_document, ResultDocument};
use redundancy::pivot::PivotRule;
use redundancy::Error;

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_ASSUMPTION: u8 = 3;
const EXIT_REJECTED: u8 = 4;

/// Exact redundancy detection for dictionary-form inequality systems.
#[derive(Parser)]
#[command(name = "redund", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify every constraint of a system file as redundant or nonredundant.
    Detect {
        file: PathBuf,
        #[arg(long, default_value = "combinatorial")]
        method: Method,
        #[arg(long)]
        parallel: bool,
        /// Attach a verifiable certificate to every variable.
        #[arg(long)]
        certificates: bool,
        /// Include work counters in the result document.
        #[arg(long)]
        stats: bool,
        /// Use a seeded random variable ranking in the pivot rule.
        #[arg(long)]
        seed: Option<u64>,
        /// Skip the full-dimensionality check.
        #[arg(long)]
        assume_full_dim: bool,
        /// Write the result here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print a generated system file.
    Gen {
        #[command(subcommand)]
        family: Family,
    },
    /// Re-check every certificate of a result document.
    Verify { result: PathBuf, system: PathBuf },
}

#[derive(Subcommand)]
enum Family {
    A1 {
        n: usize,
    },
    A2 {
        n: usize,
    },
    A3 {
        n: usize,
        d: usize,
    },
    Random {
        n: usize,
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// A failure with its exit status.
struct Failure(u8, anyhow::Error);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible { .. } | Error::InfeasibleStart => EXIT_INFEASIBLE,
            Error::NotFullDimensional | Error::AssumptionViolation(_) => EXIT_ASSUMPTION,
            _ => EXIT_INPUT,
        };
        Failure(code, e.into())
    }
}

fn input(e: anyhow::Error) -> Failure {
    Failure(EXIT_INPUT, e)
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(input)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Detect {
            file,
            method,
            parallel,
            certificates,
            stats,
            seed,
            assume_full_dim,
            output,
        } => {
            let inst = parse_any(&read(&file)?)?;
            let mut opts = DetectOptions {
                certificates,
                parallel,
                assume_full_dim,
                ..DetectOptions::default()
            };
            if let Some(seed) = seed {
                opts.solve.rule = PivotRule::Randomized { seed };
            }
            let res = detect(&inst, method, &opts)?;
            let doc = ResultDocument::new(&inst, &res, stats).to_json();
            match output {
                Some(path) => fs::write(&path, doc + "\n")
                    .with_context(|| format!("cannot write {}", path.display()))
                    .map_err(input)?,
                None => println!("{doc}"),
            }
        }
        Command::Gen { family } => {
            let inst = match family {
                Family::A1 { n } => gen_a1(n)?,
                Family::A2 { n } => gen_a2(n)?,
                Family::A3 { n, d } => gen_a3(n, d)?,
                Family::Random { n, d, seed } => gen_random_fulldim(n, d, seed)?.instance,
            };
            print!("{}", serialize_system(&inst));
        }
        Command::Verify { result, system } => {
            let doc = ResultDocument::from_json(&read(&result)?)?;
            let inst = parse_any(&read(&system)?)?;
            let report = verify_document(&doc, &inst)?;
            for f in &report.failures {
                eprintln!("FAIL {f}");
            }
            if !report.ok() {
                return Err(Failure(
                    EXIT_REJECTED,
                    anyhow::anyhow!("{} problem(s) found", report.failures.len()),
                ));
            }
            println!("ok: {} certificates verified", report.verified.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
