use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use wres_verify::commands::{heat_command, residue_command, spectrum_command, write_spectrum_csv, SourceName};
use wres_verify::{all_passed, run_cases, select_cases, Config, Mutation, RunOptions};

#[derive(Parser)]
#[command(name = "wres", version, about = "Wodzicki residues, heat invariants and their cross-checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification cases; exits 0 iff all pass.
    Verify {
        /// Case id (repeatable); all cases when omitted.
        #[arg(long = "case")]
        cases: Vec<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override every selected case's tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Write the JSON reports here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum, default_value = "none", hide = true)]
        mutation: Mutation,
        /// List case ids and exit.
        #[arg(long)]
        list: bool,
    },
    /// Wodzicki residue of a negative power of the configured operator.
    Residue {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Heat coefficients of the configured operator.
    Heat {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Model spectrum as `eigenvalue,multiplicity` CSV.
    Spectrum {
        #[arg(long, value_enum)]
        source: SourceName,
        /// Largest eigenvalue to include.
        #[arg(long)]
        cutoff: f64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: Option<&PathBuf>) -> anyhow::Result<Config> {
    Ok(match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    })
}

fn output(path: Option<&PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Verify {
            cases,
            config,
            tol,
            out,
            workers,
            mutation,
            list,
        } => {
            if list {
                for c in wres_verify::registry() {
                    println!("{:<24} {}", c.id, c.summary);
                }
                return Ok(true);
            }
            let config = load(config.as_ref())?;
            let selected = select_cases(&cases)?;
            let opts = RunOptions { tol, mutation, workers };
            let reports = run_cases(&selected, &config, &opts)?;
            for r in &reports {
                eprintln!("{}", r.summary_line());
            }
            let mut w = output(out.as_ref())?;
            serde_json::to_writer_pretty(&mut w, &reports)?;
            writeln!(w)?;
            w.flush()?;
            Ok(all_passed(&reports))
        }
        Command::Residue { config } => {
            let v = residue_command(&load(config.as_ref())?)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            Ok(v["valid"].as_bool().unwrap_or(false))
        }
        Command::Heat { config } => {
            let v = heat_command(&load(config.as_ref())?)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            Ok(true)
        }
        Command::Spectrum {
            source,
            cutoff,
            config,
            out,
        } => {
            let spec = spectrum_command(source, cutoff, &load(config.as_ref())?)?;
            write_spectrum_csv(&spec, output(out.as_ref())?)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
