use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uavmech::runner::{run_contract, run_match, run_sweep, run_verify, UNMATCHED};
use uavmech::scenario::Scenario;
use uavmech::verification::OracleConfig;
use uavmech::Error;

/// Contract design and UAV-to-subregion assignment experiments.
#[derive(Parser)]
#[command(name = "uavmech", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Io {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for CSV tables and report.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Build per-subregion contracts and tabulate coverage, rewards, IC matrix and profit.
    Contract {
        #[command(flatten)]
        io: Io,
    },
    /// Assign UAVs to subregions and certify stability.
    Match {
        #[command(flatten)]
        io: Io,
    },
    /// Check the scenario against brute-force oracles.
    Verify {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 10001)]
        grid_points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-run contract and matching over a range of one parameter.
    Sweep {
        #[command(flatten)]
        io: Io,
        /// Dotted parameter path, e.g. `economy.sigma` or `subregion.S1.center.x`.
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
    },
}

const EXIT_INVALID: u8 = 1;
const EXIT_VERIFY_FAILED: u8 = 2;
const EXIT_UNRESOLVED_TIE: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnresolvedTie { .. } => EXIT_UNRESOLVED_TIE,
        _ => EXIT_INVALID,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Contract { io } => {
            let out = run_contract(&Scenario::load(&io.scenario)?)?;
            out.write(&io.out)?;
            for s in &out.report.schedules {
                println!("{}: {} rungs, audit {}", s.subregion, s.rungs.len(), if s.audit.passed() { "ok" } else { "FAILED" });
            }
            Ok(0)
        }
        Command::Match { io } => {
            let out = run_match(&Scenario::load(&io.scenario)?)?;
            out.write(&io.out)?;
            let m = out.report.matching.as_ref().expect("match summary");
            for (uav, p) in &m.placements {
                match p {
                    Some(p) => println!("{uav} -> {}", p.subregion),
                    None => println!("{uav} -> {UNMATCHED}"),
                }
            }
            println!("blocking pairs: {}", m.blocking_pairs.len());
            Ok(0)
        }
        Command::Verify { io, grid_points, seed } => {
            let config = OracleConfig { theta_grid_points: grid_points, ..OracleConfig::default() };
            let out = run_verify(&Scenario::load(&io.scenario)?, &config, seed)?;
            out.write(&io.out)?;
            for c in &out.report.checks {
                println!("{} {} ({:.3e}) {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.magnitude, c.detail);
            }
            Ok(if out.report.passed() { 0 } else { EXIT_VERIFY_FAILED })
        }
        Command::Sweep { io, param, from, to, steps } => {
            let out = run_sweep(&Scenario::load(&io.scenario)?, &param, from, to, steps)?;
            out.write(&io.out)?;
            println!("{} rows", out.report.len());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
