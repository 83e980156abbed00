mod config;
mod output;
mod run;

use std::process::ExitCode;

use clap::Parser;
use sqzpsk_core::Error;

use config::{Cli, Command, RunConfig, UsageError};
use run::{execute, Failure};

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Library parameter errors are usage errors; everything else is numerical.
fn classify(e: Error, command: Command) -> Failure {
    let grid = command == Command::Scan;
    let flag = match &e {
        Error::InvalidParameter { name, .. } => match *name {
            "energy" => Some(if grid { "--energies" } else { "--energy" }),
            "squeezing_fraction" | "beta" => Some(if grid { "--betas" } else { "--beta" }),
            "sigma" => Some(if grid { "--sigmas" } else { "--sigma" }),
            "cutoff_tail" => Some("--cutoff-tail"),
            "quad_nodes" => Some("--quad-nodes"),
            "resolution" => Some("--resolution"),
            _ => None,
        },
        Error::InvalidPurity { .. } | Error::EnergyBudgetExceeded { .. } => {
            Some(if grid { "--purities" } else { "--purity" })
        }
        Error::InvalidTransmissivity(_) => Some("--eta"),
        Error::UnknownKind(_) => Some("--figure"),
        _ => None,
    };
    match flag {
        Some(flag) => Failure::Usage(UsageError::new(flag, e.to_string())),
        None => Failure::Numerical(e),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = RunConfig::from_cli(cli)?;
    let outcome = execute(&cfg).map_err(|f| match f {
        Failure::Numerical(e) => classify(e, cfg.command),
        other => other,
    })?;
    let mut table = outcome.table;
    table
        .metadata
        .insert("tool".into(), format!("sqzpsk {}", env!("CARGO_PKG_VERSION")));
    table.metadata.insert("command".into(), cfg.command.name().into());
    table.metadata.insert(
        "cutoff_target_tail".into(),
        format!("{:e}", cfg.numerics.cutoff.target_tail),
    );
    table.metadata.insert(
        "quadrature_tolerance".into(),
        format!("{:e}", cfg.numerics.quadrature.tolerance),
    );
    table.metadata.insert(
        "quadrature_max_nodes".into(),
        cfg.numerics.quadrature.max_nodes.to_string(),
    );

    let text = output::render(&table, outcome.headline, cfg.format, cfg.output.is_some());
    match &cfg.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: invalid value for {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: numerical failure: {e}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: cannot write output: {msg}");
            ExitCode::FAILURE
        }
    }
}
