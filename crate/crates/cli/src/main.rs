//! `gadgetnet`: evaluate QBF formulas, compile them to gadget networks or
//! constraint graphs, simulate, verify against the oracle and run gadget
//! conformance suites.
//!
//! Exit codes: 0 on success, 1 on a disagreement or failed check, 2 on a
//! usage or input error.

mod args;
mod commands;
mod pipeline;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, DclCommand};
use pipeline::CliError;

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eval { file } => commands::eval(&file),
        Command::Compile { file, run, output } => commands::compile_cmd(&file, &run, &output),
        Command::Simulate { file, run, output } => commands::simulate_cmd(&file, &run, &output),
        Command::Verify { path, enumerate, random, random_vars, random_clauses, seed, run, output } => {
            let sources = verify::Sources {
                path: path.as_deref(),
                enumerate: enumerate.as_deref(),
                random,
                random_vars,
                random_clauses,
                seed,
            };
            verify::verify_cmd(&sources, &run, &output)
        }
        Command::Trace { file, run, output } => commands::trace_cmd(&file, &run, &output),
        Command::Conformance { gadget, backend, samples, seed, limits, output } => {
            commands::conformance_cmd(gadget, backend, samples, seed, &limits, &output)
        }
        Command::Dcl { command } => match command {
            DclCommand::Step { file, steps, output } => commands::dcl_step_cmd(&file, steps, &output),
            DclCommand::Decide { file, target, limits, output } => {
                commands::dcl_decide_cmd(&file, target.as_deref(), &limits, &output)
            }
            DclCommand::Conformance { gadget, limits, output } => {
                commands::dcl_conformance_cmd(gadget, &limits, &output)
            }
        },
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gadgetnet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
