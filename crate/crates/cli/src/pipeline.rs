//! Run configuration and the compile/simulate pipeline shared by the commands.

use std::fmt;
use std::path::Path;

use gadgetnet::compiler::{substitute_backend, Backend};
use gadgetnet::dcl::{dcl_run, realize, DclNetwork, DclOutcome, DclRun};
use gadgetnet::network::{network_from_json, StopReason};
use gadgetnet::{compile, parse_qbf, simulate, Mode, Network, Outcome, QbfFormula, SimConfig};
use serde_json::{json, Value};

use crate::args::{BackendArg, Limits, ModeArg, RunArgs};

/// A command failure, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable or malformed input (exit 2).
    Usage(String),
    /// A verification or conformance failure (exit 1).
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

pub fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub mode: Mode,
    pub backend: BackendArg,
    pub limits: Limits,
}

impl RunConfig {
    /// Resolve the default mode and reject unsupported combinations.
    pub fn new(args: &RunArgs) -> Result<RunConfig, CliError> {
        let mode = match (args.mode, args.backend) {
            (Some(ModeArg::Abstract), _) => Mode::Abstract,
            (Some(ModeArg::Planar), BackendArg::L2tRotate) => {
                return Err(CliError::Usage(
                    "unsupported combination: --backend l2t-rotate has no crossover construction and requires --mode abstract"
                        .into(),
                ))
            }
            (Some(ModeArg::Planar), _) | (None, BackendArg::Dcl) => Mode::Planar,
            (None, _) => Mode::Abstract,
        };
        Ok(RunConfig { mode, backend: args.backend, limits: args.limits })
    }

    pub fn sim_config(&self, record_trace: bool) -> SimConfig {
        SimConfig { max_steps: self.limits.max_steps, cycle_memory: self.limits.cycle_memory, record_trace }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "mode": self.mode.to_string(),
            "backend": backend_name(self.backend),
            "max_steps": self.limits.max_steps,
            "cycle_memory": self.limits.cycle_memory,
        })
    }
}

pub fn backend_name(b: BackendArg) -> &'static str {
    match b {
        BackendArg::None => "none",
        BackendArg::Spinner3 => "spinner3",
        BackendArg::L2tRotate => "l2t-rotate",
        BackendArg::Dcl => "dcl",
    }
}

/// The artifact a formula compiles to under a configuration.
pub enum Built {
    Gadgets(Network),
    Dcl(DclNetwork),
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn read_formula(path: &Path) -> Result<QbfFormula, CliError> {
    parse_qbf(&read_file(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn build(f: &QbfFormula, config: &RunConfig) -> Result<Built, CliError> {
    let compiled = compile(f, config.mode).map_err(usage)?;
    build_network(compiled.network, config)
}

/// Apply the configured backend to an already built network.
pub fn build_network(net: Network, config: &RunConfig) -> Result<Built, CliError> {
    Ok(match config.backend {
        BackendArg::None => Built::Gadgets(net),
        BackendArg::Spinner3 => Built::Gadgets(substitute_backend(&net, Backend::Spinner3).map_err(usage)?),
        BackendArg::L2tRotate => Built::Gadgets(substitute_backend(&net, Backend::L2tRotate).map_err(usage)?),
        BackendArg::Dcl => Built::Dcl(realize(&net, config.limits.max_steps).map_err(usage)?),
    })
}

/// Load the input of `simulate`: a formula file, or a network JSON file
/// when the name ends in `.json`.
pub fn build_input(path: &Path, config: &RunConfig) -> Result<(Option<QbfFormula>, Built), CliError> {
    if path.extension().is_some_and(|e| e == "json") {
        let net =
            network_from_json(&read_file(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Ok((None, build_network(net, config)?))
    } else {
        let f = read_formula(path)?;
        let built = build(&f, config)?;
        Ok((Some(f), built))
    }
}

/// Outcome of running a built artifact.
pub enum Run {
    Gadgets(Outcome),
    Dcl(DclRun),
}

pub fn run(built: &Built, config: &RunConfig, record: bool) -> Run {
    match built {
        Built::Gadgets(net) => Run::Gadgets(simulate(net, &config.sim_config(record))),
        Built::Dcl(d) => Run::Dcl(dcl_run(d, config.limits.cycle_memory, record)),
    }
}

/// Whether the target was reached: `Some(true)`/`Some(false)` for a
/// conclusive run, `None` for a step limit, `Err` for a broken network.
pub fn verdict(run: &Run) -> Result<Option<bool>, String> {
    match run {
        Run::Gadgets(Outcome::Reached { .. }) | Run::Dcl(DclRun { outcome: DclOutcome::Flips { .. }, .. }) => {
            Ok(Some(true))
        }
        Run::Gadgets(Outcome::Cycled { .. }) | Run::Dcl(DclRun { outcome: DclOutcome::Cycled { .. }, .. }) => {
            Ok(Some(false))
        }
        Run::Gadgets(Outcome::StepLimit { .. }) | Run::Dcl(DclRun { outcome: DclOutcome::StepLimit { .. }, .. }) => {
            Ok(None)
        }
        Run::Gadgets(Outcome::Unspecified { reason, .. }) => Err(match reason {
            StopReason::UnspecifiedTraversal => "unspecified traversal".into(),
            StopReason::OpenPort => "signal left through an open port".into(),
        }),
    }
}

/// Outcome as a JSON object tagged by `outcome`.
pub fn outcome_json(built: &Built, run: &Run) -> Value {
    match (built, run) {
        (Built::Gadgets(net), Run::Gadgets(out)) => match out {
            Outcome::Reached { step, .. } => json!({ "outcome": "reached", "step": step }),
            Outcome::Cycled { first_repeat, period, .. } => {
                json!({ "outcome": "cycled", "first_repeat": first_repeat, "period": period })
            }
            Outcome::StepLimit { .. } => json!({ "outcome": "step_limit" }),
            Outcome::Unspecified { instance, port, step, reason, .. } => json!({
                "outcome": "unspecified",
                "port": net.port_name(gadgetnet::PortRef::new(*instance, *port)),
                "step": step,
                "reason": match reason {
                    StopReason::UnspecifiedTraversal => "unspecified_traversal",
                    StopReason::OpenPort => "open_port",
                },
            }),
        },
        (_, Run::Dcl(r)) => serde_json::to_value(r.outcome).expect("outcome serializes"),
        _ => unreachable!("run matches its artifact"),
    }
}

/// One-line description of an outcome.
pub fn outcome_text(outcome: &Value) -> String {
    let get = |k: &str| outcome.get(k).map(|v| v.to_string()).unwrap_or_default();
    match outcome["outcome"].as_str().unwrap_or("") {
        "reached" => format!("reached the target at step {}", get("step")),
        "flips" => format!("target edge flips at step {}", get("step")),
        "cycled" => format!("cycled: first repeat at step {}, period {}", get("first_repeat"), get("period")),
        "step_limit" => "step limit reached (inconclusive)".to_string(),
        "unspecified" => format!("stopped at {} on step {}: {}", get("port"), get("step"), get("reason")),
        other => other.to_string(),
    }
}
