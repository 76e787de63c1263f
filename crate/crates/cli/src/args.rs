//! Command-line syntax.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gadgetnet::GadgetKind;

#[derive(Debug, Parser)]
#[command(name = "gadgetnet", version, about = "Deterministic gadget networks and the QBF reduction to them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a formula file with the brute-force oracle; prints TRUE or FALSE.
    Eval { file: PathBuf },
    /// Compile a formula to a gadget network (or a constraint graph for `--backend dcl`).
    Compile {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate a compiled formula, or a network JSON file, and report the outcome.
    Simulate {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check the pipeline against the oracle on a formula file, a corpus
    /// directory of `.qbf` files, an enumerated corpus or random formulas.
    Verify {
        path: Option<PathBuf>,
        /// Also verify every formula with N variables and at most M clauses (`N` or `N:M`, M defaults to 1).
        #[arg(long, value_name = "N[:M]")]
        enumerate: Option<String>,
        /// Also verify this many random formulas drawn from `--seed`.
        #[arg(long, value_name = "COUNT")]
        random: Option<usize>,
        /// Variables per random formula.
        #[arg(long, default_value_t = 3)]
        random_vars: usize,
        /// Maximum clauses per random formula.
        #[arg(long, default_value_t = 3)]
        random_clauses: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write the simulation trace of a compiled formula.
    Trace {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run gadget conformance suites for the library or a backend.
    Conformance {
        /// Restrict to one framework gadget (Switch, ReversibleFanIn, AbaCrossover).
        #[arg(long)]
        gadget: Option<GadgetKind>,
        #[arg(long, value_enum, default_value_t = BackendArg::None)]
        backend: BackendArg,
        /// Random closure sequences per library gadget.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        limits: Limits,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Deterministic Constraint Logic tools.
    Dcl {
        #[command(subcommand)]
        command: DclCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum DclCommand {
    /// Apply the flip rule to a constraint graph JSON file.
    Step {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        steps: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Decide whether the target edge ever flips.
    Decide {
        file: PathBuf,
        /// Target edge name; defaults to the file's `target` field.
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        limits: Limits,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check the DCL gadget fragments against their abstract templates.
    Conformance {
        #[arg(long)]
        gadget: Option<GadgetKind>,
        #[command(flatten)]
        limits: Limits,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Abstract,
    Planar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    None,
    Spinner3,
    L2tRotate,
    Dcl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Args)]
pub struct Limits {
    #[arg(long, env = "GADGETNET_MAX_STEPS", default_value_t = 10_000_000)]
    pub max_steps: u64,
    /// Configurations remembered for cycle detection.
    #[arg(long, env = "GADGETNET_CYCLE_MEMORY", default_value_t = 1_000_000)]
    pub cycle_memory: usize,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct RunArgs {
    /// Defaults to planar for the dcl backend and abstract otherwise.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum, default_value_t = BackendArg::None)]
    pub backend: BackendArg,
    #[command(flatten)]
    pub limits: Limits,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
