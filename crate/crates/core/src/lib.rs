//! Reversible deterministic gadget networks.
//!
//! - [`qbf`]: quantified Boolean formulas and the brute-force oracle.
//! - [`gadgets`]: gizmo and FSM gadget behaviors and the gadget catalog.
//! - [`network`]: networks, single-signal simulation and edge-usage analysis.
//! - [`compiler`]: the QBF to gadget-network reduction and gadget substitution backends.
//! - [`dcl`]: Deterministic Constraint Logic and its backend for compiled networks.

pub mod compiler;
pub mod dcl;
pub mod gadgets;
pub mod network;
pub mod qbf;

pub use compiler::{compile, Mode};
pub use dcl::{compile_dcl, dcl_decide, ConstraintGraph, DclOutcome, DclProblem};
pub use gadgets::{GadgetKind, GadgetState, GadgetTemplate, Traversal};
pub use network::{simulate, Network, NetworkBuilder, Outcome, PortRef, SimConfig, Trace};
pub use qbf::{parse_qbf, QbfFormula};
