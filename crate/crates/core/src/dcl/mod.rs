//! Deterministic Constraint Logic.
//!
//! - [`graph`]: constraint graphs and the synchronous two-phase flip rule.
//! - [`builder`]: composing fragments, wires and terminals into one graph.
//! - [`gadgets`]: DCL realizations of the Switch, Reversible Fan-in and A/BA Crossover.
//! - [`conformance`]: driving fragments against gadget templates.
//! - [`compile`]: the DCL backend for compiled QBF networks.

pub mod builder;
pub mod compile;
pub mod conformance;
pub mod gadgets;
pub mod graph;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use builder::{DclBuilder, Fragment, FragmentBuilder};
pub use compile::{compile_dcl, dcl_run, realize, DclCompileError, DclEvent, DclNetwork, DclRun};
pub use conformance::{dcl_conformance, dcl_suite, DclConformanceReport, DclMismatch, SequenceReport};
pub use gadgets::{build_dcl_gadget, DclGadgetError};
pub use graph::{Color, ConstraintGraph, DclEdge, DclState, GraphError, Vertex, VertexKind};

/// Does `target` ever flip, starting from the graph's initial state?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DclProblem {
    pub graph: ConstraintGraph,
    pub target: usize,
    pub max_steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DclOutcome {
    /// The target first flips at this step.
    Flips {
        step: u64,
    },
    /// The full state repeated before the target flipped.
    Cycled {
        first_repeat: u64,
        period: u64,
    },
    StepLimit {
        steps: u64,
    },
}

/// One synchronous step of the flip rule.
pub fn dcl_step(graph: &ConstraintGraph, state: &DclState) -> DclState {
    graph.step(state)
}

/// Decide whether the target flips; states are remembered for cycle detection
/// up to `cycle_memory` entries.
pub fn dcl_decide(problem: &DclProblem, cycle_memory: usize) -> DclOutcome {
    dcl_observe(problem, cycle_memory, |_, _, _| {})
}

/// [`dcl_decide`], calling `observe(step, before, after)` on every step.
pub fn dcl_observe(
    problem: &DclProblem,
    cycle_memory: usize,
    mut observe: impl FnMut(u64, &DclState, &DclState),
) -> DclOutcome {
    let g = &problem.graph;
    let mut state = g.initial.clone();
    let mut seen: HashMap<DclState, u64> = HashMap::new();
    for step in 1..=problem.max_steps {
        if seen.len() < cycle_memory {
            seen.insert(state.clone(), step - 1);
        }
        let next = g.step(&state);
        observe(step, &state, &next);
        state = next;
        if state.flipped[problem.target] {
            return DclOutcome::Flips { step };
        }
        if let Some(&first) = seen.get(&state) {
            return DclOutcome::Cycled { first_repeat: first, period: step - first };
        }
    }
    DclOutcome::StepLimit { steps: problem.max_steps }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(len: usize, seeded: bool) -> DclProblem {
        let mut g = ConstraintGraph::new();
        let vs: Vec<usize> = (0..=len).map(|i| g.add_vertex(format!("v{i}"), VertexKind::Deg2)).collect();
        for i in 1..=len {
            g.add_edge(format!("e{i}"), Color::Blue, vs[i], vs[i - 1]);
        }
        g.initial.flipped[0] = seeded;
        DclProblem { graph: g, target: len - 1, max_steps: 100 }
    }

    #[test]
    fn seeded_path_flips_target_at_step_three() {
        assert_eq!(dcl_decide(&path(3, true), 1000), DclOutcome::Flips { step: 3 });
    }

    #[test]
    fn unseeded_graph_is_a_fixed_point() {
        assert_eq!(dcl_decide(&path(3, false), 1000), DclOutcome::Cycled { first_repeat: 0, period: 1 });
    }

    #[test]
    fn step_limit_is_reported() {
        let mut p = path(3, true);
        p.max_steps = 2;
        assert_eq!(dcl_decide(&p, 1000), DclOutcome::StepLimit { steps: 2 });
    }

    #[test]
    fn isolated_bouncing_edge_has_period_two() {
        let mut g = ConstraintGraph::new();
        let (a, b, c, d) = (
            g.add_vertex("a", VertexKind::Deg2),
            g.add_vertex("b", VertexKind::Deg2),
            g.add_vertex("c", VertexKind::Deg2),
            g.add_vertex("d", VertexKind::Deg2),
        );
        let bounce = g.add_edge("bounce", Color::Blue, a, b);
        g.initial.flipped[bounce] = true;
        let quiet = g.add_edge("quiet", Color::Blue, c, d);
        let s1 = dcl_step(&g, &g.initial);
        let s2 = dcl_step(&g, &s1);
        assert_ne!(s1, g.initial);
        assert_eq!(s2, g.initial);
        let p = DclProblem { graph: g.clone(), target: quiet, max_steps: 100 };
        assert_eq!(dcl_decide(&p, 1000), DclOutcome::Cycled { first_repeat: 0, period: 2 });
        // the endpoint it points away from is left with no in-weight
        assert!(g.check_weights(&g.initial).is_err());
    }

    #[test]
    fn outcome_json_is_tagged() {
        let v = serde_json::to_value(DclOutcome::Flips { step: 3 }).unwrap();
        assert_eq!(v, serde_json::json!({"outcome": "flips", "step": 3}));
    }

    #[test]
    fn observer_sees_every_step() {
        let mut seen = Vec::new();
        let out = dcl_observe(&path(3, true), 1000, |step, _, _| seen.push(step));
        assert_eq!(out, DclOutcome::Flips { step: 3 });
        assert_eq!(seen, vec![1, 2, 3]);
    }
}
