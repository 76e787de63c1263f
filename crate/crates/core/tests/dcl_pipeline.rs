//! End-to-end properties of the DCL backend: bisimulation with the planar
//! network, in-weight preservation and graph serialization.

use gadgetnet::compiler::compile_planar;
use gadgetnet::dcl::{compile_dcl, dcl_observe, dcl_run, realize, ConstraintGraph, DclOutcome};
use gadgetnet::network::{simulate, SimConfig};
use gadgetnet::qbf::{enumerate_formulas, parse_qbf};

const MAX_STEPS: u64 = 1_000_000;

#[test]
fn dcl_runs_bisimulate_planar_networks() {
    for f in (1..=2).flat_map(|n| enumerate_formulas(n, 1)) {
        let planar = compile_planar(&f).unwrap();
        let trace = simulate(&planar.network, &SimConfig::default()).trace().clone();
        let dnet = realize(&planar.network, MAX_STEPS).unwrap();
        let run = dcl_run(&dnet, 1_000_000, false);
        assert_eq!(matches!(run.outcome, DclOutcome::Flips { .. }), f.evaluate(), "{f}");
        assert_eq!(run.moves(), trace.moves(), "{f}");
        for w in run.events.windows(2) {
            assert_eq!((w[1].entry_step - w[0].entry_step) % 2, 0, "{f}: odd gap {w:?}");
        }
    }
}

#[test]
fn compiled_runs_preserve_in_weights() {
    for f in enumerate_formulas(1, 1) {
        let problem = compile_dcl(&f, MAX_STEPS).unwrap().problem;
        let g = &problem.graph;
        g.check_weights(&g.initial).unwrap();
        let mut violations = Vec::new();
        dcl_observe(&problem, 1_000_000, |step, _, next| {
            if let Err(e) = g.check_weights(next) {
                violations.push(format!("step {step}: {e}"));
            }
        });
        assert!(violations.is_empty(), "{f}: {violations:?}");
    }
}

#[test]
fn compiled_graphs_round_trip_through_json() {
    let f = parse_qbf("qbf 2 1\na 1\ne 2\n-2 0\n").unwrap();
    let g = compile_dcl(&f, MAX_STEPS).unwrap().problem.graph;
    let text = serde_json::to_string(&g.to_json()).unwrap();
    let back = ConstraintGraph::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back, g);
}

#[test]
fn forall_exists_regression() {
    // the counterexample to the earlier DCL proof is still decided correctly
    let f = parse_qbf("qbf 2 1\na 1\ne 2\n-2 0\n").unwrap();
    let d = compile_dcl(&f, MAX_STEPS).unwrap();
    assert!(matches!(dcl_run(&d, 1_000_000, false).outcome, DclOutcome::Flips { .. }));
}
