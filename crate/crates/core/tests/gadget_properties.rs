//! Properties of gadget templates: gizmo round trips, prefix closure,
//! determinism and the 3-spinner semantics.

use std::sync::Arc;

use gadgetnet::gadgets::conformance::base_prefixes;
use gadgetnet::gadgets::{
    fsm_in_state, make_library_gadget, time_reverse, Behavior, GadgetKind, GadgetState, GadgetTemplate, SequenceSpec,
    Traversal,
};
use proptest::prelude::*;

/// Every framework gizmo in every base-prefix state.
fn library_gizmos() -> Vec<Arc<GadgetTemplate>> {
    let mut out = Vec::new();
    for kind in [GadgetKind::Switch, GadgetKind::ReversibleFanIn, GadgetKind::AbaCrossover] {
        let fresh = make_library_gadget(kind, None, &[]).unwrap();
        for prefix in base_prefixes(&fresh) {
            out.push(Arc::new(fresh.after(&prefix).unwrap()));
        }
    }
    out
}

/// Follow `entries` from the initial state, skipping unspecified entries,
/// and return the implemented traversals.
fn walk(t: &GadgetTemplate, entries: &[usize]) -> Vec<Traversal> {
    let mut state = t.initial_state();
    let mut seq = Vec::new();
    for &e in entries {
        if let Ok((next, exit)) = t.step(state, e % t.num_ports()) {
            seq.push(Traversal::new(e % t.num_ports(), exit));
            state = next;
        }
    }
    seq
}

/// Drive `seq` from `state`, returning the final state if every traversal
/// is reproduced.
fn drive(t: &GadgetTemplate, mut state: GadgetState, seq: &[Traversal]) -> Option<GadgetState> {
    for tr in seq {
        let (next, exit) = t.step(state, tr.entry).ok()?;
        if exit != tr.exit {
            return None;
        }
        state = next;
    }
    Some(state)
}

fn arb_gizmo() -> impl Strategy<Value = Arc<GadgetTemplate>> {
    prop::sample::select(library_gizmos())
}

proptest! {
    #[test]
    fn gizmo_round_trip_restores_history(t in arb_gizmo(), entries in prop::collection::vec(0usize..5, 0..16)) {
        let x = walk(&t, &entries);
        let start = t.initial_state();
        let mid = drive(&t, start, &x).unwrap();
        let end = drive(&t, mid, &time_reverse(&x));
        prop_assert!(end.is_some(), "reverse of {:?} not implemented", x);
        prop_assert_eq!(t.reduced_history(end.unwrap()), t.reduced_history(start));
    }

    #[test]
    fn implemented_sets_are_prefix_closed(
        t in arb_gizmo(),
        entries in prop::collection::vec(0usize..5, 0..12),
        tail in prop::collection::vec((0usize..5, 0usize..5), 0..3),
    ) {
        let mut s = walk(&t, &entries);
        s.extend(tail.into_iter().map(|(a, b)| Traversal::new(a % t.num_ports(), b % t.num_ports())));
        if t.implements(&s) {
            for k in 0..=s.len() {
                prop_assert!(t.implements(&s[..k]), "prefix {} of {:?}", k, s);
            }
        }
    }

    #[test]
    fn step_is_deterministic(t in arb_gizmo(), entries in prop::collection::vec(0usize..5, 0..12), e in 0usize..5) {
        let seq = walk(&t, &entries);
        let state = drive(&t, t.initial_state(), &seq).unwrap();
        let e = e % t.num_ports();
        prop_assert_eq!(t.step(state, e), t.step(state, e));
    }

    #[test]
    fn spinner_exits_alternate(ccw_first in any::<bool>(), entries in prop::collection::vec(0usize..3, 1..20)) {
        let t = fsm_in_state(GadgetKind::Spinner3, None, if ccw_first { "ccw" } else { "cw" }).unwrap();
        let mut state = t.initial_state();
        for (i, &e) in entries.iter().enumerate() {
            let (next, exit) = t.step(state, e).unwrap();
            let clockwise = (i % 2 == 0) != ccw_first;
            prop_assert_eq!(exit, (e + if clockwise { 1 } else { 2 }) % 3);
            state = next;
        }
    }
}

/// A gizmo whose base sequences are every length-`depth` sequence that
/// alternates `a_i → a_{i+1}` and `a_i → a_{i-1}`, starting clockwise.
fn spinner_gizmo(depth: usize) -> GadgetTemplate {
    let mut seqs: Vec<Vec<Traversal>> = vec![Vec::new()];
    for k in 0..depth {
        let offset = if k % 2 == 0 { 1 } else { 2 };
        seqs = seqs
            .into_iter()
            .flat_map(|s| {
                (0..3).map(move |e| {
                    let mut s = s.clone();
                    s.push(Traversal::new(e, (e + offset) % 3));
                    s
                })
            })
            .collect();
    }
    let ports = GadgetKind::Spinner3.ports().iter().map(|p| p.to_string()).collect();
    let spec = SequenceSpec::new(ports, seqs).unwrap();
    GadgetTemplate::new("spinner gizmo", None, Behavior::Gizmo(spec), vec![0, 1, 2], Vec::new()).unwrap()
}

#[test]
fn spinner_fsm_agrees_with_sequence_gizmo() {
    const DEPTH: usize = 8;
    let fsm = make_library_gadget(GadgetKind::Spinner3, None, &[]).unwrap();
    let gizmo = spinner_gizmo(DEPTH);
    let mut compared = 0usize;
    for code in 0..3usize.pow(DEPTH as u32) {
        let (mut fs, mut gs) = (fsm.initial_state(), gizmo.initial_state());
        let mut c = code;
        for _ in 0..DEPTH {
            let e = c % 3;
            c /= 3;
            let Ok((gn, gexit)) = gizmo.step(gs, e) else { break };
            let (fnext, fexit) = fsm.step(fs, e).unwrap();
            assert_eq!(fexit, gexit, "entry sequence code {code}");
            (fs, gs) = (fnext, gn);
            compared += 1;
        }
    }
    assert_eq!(compared, DEPTH * 3usize.pow(DEPTH as u32));
}

#[test]
fn closure_examples() {
    let cases: [(GadgetKind, (&str, &str), (&str, &str)); 3] = [
        (GadgetKind::Switch, ("Set", "Out"), ("Test", "F-Out")),
        (GadgetKind::ReversibleFanIn, ("a", "c"), ("b", "c")),
        (GadgetKind::Spinner3, ("a1", "a2"), ("a3", "a1")),
    ];
    for (kind, x, y) in cases {
        let t = make_library_gadget(kind, None, &[]).unwrap();
        let x = t.traversals(&[x]).unwrap();
        let y = t.traversals(&[y]).unwrap();
        assert_eq!(t.reversal_closure_holds(&x, &y), Ok(true), "{kind}");
    }
}
