//! DCL fragments for the Switch, Reversible Fan-in and A/BA Crossover.

use std::collections::HashMap;

use thiserror::Error;

use super::builder::{DclBuilder, Fragment, FragmentBuilder};
use super::conformance::{Direction, Harness};
use super::graph::{Color, VertexKind};
use crate::gadgets::{GadgetKind, Traversal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DclGadgetError {
    #[error("no DCL construction for {0}")]
    Unsupported(GadgetKind),
    #[error("history cannot be realized: {0}")]
    Unrealizable(String),
}

/// Fan-in: a single OR vertex; `c` points in at rest.
pub fn fanin() -> Fragment {
    let mut b = FragmentBuilder::new("ReversibleFanIn");
    b.vertex("or", VertexKind::Or);
    b.port("a", "or", false);
    b.port("b", "or", false);
    b.port("c", "or", true);
    b.finish()
}

/// Switch. Test splits at `split` into two reds that reach the gates `gate_t`
/// and `gate_f`; a gate passes when its other red arrives in the same step.
/// The Set path splits at `x1`, leaving `left` bouncing at `gate_t`, and joins
/// with `right` at `x2`, which stops it bouncing at `gate_f`.
pub fn switch() -> Fragment {
    let mut b = FragmentBuilder::new("Switch");
    for (name, kind) in [
        ("x1", VertexKind::And),
        ("mid", VertexKind::Deg2),
        ("x2", VertexKind::And),
        ("split", VertexKind::And),
        ("gate_t", VertexKind::And),
        ("gate_f", VertexKind::And),
        ("out_t", VertexKind::Deg2),
        ("out_f", VertexKind::Deg2),
    ] {
        b.vertex(name, kind);
    }
    b.port("Set", "x1", false);
    b.edge("set.1", Color::Red, "mid", "x1");
    b.edge("set.2", Color::Red, "x2", "mid");
    b.port("Out", "x2", true);
    b.edge("left", Color::Red, "gate_t", "x1");
    // in phase: points at gate_f on odd steps
    b.bouncing("right", Color::Red, "gate_f", "x2");
    b.port("Test", "split", false);
    b.edge("test.t", Color::Red, "gate_t", "split");
    b.edge("test.f", Color::Red, "gate_f", "split");
    b.edge("gate_t.out", Color::Blue, "out_t", "gate_t");
    b.edge("gate_f.out", Color::Blue, "out_f", "gate_f");
    b.port("T-Out", "out_t", true);
    b.port("F-Out", "out_f", true);
    b.finish()
}

/// A/BA Crossover.
///
/// B's path runs through an embedded Switch `r` from Set to Out, so the Switch
/// routes A by whether B has passed. Fresh, A leaves the Switch at F-Out and
/// shares B's path from the merge `v` to the split `w`, where the two signals
/// arrive in opposite phase and the keyed gates `gb` and `ga` separate them.
/// After B, A leaves at T-Out, runs backward over B's path from `z` to `zp`,
/// and exits through the key `zkey`, which B left captured at `zp`; the other
/// half bounces between `zp` and `y`.
pub fn crossover() -> Fragment {
    // path lengths, each at least one edge
    const L: [usize; 12] = [2, 1, 2, 1, 2, 1, 1, 2, 2, 2, 1, 2];
    let mut b = DclBuilder::new();
    let sw = switch();
    let mut j = HashMap::new();
    for p in sw.port_names() {
        j.insert(p.clone(), b.joint(&format!("r.{p}.joint")));
    }
    b.add_fragment("r", &sw, &j);
    let s_a = b.joint("A.stub");
    let s_b = b.joint("B.stub");
    let s_ua = b.joint("a.stub");
    let s_ub = b.joint("b.stub");
    let y = b.vertex("y", VertexKind::And);
    let zp = b.vertex("zp", VertexKind::And);
    let z = b.vertex("z", VertexKind::Or);
    let v = b.vertex("v", VertexKind::Or);
    let w = b.vertex("w", VertexKind::And);
    let gb = b.vertex("gb", VertexKind::And);
    let ga = b.vertex("ga", VertexKind::And);
    let h = b.vertex("h", VertexKind::And);
    let m = b.vertex("m", VertexKind::Or);
    let port_b = b.path("B", s_b, y, L[0], Color::Blue)[0];
    b.edge("yz", Color::Red, zp, y);
    b.bounce_terminal("y.stop", y);
    b.path("zp.z", zp, z, L[1], Color::Blue);
    b.path("z.set", z, j["Set"], L[2], Color::Blue);
    b.path("t.z", j["T-Out"], z, L[3], Color::Blue);
    b.path("out.v", j["Out"], v, L[4], Color::Blue);
    b.path("f.v", j["F-Out"], v, L[5], Color::Blue);
    b.path("v.w", v, w, L[6], Color::Blue);
    b.edge("w.b", Color::Red, gb, w);
    b.edge("w.a", Color::Red, ga, w);
    let port_ub = *b.path("b", gb, s_ub, L[7], Color::Blue).last().expect("path");
    b.path("ga.m", ga, m, L[8], Color::Blue);
    b.path("h.m", h, m, L[9], Color::Blue);
    let port_ua = *b.path("a", m, s_ua, L[10], Color::Blue).last().expect("path");
    let port_a = b.path("A", s_a, j["Test"], L[11], Color::Blue)[0];
    // bouncing keys; `gb.key` starts pointing at its anchor
    let keys = [
        (b.bounce_terminal("gb.key", gb), true),
        (b.bounce_terminal("ga.key", ga), false),
        (b.edge("zkey", Color::Red, h, zp), false),
        (b.bounce_terminal("h.key", h), false),
    ];
    for (k, away) in keys {
        b.graph.initial.flipped[k] = true;
        if away {
            b.graph.initial.toward_v[k] = !b.graph.initial.toward_v[k];
        }
    }
    let ports = vec![
        ("A".into(), port_a, s_a),
        ("B".into(), port_b, s_b),
        ("a".into(), port_ua, s_ua),
        ("b".into(), port_ub, s_ub),
    ];
    Fragment::from_graph("AbaCrossover", b.finish(), ports)
}

const SWITCH_DATA: &str = include_str!("../../data/dcl/switch.json");
const FANIN_DATA: &str = include_str!("../../data/dcl/fanin.json");
const CROSSOVER_DATA: &str = include_str!("../../data/dcl/crossover.json");

/// Fresh fragment for a framework gadget, loaded from the checked-in data files.
pub fn fresh(kind: GadgetKind) -> Result<Fragment, DclGadgetError> {
    let text = match kind {
        GadgetKind::Switch => SWITCH_DATA,
        GadgetKind::ReversibleFanIn => FANIN_DATA,
        GadgetKind::AbaCrossover => CROSSOVER_DATA,
        _ => return Err(DclGadgetError::Unsupported(kind)),
    };
    let value: serde_json::Value = serde_json::from_str(text).expect("fragment data is valid JSON");
    Ok(Fragment::from_json(&value).expect("fragment data is a valid fragment"))
}

/// Fragment for `kind` in the state reached after `history`, given as
/// (entry, exit) port names. Entries happen on even steps, so the returned
/// state is the one at the even step after the last exit.
pub fn build_dcl_gadget(kind: GadgetKind, history: &[(String, String)]) -> Result<Fragment, DclGadgetError> {
    let frag = fresh(kind)?;
    if history.is_empty() {
        return Ok(frag);
    }
    let harness = Harness::new(&frag, history).map_err(DclGadgetError::Unrealizable)?;
    let run = harness.run(100_000);
    let mut step = None;
    for (i, (p, q)) in history.iter().enumerate() {
        let ok = |idx: usize, port: &str, d: Direction| {
            run.events.get(idx).is_some_and(|e| e.port == port && e.direction == d)
        };
        if !ok(2 * i, p, Direction::Entry) || !ok(2 * i + 1, q, Direction::Exit) {
            return Err(DclGadgetError::Unrealizable(format!("{p}->{q} is not traversed")));
        }
        step = Some(run.events[2 * i + 1].step + 1);
    }
    let step = step.expect("non-empty history") as usize;
    let mut out = frag.clone();
    out.graph.initial = harness.fragment_state(&run.states[step]);
    Ok(out)
}

/// History from template traversals, named by the kind's canonical ports.
pub fn named_history(kind: GadgetKind, history: &[Traversal]) -> Vec<(String, String)> {
    let ports = kind.ports();
    history.iter().map(|t| (ports[t.entry].to_string(), ports[t.exit].to_string())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcl::conformance::check_sequence;

    fn seq(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    fn durations(frag: &Fragment, pairs: &[(&str, &str)]) -> Vec<u64> {
        let report = check_sequence(frag, &seq(pairs), 10_000);
        assert!(report.passed(), "{pairs:?}: {:?}", report.mismatches);
        report.durations.iter().map(|d| d.2).collect()
    }

    #[test]
    fn fanin_takes_two_steps() {
        let f = fanin();
        assert_eq!(durations(&f, &[("a", "c")]), vec![2, 2]);
        assert_eq!(durations(&f, &[("b", "c")]), vec![2, 2]);
    }

    #[test]
    fn switch_takes_four_steps() {
        let f = switch();
        assert_eq!(durations(&f, &[("Test", "F-Out")]), vec![4, 4]);
        assert_eq!(durations(&f, &[("Set", "Out"), ("Test", "T-Out")]), vec![4; 4]);
    }

    #[test]
    fn switch_after_set_reports_true() {
        let f = build_dcl_gadget(GadgetKind::Switch, &seq(&[("Set", "Out")])).unwrap();
        assert_eq!(durations(&f, &[("Test", "T-Out")]), vec![4, 4]);
    }

    #[test]
    fn crossover_traversals_are_even() {
        let f = crossover();
        for pairs in [&[("A", "a")][..], &[("B", "b")], &[("B", "b"), ("A", "a")]] {
            assert!(durations(&f, pairs).iter().all(|d| d % 2 == 0), "{pairs:?}");
        }
        let after = build_dcl_gadget(GadgetKind::AbaCrossover, &seq(&[("A", "a")])).unwrap();
        assert!(durations(&after, &[("a", "A")]).iter().all(|d| d % 2 == 0));
    }

    #[test]
    fn fragments_have_blue_ports_and_valid_vertices() {
        for f in [fanin(), switch(), crossover()] {
            for name in f.port_names() {
                let (e, _) = f.port(&name).unwrap();
                assert_eq!(f.graph.edges[e].color, Color::Blue, "{} {name}", f.name);
            }
            let g = Harness::new(&f, &[]).unwrap().graph;
            g.check_structure().unwrap();
        }
    }

    #[test]
    fn data_files_match_the_constructions() {
        assert_eq!(fresh(GadgetKind::Switch).unwrap(), switch());
        assert_eq!(fresh(GadgetKind::ReversibleFanIn).unwrap(), fanin());
        assert_eq!(fresh(GadgetKind::AbaCrossover).unwrap(), crossover());
    }

    #[test]
    fn non_framework_kind_is_unsupported() {
        assert!(matches!(fresh(GadgetKind::Spinner3), Err(DclGadgetError::Unsupported(GadgetKind::Spinner3))));
    }

    #[test]
    fn untraversable_history_is_unrealizable() {
        let err = build_dcl_gadget(GadgetKind::Switch, &seq(&[("Test", "T-Out")])).unwrap_err();
        assert!(matches!(err, DclGadgetError::Unrealizable(_)));
    }
}
