//! Driving DCL fragments through traversal sequences and comparing them with gadget templates.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::builder::{DclBuilder, Fragment};
use super::gadgets::{build_dcl_gadget, fresh, DclGadgetError};
use super::graph::{ConstraintGraph, DclState};
use crate::gadgets::{make_library_gadget, Behavior, GadgetKind, GadgetTemplate, Traversal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Entry,
    Exit,
}

/// A port edge flipping into (entry) or out of (exit) the fragment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PortEvent {
    pub step: u64,
    pub port: String,
    pub direction: Direction,
}

/// A fragment wired for driving a traversal sequence.
///
/// The signal starts at a seeded terminal, enters the first entry port at
/// step 2, each exit is joined directly to the next entry, and the last exit
/// ends at a bounce terminal so the whole sequence then runs in reverse.
#[derive(Debug, Clone)]
pub struct Harness {
    pub graph: ConstraintGraph,
    /// Harness edge of each fragment edge.
    pub fragment_edges: Vec<usize>,
    /// Port name, port edge, joint vertex.
    pub ports: Vec<(String, usize, usize)>,
    /// The seeded terminal edge; the run ends when it flips back.
    pub start: Option<usize>,
}

impl Harness {
    /// `sequence` empty gives a quiet harness: every port closed by a terminal
    /// and nothing seeded.
    pub fn new(frag: &Fragment, sequence: &[(String, String)]) -> Result<Harness, String> {
        let mut b = DclBuilder::new();
        let mut joints = HashMap::new();
        for name in frag.port_names() {
            joints.insert(name.clone(), b.joint(&format!("joint.{name}")));
        }
        let base = b.graph.edges.len();
        let port_edges = b.add_fragment(&frag.name, frag, &joints);
        let fragment_edges = (base..base + frag.graph.edges.len()).collect();

        let mut used: HashMap<&str, ()> = HashMap::new();
        for (p, q) in sequence {
            for x in [p, q] {
                if frag.port(x).is_none() {
                    return Err(format!("unknown port {x}"));
                }
            }
            if used.insert(p.as_str(), ()).is_some() || (p != q && used.insert(q.as_str(), ()).is_some()) {
                return Err(format!("port reused in sequence at {p}->{q}"));
            }
        }
        let mut start = None;
        if let Some((first, _)) = sequence.first() {
            let j0 = b.joint("start.joint");
            b.path("start.wire", j0, joints[first], 1, super::Color::Blue);
            let e = b.bounce_terminal("start", j0);
            b.graph.initial.flipped[e] = true;
            start = Some(e);
        }
        // interior joints: exit i and entry i+1 share a vertex
        let mut merged: HashMap<String, String> = HashMap::new();
        for w in sequence.windows(2) {
            merged.insert(w[1].0.clone(), w[0].1.clone());
        }
        let last = sequence.last().map(|s| s.1.clone());
        for name in frag.port_names() {
            let j = joints[&name];
            let is_entry = sequence.iter().any(|(p, _)| *p == name);
            let is_exit = sequence.iter().any(|(_, q)| *q == name);
            if Some(&name) == last.as_ref() {
                b.bounce_terminal(&format!("end.{name}"), j);
            } else if is_entry || is_exit {
                // start wire or joined to a neighbour in the sequence
            } else if frag.port_points_inward(&name) {
                b.bounce_terminal(&format!("closed.{name}"), j);
            } else {
                b.source_terminal(&format!("closed.{name}"), j);
            }
        }
        let mut graph = b.finish();
        // join exit i to entry i+1 by moving the entry's port edge onto the exit's joint
        for (entry, exit) in &merged {
            let e = port_edges[entry];
            let (je, jx) = (joints[entry], joints[exit]);
            let edge = &mut graph.edges[e];
            if edge.u == je {
                edge.u = jx;
            } else {
                edge.v = jx;
            }
        }
        // the orphaned joints of merged entries carry no edges; drop them
        let isolated: Vec<usize> = merged.keys().map(|n| joints[n]).collect();
        let (graph, remap) = remove_isolated(graph, &isolated);
        let mut ports: Vec<(String, usize, usize)> = frag
            .port_names()
            .into_iter()
            .map(|n| {
                let j = merged.get(&n).map(|x| joints[x]).unwrap_or(joints[&n]);
                (n.clone(), port_edges[&n], remap[j])
            })
            .collect();
        ports.sort();
        Ok(Harness { graph, fragment_edges, ports, start })
    }

    fn event(&self, before: &DclState, after: &DclState, step: u64) -> Vec<PortEvent> {
        let mut out = Vec::new();
        for (name, e, joint) in &self.ports {
            if before.toward_v[*e] != after.toward_v[*e] {
                let direction = if self.graph.head(after, *e) == *joint { Direction::Exit } else { Direction::Entry };
                out.push(PortEvent { step, port: name.clone(), direction });
            }
        }
        out
    }

    /// Run until the signal is back at the start terminal or `max_steps`.
    pub fn run(&self, max_steps: u64) -> Run {
        let mut state = self.graph.initial.clone();
        let mut states = vec![state.clone()];
        let mut events = Vec::new();
        let mut end = None;
        let mut weight_error = None;
        for step in 1..=max_steps {
            let next = self.graph.step(&state);
            events.extend(self.event(&state, &next, step));
            if weight_error.is_none() {
                if let Err(e) = self.graph.check_weights(&next) {
                    weight_error = Some((step, e.to_string()));
                }
            }
            state = next;
            states.push(state.clone());
            if let Some(s) = self.start {
                if state.flipped[s] && self.graph.head(&state, s) != self.graph.edges[s].v {
                    end = Some(step);
                    break;
                }
            }
        }
        Run { events, states, end, weight_error }
    }

    /// Fragment-edge part of a harness state.
    pub fn fragment_state(&self, state: &DclState) -> DclState {
        DclState {
            toward_v: self.fragment_edges.iter().map(|&e| state.toward_v[e]).collect(),
            flipped: self.fragment_edges.iter().map(|&e| state.flipped[e]).collect(),
        }
    }
}

fn remove_isolated(mut g: ConstraintGraph, isolated: &[usize]) -> (ConstraintGraph, Vec<usize>) {
    let mut remap = Vec::with_capacity(g.vertices.len());
    let mut kept = Vec::new();
    for (v, vertex) in g.vertices.iter().enumerate() {
        if isolated.contains(&v) {
            remap.push(usize::MAX);
        } else {
            remap.push(kept.len());
            kept.push(vertex.clone());
        }
    }
    for e in &mut g.edges {
        e.u = remap[e.u];
        e.v = remap[e.v];
    }
    g.vertices = kept;
    (g, remap)
}

#[derive(Debug, Clone)]
pub struct Run {
    pub events: Vec<PortEvent>,
    pub states: Vec<DclState>,
    /// Step at which the start terminal edge flipped back.
    pub end: Option<u64>,
    /// First in-weight violation, if any.
    pub weight_error: Option<(u64, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DclMismatch {
    Exit { index: usize, expected: String, found: Option<String> },
    Parity { entry: String, exit: String, steps: u64 },
    Residual { edges: Vec<String> },
    InWeight { step: u64, detail: String },
    NoReturn { steps: u64 },
}

impl fmt::Display for DclMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DclMismatch::Exit { index, expected, found } => {
                write!(f, "event {index}: expected {expected}, found {}", found.as_deref().unwrap_or("nothing"))
            }
            DclMismatch::Parity { entry, exit, steps } => write!(f, "{entry}->{exit} took {steps} steps (odd)"),
            DclMismatch::Residual { edges } => write!(f, "state not restored: {}", edges.join(", ")),
            DclMismatch::InWeight { step, detail } => write!(f, "step {step}: {detail}"),
            DclMismatch::NoReturn { steps } => write!(f, "signal did not return within {steps} steps"),
        }
    }
}

/// Result of driving one closed sequence through a fragment.
#[derive(Debug, Clone, Serialize)]
pub struct SequenceReport {
    pub sequence: Vec<(String, String)>,
    pub events: Vec<PortEvent>,
    /// Steps of each traversal, counted from the entry flip to the step after the exit flip.
    pub durations: Vec<(String, String, u64)>,
    pub mismatches: Vec<DclMismatch>,
}

impl SequenceReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn label(e: &PortEvent) -> String {
    match e.direction {
        Direction::Entry => format!("enter {}", e.port),
        Direction::Exit => format!("exit {}", e.port),
    }
}

/// Drive `sequence` forward and back through `frag`, checking exits, even
/// durations and that the fragment ends as it would have without the signal.
pub fn check_sequence(frag: &Fragment, sequence: &[(String, String)], max_steps: u64) -> SequenceReport {
    let mut report = SequenceReport {
        sequence: sequence.to_vec(),
        events: Vec::new(),
        durations: Vec::new(),
        mismatches: Vec::new(),
    };
    let harness = match Harness::new(frag, sequence) {
        Ok(h) => h,
        Err(e) => {
            report.mismatches.push(DclMismatch::Exit { index: 0, expected: e, found: None });
            return report;
        }
    };
    let run = harness.run(max_steps);
    report.events = run.events.clone();
    let mut expected = Vec::new();
    for (p, q) in sequence {
        expected.push(format!("enter {p}"));
        expected.push(format!("exit {q}"));
    }
    for (p, q) in sequence.iter().rev() {
        expected.push(format!("enter {q}"));
        expected.push(format!("exit {p}"));
    }
    for (i, want) in expected.iter().enumerate() {
        let found = run.events.get(i).map(label);
        if found.as_ref() != Some(want) {
            report.mismatches.push(DclMismatch::Exit { index: i, expected: want.clone(), found });
            break;
        }
    }
    for pair in run.events.chunks(2) {
        if let [a, b] = pair {
            if a.direction == Direction::Entry && b.direction == Direction::Exit {
                let steps = b.step - a.step + 1;
                report.durations.push((a.port.clone(), b.port.clone(), steps));
                if steps % 2 == 1 {
                    report.mismatches.push(DclMismatch::Parity { entry: a.port.clone(), exit: b.port.clone(), steps });
                }
            }
        }
    }
    if let Some((step, detail)) = run.weight_error {
        report.mismatches.push(DclMismatch::InWeight { step, detail });
    }
    match run.end {
        None => report.mismatches.push(DclMismatch::NoReturn { steps: max_steps }),
        Some(end) if report.mismatches.is_empty() => {
            let quiet = Harness::new(frag, &[]).expect("quiet harness");
            let mut state = quiet.graph.initial.clone();
            for _ in 0..end {
                state = quiet.graph.step(&state);
            }
            let want = quiet.fragment_state(&state);
            let got = harness.fragment_state(&run.states[end as usize]);
            let edges: Vec<String> = (0..want.toward_v.len())
                .filter(|&e| want.toward_v[e] != got.toward_v[e] || want.flipped[e] != got.flipped[e])
                .map(|e| frag.graph.edges[e].name.clone())
                .collect();
            if !edges.is_empty() {
                report.mismatches.push(DclMismatch::Residual { edges });
            }
        }
        Some(_) => {}
    }
    report
}

/// Result of checking a fragment against an abstract gadget template.
#[derive(Debug, Clone, Serialize)]
pub struct DclConformanceReport {
    pub gadget: String,
    /// Traversals already applied to the fragment before these sequences.
    pub history: Vec<(String, String)>,
    /// Sequences the template itself does not implement, or port-name disagreements.
    pub template_errors: Vec<String>,
    pub sequences: Vec<SequenceReport>,
}

impl DclConformanceReport {
    pub fn passed(&self) -> bool {
        self.template_errors.is_empty() && self.sequences.iter().all(SequenceReport::passed)
    }

    pub fn failures(&self) -> usize {
        self.template_errors.len() + self.sequences.iter().filter(|s| !s.passed()).count()
    }
}

/// Drive each sequence through `frag` and compare with `template`: the
/// template must implement the sequence, and the fragment must produce its
/// exits with even durations and restore its state after the reversal.
pub fn dcl_conformance(
    frag: &Fragment,
    template: &GadgetTemplate,
    sequences: &[Vec<Traversal>],
    max_steps: u64,
) -> DclConformanceReport {
    let names = template.ports();
    let mut report = DclConformanceReport {
        gadget: template.name().to_string(),
        history: named(names, template.initial_history()),
        template_errors: Vec::new(),
        sequences: Vec::new(),
    };
    let mut frag_ports = frag.port_names();
    frag_ports.sort();
    let mut want_ports = names.to_vec();
    want_ports.sort();
    if frag_ports != want_ports {
        report.template_errors.push(format!("fragment ports {frag_ports:?} differ from {want_ports:?}"));
        return report;
    }
    for seq in sequences {
        let named_seq = named(names, seq);
        if !template.implements(seq) {
            report.template_errors.push(format!("template does not implement {named_seq:?}"));
            continue;
        }
        report.sequences.push(check_sequence(frag, &named_seq, max_steps));
    }
    report
}

fn named(names: &[String], seq: &[Traversal]) -> Vec<(String, String)> {
    seq.iter().map(|t| (names[t.entry].clone(), names[t.exit].clone())).collect()
}

/// Standard conformance suite for a framework gadget: every base sequence
/// from the fresh state, and from every state reached by a prefix of a base
/// sequence, every single traversal the template allows there.
pub fn dcl_suite(kind: GadgetKind, max_steps: u64) -> Result<Vec<DclConformanceReport>, DclGadgetError> {
    let template = make_library_gadget(kind, None, &[]).map_err(|e| DclGadgetError::Unrealizable(e.to_string()))?;
    let Behavior::Gizmo(spec) = template.behavior() else {
        return Err(DclGadgetError::Unsupported(kind));
    };
    let mut reports = vec![dcl_conformance(&fresh(kind)?, &template, spec.base_sequences(), max_steps)];
    let mut prefixes: Vec<Vec<Traversal>> = Vec::new();
    for base in spec.base_sequences() {
        for k in 0..=base.len() {
            let p = base[..k].to_vec();
            if !prefixes.contains(&p) {
                prefixes.push(p);
            }
        }
    }
    for p in prefixes {
        let after = template.after(&p).map_err(|e| DclGadgetError::Unrealizable(e.to_string()))?;
        let frag = build_dcl_gadget(kind, &named(template.ports(), &p))?;
        let singles: Vec<Vec<Traversal>> = (0..after.num_ports())
            .filter_map(|entry| {
                after.step(after.initial_state(), entry).ok().map(|(_, exit)| vec![Traversal::new(entry, exit)])
            })
            .collect();
        reports.push(dcl_conformance(&frag, &after, &singles, max_steps));
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcl::gadgets::crossover;

    fn seq(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn standard_suites_pass() {
        for kind in [GadgetKind::ReversibleFanIn, GadgetKind::Switch, GadgetKind::AbaCrossover] {
            for report in dcl_suite(kind, 10_000).unwrap() {
                assert!(report.passed(), "{kind} after {:?}: {report:?}", report.history);
            }
        }
    }

    #[test]
    fn fanin_reverse_restores_state() {
        let frag = fresh(GadgetKind::ReversibleFanIn).unwrap();
        let report = check_sequence(&frag, &seq(&[("a", "c")]), 100);
        assert!(report.passed());
        let labels: Vec<String> = report.events.iter().map(label).collect();
        assert_eq!(labels, ["enter a", "exit c", "enter c", "exit a"]);
    }

    #[test]
    fn misphased_bouncing_edge_breaks_parity() {
        let mut frag = crossover();
        let e = frag.graph.edge_index("h.key.end").unwrap();
        assert!(frag.graph.initial.flipped[e]);
        frag.graph.initial.toward_v[e] = !frag.graph.initial.toward_v[e];
        let report = check_sequence(&frag, &seq(&[("A", "a")]), 10_000);
        assert!(!report.passed());
        assert!(report.mismatches.iter().any(|m| matches!(m, DclMismatch::Parity { .. })), "{:?}", report.mismatches);
    }

    #[test]
    fn sequences_outside_the_template_are_rejected() {
        let template = make_library_gadget(GadgetKind::Switch, None, &[]).unwrap();
        let bad = template.traversals(&[("Test", "T-Out")]).unwrap();
        let report = dcl_conformance(&fresh(GadgetKind::Switch).unwrap(), &template, &[bad], 1000);
        assert!(!report.passed());
        assert_eq!(report.template_errors.len(), 1);
    }

    #[test]
    fn mismatched_ports_are_rejected() {
        let template = make_library_gadget(GadgetKind::Switch, None, &[]).unwrap();
        let report = dcl_conformance(&fresh(GadgetKind::ReversibleFanIn).unwrap(), &template, &[], 1000);
        assert!(!report.passed());
    }

    #[test]
    fn harness_rejects_port_reuse() {
        let frag = crossover();
        assert!(Harness::new(&frag, &seq(&[("A", "a"), ("a", "A")])).is_err());
        assert!(Harness::new(&frag, &seq(&[("Z", "a")])).is_err());
    }
}
