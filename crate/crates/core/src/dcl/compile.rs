//! The DCL backend: realizing a compiled gadget network as one constraint graph.

use std::collections::HashMap;

use super::builder::{DclBuilder, Fragment};
use super::gadgets::{build_dcl_gadget, DclGadgetError};
use serde::Serialize;

use super::{dcl_observe, DclOutcome, DclProblem};
use crate::compiler::{compile, CompileError, Mode};
use crate::gadgets::PortIdx;
use crate::network::{Link, Network, PortRef};
use crate::qbf::QbfFormula;

#[derive(Debug, thiserror::Error)]
pub enum DclCompileError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Gadget(#[from] DclGadgetError),
}

/// A compiled constraint graph with the port edges of every network port.
#[derive(Debug, Clone)]
pub struct DclNetwork {
    pub problem: DclProblem,
    /// Port edge of each (instance, port); flips toward `joints` on exit.
    pub port_edges: HashMap<PortRef, usize>,
    pub joints: HashMap<PortRef, usize>,
    /// The seeded edge feeding the start port.
    pub seed: usize,
}

/// Realize every gadget of `net` by its DCL fragment. Paired ports share a
/// degree-2 joint; reflectors and the start become bounce terminals.
pub fn realize(net: &Network, max_steps: u64) -> Result<DclNetwork, DclCompileError> {
    let mut b = DclBuilder::new();
    let mut cache: HashMap<(String, Vec<(String, String)>), Fragment> = HashMap::new();
    let mut joints = HashMap::new();
    for (i, inst) in net.instances().iter().enumerate() {
        for p in 0..inst.template.num_ports() {
            let r = PortRef::new(i, p);
            if let Link::Paired(q) = net.link(r) {
                if let Some(&j) = joints.get(&q) {
                    joints.insert(r, j);
                    continue;
                }
            }
            let j = b.joint(&format!("{}.joint", net.port_name(r)));
            joints.insert(r, j);
        }
    }
    let mut port_edges = HashMap::new();
    for (i, inst) in net.instances().iter().enumerate() {
        let t = &inst.template;
        let kind = t.kind().ok_or_else(|| CompileError::Internal(format!("{} has no gadget kind", inst.id)))?;
        let names = t.ports();
        let history: Vec<(String, String)> =
            t.initial_history().iter().map(|tr| (names[tr.entry].clone(), names[tr.exit].clone())).collect();
        let key = (kind.to_string(), history.clone());
        if !cache.contains_key(&key) {
            cache.insert(key.clone(), build_dcl_gadget(kind, &history)?);
        }
        let frag = &cache[&key];
        let stubs: HashMap<String, usize> =
            names.iter().enumerate().map(|(p, n)| (n.clone(), joints[&PortRef::new(i, p)])).collect();
        let edges = b.add_fragment(&inst.id, frag, &stubs);
        for (p, n) in names.iter().enumerate() {
            port_edges.insert(PortRef::new(i, p), edges[n]);
        }
    }
    let start = net.start();
    let mut seed = None;
    let mut refs: Vec<PortRef> = joints.keys().copied().collect();
    refs.sort();
    for r in refs {
        let j = joints[&r];
        let name = net.port_name(r);
        if r == start {
            let j0 = b.joint("start.joint");
            b.path("start.wire", j0, j, 1, super::Color::Blue);
            let e = b.bounce_terminal("start", j0);
            b.graph.initial.flipped[e] = true;
            seed = Some(e);
            continue;
        }
        match net.link(r) {
            Link::Paired(_) => {}
            Link::Reflect => {
                b.bounce_terminal(&format!("{name}.reflector"), j);
            }
            Link::Open => {
                let e = port_edges[&r];
                if b.graph.head(&b.graph.initial, e) == j {
                    b.source_terminal(&format!("{name}.terminal"), j);
                } else {
                    b.bounce_terminal(&format!("{name}.terminal"), j);
                }
            }
        }
    }
    let target = port_edges[&net.target()];
    let problem = DclProblem { graph: b.finish(), target, max_steps };
    Ok(DclNetwork { problem, port_edges, joints, seed: seed.expect("start port") })
}

/// Compile `f` in planar mode and realize it in DCL. The target edge flips
/// iff `f` is true.
pub fn compile_dcl(f: &QbfFormula, max_steps: u64) -> Result<DclNetwork, DclCompileError> {
    let compiled = compile(f, Mode::Planar)?;
    realize(&compiled.network, max_steps)
}

/// One gadget traversal read off a DCL run from its port-edge flips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DclEvent {
    /// Step at which the entry port edge flipped into the gadget.
    pub entry_step: u64,
    /// Step at which the exit port edge flipped toward its joint.
    pub exit_step: u64,
    pub instance: usize,
    pub entry: PortIdx,
    pub exit: PortIdx,
}

/// A DCL run of a realized network.
#[derive(Debug, Clone, Serialize)]
pub struct DclRun {
    pub outcome: DclOutcome,
    pub events: Vec<DclEvent>,
    /// Edges flipping at each step (index 0 is step 1), when requested.
    pub flips: Option<Vec<Vec<usize>>>,
}

impl DclRun {
    /// `(instance, entry, exit)` triples, comparable with [`crate::network::Trace::moves`].
    pub fn moves(&self) -> Vec<(usize, PortIdx, PortIdx)> {
        self.events.iter().map(|e| (e.instance, e.entry, e.exit)).collect()
    }
}

/// Run the realized network, extracting gadget traversals: a port edge
/// flipping away from its joint is an entry, toward it an exit.
pub fn dcl_run(dnet: &DclNetwork, cycle_memory: usize, record_flips: bool) -> DclRun {
    let by_edge: HashMap<usize, PortRef> = dnet.port_edges.iter().map(|(&r, &e)| (e, r)).collect();
    let g = &dnet.problem.graph;
    let mut pending: HashMap<usize, (PortIdx, u64)> = HashMap::new();
    let mut events = Vec::new();
    let mut flips = record_flips.then(Vec::new);
    let outcome = dcl_observe(&dnet.problem, cycle_memory, |step, before, after| {
        let changed: Vec<usize> = (0..g.edges.len()).filter(|&e| before.toward_v[e] != after.toward_v[e]).collect();
        for &e in &changed {
            let Some(&r) = by_edge.get(&e) else { continue };
            if g.head(after, e) == dnet.joints[&r] {
                if let Some((entry, entry_step)) = pending.remove(&r.instance) {
                    events.push(DclEvent { entry_step, exit_step: step, instance: r.instance, entry, exit: r.port });
                }
            } else {
                pending.insert(r.instance, (r.port, step));
            }
        }
        if let Some(f) = flips.as_mut() {
            f.push(changed);
        }
    });
    DclRun { outcome, events, flips }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{simulate, SimConfig};
    use crate::qbf::parse_qbf;

    const EXISTS: &str = "qbf 1 1\ne 1\n1 0\n";
    const FORALL: &str = "qbf 1 1\na 1\n1 0\n";

    #[test]
    fn true_formula_flips_false_formula_cycles() {
        let t = compile_dcl(&parse_qbf(EXISTS).unwrap(), 1_000_000).unwrap();
        assert!(matches!(dcl_run(&t, 1_000_000, false).outcome, DclOutcome::Flips { .. }));
        let f = compile_dcl(&parse_qbf(FORALL).unwrap(), 1_000_000).unwrap();
        assert!(matches!(dcl_run(&f, 1_000_000, false).outcome, DclOutcome::Cycled { .. }));
    }

    #[test]
    fn compiled_graph_is_well_formed() {
        let d = compile_dcl(&parse_qbf(EXISTS).unwrap(), 1_000_000).unwrap();
        let g = &d.problem.graph;
        g.check_structure().unwrap();
        assert_eq!(g.edges[d.problem.target].color, super::super::Color::Blue);
        assert!(g.initial.flipped[d.seed]);
    }

    #[test]
    fn dcl_events_match_the_planar_trace() {
        for text in [EXISTS, FORALL] {
            let c = compile(&parse_qbf(text).unwrap(), Mode::Planar).unwrap();
            let abs = simulate(&c.network, &SimConfig::default());
            let run = dcl_run(&realize(&c.network, 1_000_000).unwrap(), 1_000_000, true);
            assert_eq!(run.moves(), abs.trace().moves());
            assert!(run.events.windows(2).all(|w| (w[1].entry_step - w[0].entry_step) % 2 == 0));
            let flips = run.flips.unwrap();
            let n = match run.outcome {
                DclOutcome::Flips { step } => step,
                DclOutcome::Cycled { first_repeat, period } => first_repeat + period,
                DclOutcome::StepLimit { steps } => steps,
            };
            assert_eq!(flips.len() as u64, n);
        }
    }
}
