//! Backend constructions of the framework gadgets from 3-spinners, or from
//! locking 2-toggles and rotate-clockwise gadgets, and wholesale
//! substitution of a compiled network.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::gadgets::{fsm_in_state, make_library_gadget, GadgetKind, GadgetTemplate};
use crate::network::{Composite, Link, Network, NetworkBuilder, PortRef};

use super::CompileError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Backend {
    Spinner3,
    L2tRotate,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Spinner3 => "spinner3",
            Backend::L2tRotate => "l2t-rotate",
        })
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spinner3" => Ok(Backend::Spinner3),
            "l2t-rotate" | "l2t_rotate" => Ok(Backend::L2tRotate),
            _ => Err(format!("unknown backend `{s}`")),
        }
    }
}

/// Piece of a construction: gadget kind and FSM state name.
struct Part {
    kind: GadgetKind,
    state: &'static str,
}

const CW: Part = Part { kind: GadgetKind::Spinner3, state: "cw" };
const CCW: Part = Part { kind: GadgetKind::Spinner3, state: "ccw" };
const L2T: Part = Part { kind: GadgetKind::Locking2Toggle, state: "parallel" };
const ROT: Part = Part { kind: GadgetKind::RotateCw, state: "rotate" };

/// Ports are numbered consecutively over the parts; a Locking2Toggle
/// contributes its ports in cyclic order a, b, d, c.
fn port_of(parts: &[Part], mut n: usize) -> PortRef {
    for (i, part) in parts.iter().enumerate() {
        let k = part.kind.ports().len();
        if n < k {
            let name = part.kind.default_cyclic_order()[n];
            let idx = part.kind.ports().iter().position(|p| *p == name).unwrap();
            return PortRef::new(i, idx);
        }
        n -= k;
    }
    panic!("construction port out of range")
}

fn assemble(name: &str, parts: &[Part], pairs: &[(usize, usize)], ext: &[(&str, usize)]) -> Composite {
    let instances = parts
        .iter()
        .enumerate()
        .map(|(i, p)| (format!("g{i}"), fsm_in_state(p.kind, None, p.state).expect("catalog state")))
        .collect();
    let internal: Vec<_> = pairs.iter().map(|&(a, b)| (port_of(parts, a), port_of(parts, b))).collect();
    let external = ext.iter().map(|&(n, p)| (n.to_string(), port_of(parts, p))).collect();
    Composite::new(name, instances, &internal, external).expect("construction wiring is a matching")
}

/// Switch from three 3-spinners, planar with external order
/// Set, Out, T-Out, Test, F-Out.
pub fn spinner_switch() -> Composite {
    assemble(
        "Switch/3-spinner",
        &[CW, CW, CW],
        &[(1, 7), (5, 8)],
        &[("Set", 0), ("Out", 3), ("Test", 6), ("T-Out", 4), ("F-Out", 2)],
    )
}

/// Switch from three 3-spinners with external order
/// Set, F-Out, T-Out, Out, Test (used inside the crossover).
pub fn spinner_switch_alt() -> Composite {
    assemble(
        "Switch/3-spinner (alt)",
        &[CCW, CCW, CW],
        &[(2, 7), (4, 8)],
        &[("Set", 0), ("Out", 3), ("Test", 6), ("T-Out", 5), ("F-Out", 1)],
    )
}

/// Reversible Fan-in from three 3-spinners.
pub fn spinner_fanin() -> Composite {
    assemble("ReversibleFanIn/3-spinner", &[CCW, CW, CW], &[(1, 5), (2, 7), (4, 8)], &[("a", 0), ("b", 3), ("c", 6)])
}

/// A/BA Crossover from six 3-spinners: a Switch whose Test is A, Set is B
/// and Out is b, with T-Out and F-Out merged by a Fan-in into a.
pub fn spinner_crossover() -> Composite {
    let parts = [CCW, CCW, CW, CCW, CW, CW];
    // switch ports 0..9, fan-in ports 9..18
    assemble(
        "AbaCrossover/3-spinner",
        &parts,
        &[(2, 7), (4, 8), (5, 9), (1, 12), (10, 14), (11, 16), (13, 17)],
        &[("A", 6), ("B", 0), ("a", 15), ("b", 3)],
    )
}

/// Switch from two locking 2-toggles and a rotate-clockwise gadget.
pub fn l2t_switch() -> Composite {
    assemble(
        "Switch/l2t-rotate",
        &[Part { kind: GadgetKind::Locking2Toggle, state: "top-reversed" }, L2T, ROT],
        &[(0, 7), (3, 10), (4, 9)],
        &[("Set", 1), ("Out", 6), ("Test", 8), ("T-Out", 2), ("F-Out", 5)],
    )
}

/// Reversible Fan-in from a locking 2-toggle and a rotate-clockwise gadget.
pub fn l2t_fanin() -> Composite {
    assemble("ReversibleFanIn/l2t-rotate", &[L2T, ROT], &[(1, 6), (2, 5)], &[("a", 0), ("b", 3), ("c", 4)])
}

/// Cyclic order of the external ports, as they appear around the construction.
pub fn external_cyclic_order(kind: GadgetKind, backend: Backend) -> &'static [&'static str] {
    match (kind, backend) {
        (GadgetKind::Switch, Backend::Spinner3) => &["Set", "Out", "T-Out", "Test", "F-Out"],
        (GadgetKind::Switch, Backend::L2tRotate) => &["Set", "T-Out", "Test", "F-Out", "Out"],
        (GadgetKind::ReversibleFanIn, Backend::Spinner3) => &["a", "b", "c"],
        (GadgetKind::ReversibleFanIn, Backend::L2tRotate) => &["a", "c", "b"],
        (GadgetKind::AbaCrossover, _) => &["A", "B", "a", "b"],
        _ => &[],
    }
}

/// Construction of a framework gadget in the given backend.
pub fn construction(kind: GadgetKind, backend: Backend) -> Result<Composite, CompileError> {
    match (kind, backend) {
        (GadgetKind::Switch, Backend::Spinner3) => Ok(spinner_switch()),
        (GadgetKind::ReversibleFanIn, Backend::Spinner3) => Ok(spinner_fanin()),
        (GadgetKind::AbaCrossover, Backend::Spinner3) => Ok(spinner_crossover()),
        (GadgetKind::Switch, Backend::L2tRotate) => Ok(l2t_switch()),
        (GadgetKind::ReversibleFanIn, Backend::L2tRotate) => Ok(l2t_fanin()),
        _ => Err(CompileError::Unsupported { backend: backend.to_string(), gadget: kind.to_string() }),
    }
}

/// Replace every framework gadget of `net` by its backend construction.
/// After-variants are realized by driving the fresh construction through
/// the entries of the gadget's initial history and keeping the states.
pub fn substitute_backend(net: &Network, backend: Backend) -> Result<Network, CompileError> {
    // check support up front so the error names the first offending gadget
    let mut built = Vec::new();
    for inst in net.instances() {
        let kind = inst.template.kind().filter(|k| k.is_framework()).ok_or_else(|| CompileError::Unsupported {
            backend: backend.to_string(),
            gadget: inst.template.name().into(),
        })?;
        let c = construction(kind, backend)?;
        let mut states = c.initial_states();
        for t in inst.template.initial_history() {
            let entry = c.external_index(&inst.template.ports()[t.entry]).expect("same port names");
            let step = c.step(&mut states, entry).map_err(|e| CompileError::Internal(e.to_string()))?;
            if c.external()[step.exit].0 != inst.template.ports()[t.exit] {
                return Err(CompileError::Internal(format!("{} construction diverges on its history", kind)));
            }
        }
        built.push((c, states));
    }

    let mut b = NetworkBuilder::new();
    let mut offset = Vec::new();
    for (inst, (c, states)) in net.instances().iter().zip(&built) {
        offset.push(b.num_instances());
        for ((id, t), &s) in c.instances().iter().zip(states) {
            b.add(format!("{}/{id}", inst.id), with_state(t, s)?).map_err(|e| CompileError::Internal(e.to_string()))?;
        }
        for (p, q) in c.internal_pairs() {
            let p = PortRef::new(p.instance + offset.last().unwrap(), p.port);
            let q = PortRef::new(q.instance + offset.last().unwrap(), q.port);
            b.connect(p, q).map_err(|e| CompileError::Internal(e.to_string()))?;
        }
    }
    let map = |p: PortRef| -> PortRef {
        let (c, _) = &built[p.instance];
        let name = &net.instance(p.instance).template.ports()[p.port];
        let inner = c
            .external_port(c.external_index(name).expect("same port names"))
            .expect("constructions have no bare wires");
        PortRef::new(inner.instance + offset[p.instance], inner.port)
    };
    for e in net.edges() {
        let a = map(e.a);
        let r = match net.link(e.a) {
            Link::Paired(q) => b.connect(a, map(q)),
            Link::Reflect => b.reflect(a),
            Link::Open => b.open(a),
        };
        r.map_err(|e| CompileError::Internal(e.to_string()))?;
    }
    b.set_start(map(net.start()));
    b.set_target(map(net.target()));
    b.build().map_err(|e| CompileError::Internal(e.to_string()))
}

/// The same FSM gadget starting in another state.
fn with_state(t: &Arc<GadgetTemplate>, s: crate::gadgets::GadgetState) -> Result<Arc<GadgetTemplate>, CompileError> {
    if s == t.initial_state() {
        return Ok(t.clone());
    }
    let kind = t.kind().expect("catalog gadget");
    let order: Vec<&str> = t.cyclic_order().iter().map(|&p| t.ports()[p].as_str()).collect();
    fsm_in_state(kind, Some(&order), &t.describe_state(s)).map_err(|e| CompileError::Internal(e.to_string()))
}

/// The framework gadget a construction stands for, for conformance checks.
pub fn reference(kind: GadgetKind) -> Arc<GadgetTemplate> {
    make_library_gadget(kind, None, &[]).expect("catalog gadget")
}

/// Whether the construction has a planar embedding in which every gadget
/// keeps its cyclic port order and the external ports appear around the
/// outside in `order`. Counts faces of the rotation system and checks
/// Euler's formula; the construction must be connected.
pub fn is_planar(c: &Composite, order: &[&str]) -> bool {
    let mut offset = Vec::new();
    let mut darts = 0;
    for (_, t) in c.instances() {
        offset.push(darts);
        darts += t.num_ports();
    }
    let outer = darts;
    darts += order.len();
    let dart = |p: PortRef| offset[p.instance] + p.port;
    let mut alpha = vec![usize::MAX; darts];
    let mut edges = 0;
    for (p, q) in c.internal_pairs() {
        alpha[dart(p)] = dart(q);
        alpha[dart(q)] = dart(p);
        edges += 1;
    }
    for (k, name) in order.iter().enumerate() {
        let Ok(i) = c.external_index(name) else { return false };
        let Some(p) = c.external_port(i) else { return false };
        alpha[dart(p)] = outer + k;
        alpha[outer + k] = dart(p);
        edges += 1;
    }
    if alpha.contains(&usize::MAX) {
        return false;
    }
    let mut sigma = vec![0; darts];
    for (g, (_, t)) in c.instances().iter().enumerate() {
        let co = t.cyclic_order();
        for (i, &p) in co.iter().enumerate() {
            sigma[offset[g] + p] = offset[g] + co[(i + 1) % co.len()];
        }
    }
    // the outside is seen from the other side, so its rotation is reversed
    for k in 0..order.len() {
        sigma[outer + k] = outer + (k + order.len() - 1) % order.len();
    }
    let mut seen = vec![false; darts];
    let mut faces = 0;
    for d in 0..darts {
        if seen[d] {
            continue;
        }
        faces += 1;
        let mut e = d;
        while !seen[e] {
            seen[e] = true;
            e = sigma[alpha[e]];
        }
    }
    let vertices = c.instances().len() + 1;
    vertices as i64 - edges as i64 + faces as i64 == 2
}
