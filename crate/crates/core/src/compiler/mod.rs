//! QBF to gadget-network reduction.
//!
//! One quantifier block per quantifier, chained left to right, followed by
//! the CNF evaluation block. In planar mode every crossing of two wires
//! inside a block (and of the T/F wires between blocks of different
//! orientation) is replaced by an A/BA Crossover.

mod backend;
mod layout;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gadgets::{make_library_gadget, GadgetKind};
use crate::network::{
    check_crossing_discipline, edge_usage, CrossingCheck, CrossoverInit, EdgeId, Network, NetworkBuilder, PortRef,
    Trace,
};
use crate::qbf::{Literal, QbfFormula, Quantifier};

pub use backend::{
    construction, external_cyclic_order, is_planar, l2t_fanin, l2t_switch, reference, spinner_crossover, spinner_fanin,
    spinner_switch, spinner_switch_alt, substitute_backend, Backend,
};
pub use layout::{
    quantifier_contract, swap_role, Block, BlockKind, CrossingDecl, Point, Wire, QUANTIFIER_PORTS, SWITCH_ORDER,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("backend {backend} has no construction for {gadget}")]
    Unsupported { backend: String, gadget: String },
    #[error("internal compiler error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Abstract,
    Planar,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Abstract => "abstract",
            Mode::Planar => "planar",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "abstract" => Ok(Mode::Abstract),
            "planar" => Ok(Mode::Planar),
            _ => Err(format!("unknown mode `{s}`")),
        }
    }
}

/// Where a wire label ended up in the compiled network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WireEdge {
    pub edge: EdgeId,
    /// The wire's forward direction runs toward the edge's `b` end.
    pub forward_toward_b: bool,
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub network: Network,
    pub mode: Mode,
    pub crossings: Vec<CrossingDecl>,
    /// Wire label → network edge. Only filled in abstract mode, where every
    /// wire lies on a single edge.
    pub wires: BTreeMap<String, WireEdge>,
}

/// Endpoint of a top-level or block wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum End {
    /// Spine position of a block.
    Point(usize, usize),
    Reflector,
    Terminal,
}

struct Segment {
    label: String,
    from: End,
    to: End,
    /// Crossovers along the wire from `from` to `to`: (instance, port nearer
    /// `from`, port nearer `to`).
    crossovers: Vec<(f64, usize, usize, usize)>,
}

/// The blocks of the reduction, before they are joined into a network.
pub struct Layout {
    pub blocks: Vec<Block>,
    kinds: Vec<Quantifier>,
}

impl Layout {
    pub fn new(f: &QbfFormula) -> Layout {
        let mut blocks: Vec<Block> = f
            .quantifiers()
            .iter()
            .enumerate()
            .map(|(i, &(q, _))| Block::quantifier(&format!("q{}", i + 1), q))
            .collect();
        // the CNF block numbers variables by quantifier depth, which its
        // crossover orientation relies on
        let clauses: Vec<[Literal; 3]> = f
            .padded_clauses()
            .iter()
            .map(|c| c.map(|l| Literal { var: f.depth_of(l.var) + 1, positive: l.positive }))
            .collect();
        blocks.push(Block::cnf("cnf", f.num_vars(), &clauses));
        Layout { blocks, kinds: f.quantifiers().iter().map(|&(q, _)| q).collect() }
    }

    /// Whether the T and F wires between block `i` and block `i + 1` cross:
    /// the wires swap sides when exactly one of the blocks is existential.
    fn link_crosses(&self, i: usize) -> bool {
        let swapped = |b: usize| self.kinds.get(b) == Some(&Quantifier::Existential);
        swapped(i) != swapped(i + 1)
    }

    /// Crossover placements: those inside every block, then those between
    /// neighbouring blocks.
    pub fn crossings(&self) -> Vec<CrossingDecl> {
        let mut out: Vec<CrossingDecl> = self.blocks.iter().flat_map(|b| b.crossing_decls()).collect();
        for i in 0..self.kinds.len() {
            if self.link_crosses(i) {
                out.push(link_decl(i));
            }
        }
        out
    }
}

fn link_decl(i: usize) -> CrossingDecl {
    // the two answers are never both pending, so any orientation works
    CrossingDecl {
        a_tunnel: format!("link{}.t", i + 1),
        a_forward_is_a_to_a: true,
        b_tunnel: format!("link{}.f", i + 1),
        b_forward_is_b_to_b: true,
        initial: CrossoverInit::Fresh,
    }
}

/// Crossover placements of the planar layout of `f`.
pub fn generate_crossings(f: &QbfFormula) -> Vec<CrossingDecl> {
    Layout::new(f).crossings()
}

pub fn compile_abstract(f: &QbfFormula) -> Result<Compiled, CompileError> {
    compile(f, Mode::Abstract)
}

pub fn compile_planar(f: &QbfFormula) -> Result<Compiled, CompileError> {
    compile(f, Mode::Planar)
}

fn internal(e: impl fmt::Display) -> CompileError {
    CompileError::Internal(e.to_string())
}

pub fn compile(f: &QbfFormula, mode: Mode) -> Result<Compiled, CompileError> {
    let layout = Layout::new(f);
    let k = layout.kinds.len();

    let mut b = NetworkBuilder::new();
    let mut base = Vec::new();
    for block in &layout.blocks {
        base.push(b.num_instances());
        for (id, t) in &block.gadgets {
            b.add(format!("{}.{id}", block.name), t.clone()).map_err(internal)?;
        }
    }

    let mut segments = Vec::new();
    let mut seg_index: HashMap<String, usize> = HashMap::new();
    for (bi, block) in layout.blocks.iter().enumerate() {
        for w in &block.wires {
            seg_index.insert(format!("{}.{}", block.name, w.label), segments.len());
            segments.push(Segment {
                label: format!("{}.{}", block.name, w.label),
                from: End::Point(bi, w.from),
                to: End::Point(bi, w.to),
                crossovers: Vec::new(),
            });
        }
    }
    let ext = |bi: usize, name: &str| -> End {
        End::Point(bi, layout.blocks[bi].external_position(name).expect("block port"))
    };
    let mut top = |label: String, from: End, to: End| {
        seg_index.insert(label.clone(), segments.len());
        segments.push(Segment { label, from, to, crossovers: Vec::new() });
    };
    top("start".into(), End::Reflector, ext(0, "In"));
    top("reject".into(), ext(0, "F-Out"), End::Reflector);
    top("accept".into(), ext(0, "T-Out"), End::Terminal);
    for i in 0..k {
        top(format!("link{}.out", i + 1), ext(i, "Out"), ext(i + 1, "In"));
        top(format!("link{}.t", i + 1), ext(i + 1, "T-Out"), ext(i, "T-In"));
        top(format!("link{}.f", i + 1), ext(i + 1, "F-Out"), ext(i, "F-In"));
        let v = i + 1;
        top(format!("write{}.set", i + 1), ext(i, "Write-Out"), ext(k, &format!("x{v}-In")));
        top(format!("write{}.reset", i + 1), ext(k, &format!("x{v}-Out")), ext(i, "Write-In"));
    }

    let crossings = layout.crossings();
    if mode == Mode::Planar {
        for (n, decl) in crossings.iter().enumerate() {
            let history: &[(&str, &str)] = match decl.initial {
                CrossoverInit::Fresh => &[],
                CrossoverInit::AfterAa => &[("A", "a")],
            };
            let t = make_library_gadget(GadgetKind::AbaCrossover, None, history).map_err(internal)?;
            let id = format!("cross{}[{}×{}]", n + 1, decl.a_tunnel, decl.b_tunnel);
            let inst = b.add(id, t.clone()).map_err(internal)?;
            let port = |p: &str| t.port(p).unwrap();
            let sa = seg_index[&decl.a_tunnel];
            let sb = seg_index[&decl.b_tunnel];
            let x = crossing_x(&layout, &segments, sa, sb);
            let (a_near, a_far) = if decl.a_forward_is_a_to_a { ("A", "a") } else { ("a", "A") };
            let (b_near, b_far) = if decl.b_forward_is_b_to_b { ("B", "b") } else { ("b", "B") };
            segments[sa].crossovers.push((x, inst, port(a_near), port(a_far)));
            segments[sb].crossovers.push((x, inst, port(b_near), port(b_far)));
        }
        for s in &mut segments {
            let rightward = match (s.from, s.to) {
                (End::Point(_, p), End::Point(_, q)) => p < q,
                _ => true,
            };
            s.crossovers.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            if !rightward {
                s.crossovers.reverse();
            }
        }
    }

    // every spine point belongs to one block wire, and external points to
    // one top-level wire as well
    let mut at: HashMap<End, Vec<usize>> = HashMap::new();
    for (i, s) in segments.iter().enumerate() {
        for end in [s.from, s.to] {
            if let End::Point(..) = end {
                at.entry(end).or_default().push(i);
            }
        }
    }
    let gadget_port = |end: End| -> Option<PortRef> {
        let End::Point(bi, pos) = end else { return None };
        match layout.blocks[bi].spine[pos] {
            Point::Port(g, p) => Some(PortRef::new(base[bi] + g, p)),
            _ => None,
        }
    };

    let mut done = vec![false; segments.len()];
    let mut start = None;
    let mut target = None;
    let mut wire_ends: Vec<(String, PortRef, bool)> = Vec::new();
    let mut ends: Vec<End> = at.keys().copied().filter(|&e| gadget_port(e).is_some()).collect();
    ends.sort_by_key(|e| match e {
        End::Point(b, p) => (*b, *p),
        _ => (usize::MAX, 0),
    });
    for origin in ends {
        let first = at[&origin][0];
        if done[first] {
            continue;
        }
        let origin_port = gadget_port(origin).unwrap();
        // walk the chain, collecting stops
        let mut stops: Vec<PortRef> = vec![origin_port];
        let mut here = origin;
        let mut seg = first;
        let far = loop {
            done[seg] = true;
            let s = &segments[seg];
            let forward = s.from == here;
            let next = if forward { s.to } else { s.from };
            wire_ends.push((s.label.clone(), origin_port, forward));
            let mut xs: Vec<_> = s.crossovers.clone();
            if !forward {
                xs.reverse();
            }
            for (_, inst, near, far) in xs {
                let (enter, leave) = if forward { (near, far) } else { (far, near) };
                stops.push(PortRef::new(inst, enter));
                stops.push(PortRef::new(inst, leave));
            }
            if s.label == "start" {
                start = Some(());
            }
            match next {
                End::Point(..) if gadget_port(next).is_some() => break next,
                End::Point(..) => {
                    let others = &at[&next];
                    let other = *others
                        .iter()
                        .find(|&&o| o != seg)
                        .ok_or_else(|| CompileError::Internal(format!("dangling external port at wire {}", s.label)))?;
                    here = next;
                    seg = other;
                }
                _ => break next,
            }
        };
        match far {
            End::Reflector => stops.push(PortRef::new(usize::MAX, 0)),
            End::Terminal => stops.push(PortRef::new(usize::MAX, 1)),
            _ => stops.push(gadget_port(far).unwrap()),
        }
        for pair in stops.chunks(2) {
            let (p, q) = (pair[0], pair[1]);
            match q.instance {
                usize::MAX if q.port == 0 => {
                    b.reflect(p).map_err(internal)?;
                    if start.take().is_some() {
                        b.set_start(p);
                    }
                }
                usize::MAX => {
                    b.open(p).map_err(internal)?;
                    target = Some(p);
                }
                _ => b.connect(p, q).map_err(internal)?,
            }
        }
        start = None;
    }
    let target = target.ok_or_else(|| CompileError::Internal("no target".into()))?;
    b.set_target(target);
    let network = b.build().map_err(internal)?;

    let mut wires = BTreeMap::new();
    if mode == Mode::Abstract {
        for (label, origin, away) in wire_ends {
            let edge = network.edge_at(origin);
            let is_a = network.edges()[edge.0].a == origin;
            wires.insert(label, WireEdge { edge, forward_toward_b: away == is_a });
        }
    }
    Ok(Compiled { network, mode, crossings, wires })
}

fn crossing_x(layout: &Layout, segments: &[Segment], s: usize, t: usize) -> f64 {
    match (segments[s].from, segments[t].from) {
        (End::Point(b1, _), End::Point(b2, _)) if b1 == b2 && b1 < layout.blocks.len() => {
            let block = &layout.blocks[b1];
            let name = |i: usize| segments[i].label.split_once('.').unwrap().1.to_string();
            let (ws, wt) = (block.wire(&name(s)), block.wire(&name(t)));
            match (ws, wt) {
                (Some(ws), Some(wt)) => block.crossing_x(ws, wt),
                _ => 0.0,
            }
        }
        _ => 0.0,
    }
}

/// Check every crossover placement against the usage of the abstract
/// network's edges along `trace`. Returns the violated placements.
pub fn check_crossings(compiled: &Compiled, trace: &Trace) -> Result<Vec<(CrossingDecl, String)>, CompileError> {
    if compiled.mode != Mode::Abstract {
        return Err(CompileError::Internal("crossing discipline is checked on the abstract network".into()));
    }
    let usage = edge_usage(trace, &compiled.network).map_err(|e| CompileError::Internal(e.to_string()))?;
    let mut bad = Vec::new();
    for decl in &compiled.crossings {
        let wa = compiled.wires[&decl.a_tunnel];
        let wb = compiled.wires[&decl.b_tunnel];
        let mut problem = None;
        for (label, w) in [(&decl.a_tunnel, wa), (&decl.b_tunnel, wb)] {
            if let Some(fwd) = usage.forward_toward_b[w.edge.0] {
                if fwd != w.forward_toward_b {
                    problem = Some(format!("wire {label} is first traversed backwards"));
                }
            }
        }
        if wa.edge == wb.edge {
            problem = Some("both wires lie on one edge".to_string());
        }
        if problem.is_none() {
            let check = CrossingCheck {
                a_tunnel: wa.edge,
                a_forward_is_a_to_a: decl.a_forward_is_a_to_a,
                b_tunnel: wb.edge,
                b_forward_is_b_to_b: decl.b_forward_is_b_to_b,
                initial: decl.initial,
            };
            if !check_crossing_discipline(&usage, &check) {
                problem = Some("crossover cannot carry the traversals".to_string());
            }
        }
        if let Some(p) = problem {
            bad.push((decl.clone(), p));
        }
    }
    Ok(bad)
}

/// Trace events as `(instance id, entry, exit)` names, without crossovers.
pub fn project_trace(net: &Network, trace: &Trace) -> Vec<(String, String, String)> {
    trace
        .events
        .iter()
        .filter(|e| net.instance(e.instance).template.kind() != Some(GadgetKind::AbaCrossover))
        .map(|e| {
            let inst = net.instance(e.instance);
            let ports = inst.template.ports();
            (inst.id.clone(), ports[e.entry].clone(), ports[e.exit].clone())
        })
        .collect()
}
