//! Edge usage: which pairing edges are "used" (traversed forwards more
//! recently than backwards) over the course of a trace, and whether an
//! A/BA Crossover could sit on the crossing of two edges.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{EdgeEnd, EdgeId, Link, Network, PortRef, Trace};
use crate::gadgets::{make_library_gadget, GadgetKind};

/// One traversal of an edge. `toward_b` is relative to [`super::Edge`]'s
/// `a`/`b` ends; `seq` orders traversals globally (a reflection produces two
/// traversals in the same step).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeTraversal {
    pub seq: usize,
    pub step: u64,
    pub toward_b: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageInterval {
    pub used_seq: usize,
    pub used_step: u64,
    pub unused_seq: Option<usize>,
    pub unused_step: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeUsage {
    /// Direction of the first traversal of each edge; `None` if never traversed.
    pub forward_toward_b: Vec<Option<bool>>,
    pub traversals: Vec<Vec<EdgeTraversal>>,
    pub intervals: Vec<Vec<UsageInterval>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UsageError {
    #[error("event {step} enters {found} but the pairing leads to {expected}")]
    Mismatch { step: u64, expected: String, found: String },
    #[error("trace refers to instance {0}, which the network does not have")]
    UnknownInstance(usize),
}

impl EdgeUsage {
    /// Whether `e` was traversed forward (`true`) or backward at this traversal.
    pub fn is_forward(&self, e: EdgeId, t: &EdgeTraversal) -> bool {
        Some(t.toward_b) == self.forward_toward_b[e.0]
    }

    /// Forward/backward flags in order, for one edge.
    pub fn directions(&self, e: EdgeId) -> Vec<bool> {
        self.traversals[e.0].iter().map(|t| self.is_forward(e, t)).collect()
    }

    /// Directions along every edge strictly alternate.
    pub fn alternates(&self) -> bool {
        (0..self.traversals.len()).all(|e| {
            let d = self.directions(EdgeId(e));
            d.windows(2).all(|w| w[0] != w[1])
        })
    }

    pub fn is_used_after(&self, e: EdgeId, seq: usize) -> bool {
        let mut used = false;
        for t in &self.traversals[e.0] {
            if t.seq > seq {
                break;
            }
            used = self.is_forward(e, t);
        }
        used
    }

    /// All traversals of all edges in global order, as `(seq, edge, forward)`.
    pub fn merged(&self, edges: &[EdgeId]) -> Vec<(usize, EdgeId, bool)> {
        let mut all: Vec<(usize, EdgeId, bool)> = edges
            .iter()
            .flat_map(|&e| self.traversals[e.0].iter().map(move |t| (t.seq, e, self.is_forward(e, t))))
            .collect();
        all.sort_by_key(|x| x.0);
        all
    }

    pub fn num_traversals(&self) -> usize {
        self.traversals.iter().map(Vec::len).sum()
    }
}

/// Replay `trace` against the pairing of `net` and record, for every edge,
/// each traversal and the resulting used/unused intervals.
pub fn edge_usage(trace: &Trace, net: &Network) -> Result<EdgeUsage, UsageError> {
    let n = net.edges().len();
    let mut usage =
        EdgeUsage { forward_toward_b: vec![None; n], traversals: vec![Vec::new(); n], intervals: vec![Vec::new(); n] };
    let mut seq = 0usize;
    let mut record = |usage: &mut EdgeUsage, e: EdgeId, step: u64, toward_b: bool| {
        let fwd = *usage.forward_toward_b[e.0].get_or_insert(toward_b);
        usage.traversals[e.0].push(EdgeTraversal { seq, step, toward_b });
        if fwd == toward_b {
            usage.intervals[e.0].push(UsageInterval {
                used_seq: seq,
                used_step: step,
                unused_seq: None,
                unused_step: None,
            });
        } else if let Some(last) = usage.intervals[e.0].last_mut() {
            if last.unused_seq.is_none() {
                last.unused_seq = Some(seq);
                last.unused_step = Some(step);
            }
        }
        seq += 1;
    };
    // Entering port p from the far side of its edge.
    let enter = |p: PortRef| -> (EdgeId, bool) {
        let e = net.edge_at(p);
        let edge = net.edges()[e.0];
        // toward_b iff p is the b end
        (e, edge.a != p)
    };

    let start = net.start();
    let (e, toward_b) = enter(start);
    // reflector/terminal far ends count as the b side, so entering `a` is toward a
    let toward_b = match net.edges()[e.0].b {
        EdgeEnd::Port(_) => toward_b,
        _ => false,
    };
    record(&mut usage, e, 0, toward_b);

    let mut expected = start;
    for ev in &trace.events {
        if ev.instance >= net.instances().len() {
            return Err(UsageError::UnknownInstance(ev.instance));
        }
        let here = PortRef::new(ev.instance, ev.entry);
        if here != expected {
            return Err(UsageError::Mismatch {
                step: ev.step,
                expected: net.port_name(expected),
                found: net.port_name(here),
            });
        }
        let out = PortRef::new(ev.instance, ev.exit);
        let e = net.edge_at(out);
        let is_a = net.edges()[e.0].a == out;
        match net.link(out) {
            Link::Paired(q) => {
                record(&mut usage, e, ev.step, is_a);
                expected = q;
            }
            Link::Reflect => {
                record(&mut usage, e, ev.step, true);
                record(&mut usage, e, ev.step, false);
                expected = out;
            }
            Link::Open => {
                record(&mut usage, e, ev.step, true);
                expected = out;
            }
        }
    }
    Ok(usage)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CrossoverInit {
    Fresh,
    /// Starts after `[A→a]`.
    AfterAa,
}

/// Placement of an A/BA Crossover on the crossing of two edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CrossingCheck {
    /// Edge carried by the A–a tunnel.
    pub a_tunnel: EdgeId,
    /// Forward traversals of `a_tunnel` go A→a (otherwise a→A).
    pub a_forward_is_a_to_a: bool,
    pub b_tunnel: EdgeId,
    /// Forward traversals of `b_tunnel` go B→b (otherwise b→B).
    pub b_forward_is_b_to_b: bool,
    pub initial: CrossoverInit,
}

/// Whether an A/BA Crossover in the given orientation and initial state
/// implements the interleaving of traversals of the two edges.
pub fn check_crossing_discipline(usage: &EdgeUsage, check: &CrossingCheck) -> bool {
    assert_ne!(check.a_tunnel, check.b_tunnel, "a crossing needs two distinct edges");
    let history: &[(&str, &str)] = match check.initial {
        CrossoverInit::Fresh => &[],
        CrossoverInit::AfterAa => &[("A", "a")],
    };
    let crossover = make_library_gadget(GadgetKind::AbaCrossover, None, history).expect("catalog crossover");
    let seq: Vec<_> = usage
        .merged(&[check.a_tunnel, check.b_tunnel])
        .into_iter()
        .map(|(_, e, forward)| {
            let (upper, lower, fwd_is_down) = if e == check.a_tunnel {
                ("A", "a", check.a_forward_is_a_to_a)
            } else {
                ("B", "b", check.b_forward_is_b_to_b)
            };
            if forward == fwd_is_down {
                crossover.traversal(upper, lower).unwrap()
            } else {
                crossover.traversal(lower, upper).unwrap()
            }
        })
        .collect();
    crossover.implements(&seq)
}
