//! The gadget catalog: the three framework gizmos plus the FSM gadgets used
//! as backends.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Behavior, FsmBehavior, GadgetError, GadgetTemplate, SequenceSpec, Traversal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GadgetKind {
    Switch,
    ReversibleFanIn,
    AbaCrossover,
    Spinner3,
    Locking2Toggle,
    RotateCw,
    RotateCcw,
}

impl GadgetKind {
    pub const ALL: [GadgetKind; 7] = [
        GadgetKind::Switch,
        GadgetKind::ReversibleFanIn,
        GadgetKind::AbaCrossover,
        GadgetKind::Spinner3,
        GadgetKind::Locking2Toggle,
        GadgetKind::RotateCw,
        GadgetKind::RotateCcw,
    ];

    /// Port names in canonical (declaration) order.
    pub fn ports(self) -> &'static [&'static str] {
        match self {
            GadgetKind::Switch => &["Set", "Out", "Test", "T-Out", "F-Out"],
            GadgetKind::ReversibleFanIn => &["a", "b", "c"],
            GadgetKind::AbaCrossover => &["A", "B", "a", "b"],
            GadgetKind::Spinner3 => &["a1", "a2", "a3"],
            // tunnels a→b and c→d
            GadgetKind::Locking2Toggle => &["a", "b", "c", "d"],
            GadgetKind::RotateCw | GadgetKind::RotateCcw => &["r1", "r2", "r3"],
        }
    }

    /// Default cyclic order, as port names.
    pub fn default_cyclic_order(self) -> &'static [&'static str] {
        match self {
            // parallel layout: both tunnels point the same way
            GadgetKind::Locking2Toggle => &["a", "b", "d", "c"],
            k => k.ports(),
        }
    }

    /// Whether any permutation of the ports is an acceptable cyclic order.
    /// Otherwise only rotations of the default order are.
    fn any_order(self) -> bool {
        matches!(self, GadgetKind::Switch | GadgetKind::ReversibleFanIn)
    }

    pub fn is_framework(self) -> bool {
        matches!(self, GadgetKind::Switch | GadgetKind::ReversibleFanIn | GadgetKind::AbaCrossover)
    }
}

impl fmt::Display for GadgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GadgetKind::Switch => "Switch",
            GadgetKind::ReversibleFanIn => "ReversibleFanIn",
            GadgetKind::AbaCrossover => "AbaCrossover",
            GadgetKind::Spinner3 => "Spinner3",
            GadgetKind::Locking2Toggle => "Locking2Toggle",
            GadgetKind::RotateCw => "RotateCw",
            GadgetKind::RotateCcw => "RotateCcw",
        })
    }
}

impl FromStr for GadgetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GadgetKind::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown gadget kind `{s}`"))
    }
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn gizmo(kind: GadgetKind, seqs: &[&[(&str, &str)]]) -> Behavior {
    let ports = kind.ports();
    let idx = |p: &str| ports.iter().position(|q| *q == p).expect("catalog port");
    let base = seqs.iter().map(|s| s.iter().map(|&(a, b)| Traversal::new(idx(a), idx(b))).collect()).collect();
    Behavior::Gizmo(SequenceSpec::new(names(ports), base).expect("catalog gizmo is consistent"))
}

fn fsm(kind: GadgetKind) -> Behavior {
    let n = kind.ports().len();
    let (states, delta): (Vec<&str>, Vec<Vec<Option<(usize, usize)>>>) = match kind {
        GadgetKind::Spinner3 => (
            vec!["cw", "ccw"],
            vec![(0..n).map(|p| Some((1, (p + 1) % 3))).collect(), (0..n).map(|p| Some((0, (p + 2) % 3))).collect()],
        ),
        GadgetKind::RotateCw => (vec!["rotate"], vec![(0..n).map(|p| Some((0, (p + 1) % 3))).collect()]),
        GadgetKind::RotateCcw => (vec!["rotate"], vec![(0..n).map(|p| Some((0, (p + 2) % 3))).collect()]),
        GadgetKind::Locking2Toggle => {
            // ports a=0, b=1, c=2, d=3; closed entries bounce off
            let (a, b, c, d) = (0, 1, 2, 3);
            let bounce = |s: usize| -> Vec<Option<(usize, usize)>> { (0..n).map(|p| Some((s, p))).collect() };
            let mut parallel = bounce(0);
            parallel[a] = Some((1, b));
            parallel[c] = Some((2, d));
            let mut top = bounce(1);
            top[b] = Some((0, a));
            let mut bottom = bounce(2);
            bottom[d] = Some((0, c));
            (vec!["parallel", "top-reversed", "bottom-reversed"], vec![parallel, top, bottom])
        }
        _ => unreachable!("not an FSM gadget"),
    };
    Behavior::Fsm(FsmBehavior::new(names(kind.ports()), names(&states), 0, delta).expect("catalog FSM is well formed"))
}

fn behavior(kind: GadgetKind) -> Behavior {
    match kind {
        GadgetKind::Switch => gizmo(kind, &[&[("Set", "Out"), ("Test", "T-Out")], &[("Test", "F-Out")]]),
        GadgetKind::ReversibleFanIn => gizmo(kind, &[&[("a", "c")], &[("b", "c")]]),
        GadgetKind::AbaCrossover => gizmo(kind, &[&[("A", "a")], &[("B", "b"), ("A", "a")]]),
        _ => fsm(kind),
    }
}

fn is_rotation(order: &[usize], base: &[usize]) -> bool {
    order.len() == base.len()
        && (0..base.len()).any(|r| (0..base.len()).all(|i| order[i] == base[(i + r) % base.len()]))
}

/// Build a catalog gadget with the given cyclic order (default when `None`)
/// that starts after `initial_history`.
pub fn make_library_gadget(
    kind: GadgetKind,
    cyclic_order: Option<&[&str]>,
    initial_history: &[(&str, &str)],
) -> Result<Arc<GadgetTemplate>, GadgetError> {
    let ports = kind.ports();
    let lookup = |p: &str| ports.iter().position(|q| *q == p).ok_or_else(|| GadgetError::UnknownPort(p.to_string()));
    let order_names = cyclic_order.unwrap_or(kind.default_cyclic_order());
    let order = order_names.iter().map(|p| lookup(p)).collect::<Result<Vec<_>, _>>()?;
    let default: Vec<usize> = kind.default_cyclic_order().iter().map(|p| lookup(p).unwrap()).collect();
    let mut sorted = order.clone();
    sorted.sort_unstable();
    let valid = sorted == (0..ports.len()).collect::<Vec<_>>() && (kind.any_order() || is_rotation(&order, &default));
    if !valid {
        return Err(GadgetError::InvalidCyclicOrder { gadget: kind.to_string(), order: names(order_names) });
    }
    let history = initial_history
        .iter()
        .map(|&(a, b)| Ok(Traversal::new(lookup(a)?, lookup(b)?)))
        .collect::<Result<Vec<_>, GadgetError>>()?;
    let fresh = GadgetTemplate::new(kind.to_string(), Some(kind), behavior(kind), order, Vec::new())?;
    Ok(Arc::new(if history.is_empty() { fresh } else { fresh.after(&history)? }))
}

/// A catalog FSM gadget starting in the named state.
pub fn fsm_in_state(
    kind: GadgetKind,
    cyclic_order: Option<&[&str]>,
    state: &str,
) -> Result<Arc<GadgetTemplate>, GadgetError> {
    let base = make_library_gadget(kind, cyclic_order, &[])?;
    let Behavior::Fsm(machine) = base.behavior().clone() else {
        return Err(GadgetError::MalformedFsm(format!("{kind} is not a state machine")));
    };
    let s = machine
        .states()
        .iter()
        .position(|n| n == state)
        .ok_or_else(|| GadgetError::MalformedFsm(format!("{kind} has no state `{state}`")))?;
    let name = if s == machine.initial() { kind.to_string() } else { format!("{kind} in {state}") };
    Ok(Arc::new(GadgetTemplate::new(
        name,
        Some(kind),
        Behavior::Fsm(machine.with_initial(s)),
        base.cyclic_order().to_vec(),
        Vec::new(),
    )?))
}
