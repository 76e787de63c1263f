//! Deterministic gadget behaviors.
//!
//! A gadget is either a sequence-defined gizmo (a set of base traversal
//! sequences closed under prefixes and time reversal) or an explicit
//! finite-state machine. Both are wrapped in a [`GadgetTemplate`], which also
//! fixes the cyclic order of the ports and an optional history the gadget
//! starts "after".

pub mod conformance;
mod fsm;
mod gizmo;
mod library;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fsm::FsmBehavior;
pub use gizmo::SequenceSpec;
pub use library::{fsm_in_state, make_library_gadget, GadgetKind};

pub type PortIdx = usize;

/// One pass of the signal through a gadget, `entry → exit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Traversal {
    pub entry: PortIdx,
    pub exit: PortIdx,
}

impl Traversal {
    pub fn new(entry: PortIdx, exit: PortIdx) -> Self {
        Traversal { entry, exit }
    }

    pub fn reversed(self) -> Self {
        Traversal { entry: self.exit, exit: self.entry }
    }
}

/// Time reverse of a traversal sequence: reverse the order and flip each traversal.
pub fn time_reverse(seq: &[Traversal]) -> Vec<Traversal> {
    seq.iter().rev().map(|t| t.reversed()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error("unknown port `{0}`")]
    UnknownPort(String),
    #[error("invalid cyclic order {order:?} for {gadget}")]
    InvalidCyclicOrder { gadget: String, order: Vec<String> },
    #[error("base sequences disagree after {prefix:?}: entry {entry} exits both {first} and {second}")]
    Nondeterministic { prefix: Vec<String>, entry: String, first: String, second: String },
    #[error("undo and extension disagree after {prefix:?} on entry {entry}")]
    PopConflict { prefix: Vec<String>, entry: String },
    #[error(
        "initial history is not implementable: traversal {step} ({entry} → {exit}) is unspecified or exits elsewhere"
    )]
    HistoryNotImplementable { step: usize, entry: String, exit: String },
    #[error("FSM transition table is malformed: {0}")]
    MalformedFsm(String),
}

/// The gadget rejected an entry: the signal arrived in an unspecified situation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("unspecified traversal: entry at port {entry}")]
pub struct Unspecified {
    pub entry: PortIdx,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Behavior {
    Gizmo(SequenceSpec),
    Fsm(FsmBehavior),
}

/// Runtime state of one gadget instance. A gizmo state is the node of its
/// prefix trie, which is in bijection with the reduced-history stack; an FSM
/// state is the state index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GadgetState(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetTemplate {
    name: String,
    kind: Option<GadgetKind>,
    ports: Vec<String>,
    cyclic_order: Vec<PortIdx>,
    behavior: Behavior,
    initial_history: Vec<Traversal>,
    initial_state: GadgetState,
}

impl GadgetTemplate {
    /// Build a template, validating `cyclic_order` is a permutation of the
    /// ports and applying `initial_history` to the fresh state.
    pub fn new(
        name: impl Into<String>,
        kind: Option<GadgetKind>,
        behavior: Behavior,
        cyclic_order: Vec<PortIdx>,
        initial_history: Vec<Traversal>,
    ) -> Result<Self, GadgetError> {
        let name = name.into();
        let ports = match &behavior {
            Behavior::Gizmo(s) => s.ports().to_vec(),
            Behavior::Fsm(m) => m.ports().to_vec(),
        };
        let mut sorted = cyclic_order.clone();
        sorted.sort_unstable();
        if sorted != (0..ports.len()).collect::<Vec<_>>() {
            return Err(GadgetError::InvalidCyclicOrder {
                gadget: name,
                order: cyclic_order.iter().map(|&p| ports.get(p).cloned().unwrap_or_else(|| p.to_string())).collect(),
            });
        }
        let mut template = GadgetTemplate {
            name,
            kind,
            ports,
            cyclic_order,
            behavior,
            initial_history: Vec::new(),
            initial_state: GadgetState(0),
        };
        let mut state = template.fresh_state();
        for (i, t) in initial_history.iter().enumerate() {
            match template.step(state, t.entry) {
                Ok((next, exit)) if exit == t.exit => state = next,
                _ => {
                    return Err(GadgetError::HistoryNotImplementable {
                        step: i + 1,
                        entry: template.ports[t.entry].clone(),
                        exit: template.ports[t.exit].clone(),
                    })
                }
            }
        }
        template.initial_history = initial_history;
        template.initial_state = state;
        Ok(template)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> Option<GadgetKind> {
        self.kind
    }

    pub fn ports(&self) -> &[String] {
        &self.ports
    }

    pub fn num_ports(&self) -> usize {
        self.ports.len()
    }

    pub fn cyclic_order(&self) -> &[PortIdx] {
        &self.cyclic_order
    }

    pub fn behavior(&self) -> &Behavior {
        &self.behavior
    }

    pub fn initial_history(&self) -> &[Traversal] {
        &self.initial_history
    }

    pub fn port(&self, name: &str) -> Result<PortIdx, GadgetError> {
        self.ports.iter().position(|p| p == name).ok_or_else(|| GadgetError::UnknownPort(name.to_string()))
    }

    /// Traversal from port names.
    pub fn traversal(&self, entry: &str, exit: &str) -> Result<Traversal, GadgetError> {
        Ok(Traversal::new(self.port(entry)?, self.port(exit)?))
    }

    pub fn traversals(&self, seq: &[(&str, &str)]) -> Result<Vec<Traversal>, GadgetError> {
        seq.iter().map(|(a, b)| self.traversal(a, b)).collect()
    }

    pub fn show(&self, t: Traversal) -> String {
        format!("{}→{}", self.ports[t.entry], self.ports[t.exit])
    }

    /// State of a freshly built instance (after the initial history).
    pub fn initial_state(&self) -> GadgetState {
        self.initial_state
    }

    /// State before any history was applied.
    pub fn fresh_state(&self) -> GadgetState {
        match &self.behavior {
            Behavior::Gizmo(_) => GadgetState(0),
            Behavior::Fsm(m) => GadgetState(m.initial() as u32),
        }
    }

    /// The same gadget, starting after `history` from its current initial state.
    pub fn after(&self, history: &[Traversal]) -> Result<GadgetTemplate, GadgetError> {
        let mut full = self.initial_history.clone();
        full.extend_from_slice(history);
        let mut name = self.kind.map(|k| k.to_string()).unwrap_or_else(|| self.name.clone());
        if !full.is_empty() {
            let shown: Vec<String> = full.iter().map(|&t| self.show(t)).collect();
            name = format!("{name} after [{}]", shown.join(", "));
        }
        GadgetTemplate::new(name, self.kind, self.behavior.clone(), self.cyclic_order.clone(), full)
    }

    /// One signal pass: returns the new state and the exit port.
    pub fn step(&self, state: GadgetState, entry: PortIdx) -> Result<(GadgetState, PortIdx), Unspecified> {
        match &self.behavior {
            Behavior::Gizmo(spec) => spec.step(state, entry),
            Behavior::Fsm(m) => m.step(state, entry),
        }
        .ok_or(Unspecified { entry })
    }

    /// Reduced history of a gizmo state, or `None` for FSM gadgets.
    pub fn reduced_history(&self, state: GadgetState) -> Option<Vec<Traversal>> {
        match &self.behavior {
            Behavior::Gizmo(spec) => Some(spec.history(state)),
            Behavior::Fsm(_) => None,
        }
    }

    /// Human-readable state label.
    pub fn describe_state(&self, state: GadgetState) -> String {
        match &self.behavior {
            Behavior::Gizmo(spec) => {
                let h: Vec<String> = spec.history(state).iter().map(|&t| self.show(t)).collect();
                format!("[{}]", h.join(", "))
            }
            Behavior::Fsm(m) => m.state_name(state.0 as usize).to_string(),
        }
    }

    /// Whether a fresh instance (in its initial state) implements `seq`.
    pub fn implements(&self, seq: &[Traversal]) -> bool {
        let mut state = self.initial_state;
        for t in seq {
            match self.step(state, t.entry) {
                Ok((next, exit)) if exit == t.exit => state = next,
                _ => return false,
            }
        }
        true
    }

    /// Check `X X⁻¹ Y` given that `X` and `Y` are each implemented.
    pub fn reversal_closure_holds(&self, x: &[Traversal], y: &[Traversal]) -> Result<bool, ClosurePrecondition> {
        if !self.implements(x) {
            return Err(ClosurePrecondition::X);
        }
        if !self.implements(y) {
            return Err(ClosurePrecondition::Y);
        }
        let mut seq = x.to_vec();
        seq.extend(time_reverse(x));
        seq.extend_from_slice(y);
        Ok(self.implements(&seq))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let names = |seq: &[Traversal]| -> Vec<[String; 2]> {
            seq.iter().map(|t| [self.ports[t.entry].clone(), self.ports[t.exit].clone()]).collect()
        };
        let behavior = match &self.behavior {
            Behavior::Gizmo(spec) => serde_json::json!({
                "type": "sequences",
                "base_sequences": spec.base_sequences().iter().map(|s| names(s)).collect::<Vec<_>>(),
            }),
            Behavior::Fsm(m) => m.to_json(),
        };
        serde_json::json!({
            "name": self.name,
            "kind": self.kind.map(|k| k.to_string()),
            "ports": self.ports,
            "cyclic_order": self.cyclic_order.iter().map(|&p| self.ports[p].clone()).collect::<Vec<_>>(),
            "behavior": behavior,
            "initial_history": names(&self.initial_history),
        })
    }
}

impl fmt::Display for GadgetTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ClosurePrecondition {
    #[error("X is not implemented by the gadget")]
    X,
    #[error("Y is not implemented by the gadget")]
    Y,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn switch(history: &[(&str, &str)]) -> std::sync::Arc<GadgetTemplate> {
        make_library_gadget(GadgetKind::Switch, None, history).unwrap()
    }

    fn exit_of(t: &GadgetTemplate, entry: &str) -> String {
        let (_, exit) = t.step(t.initial_state(), t.port(entry).unwrap()).unwrap();
        t.ports()[exit].clone()
    }

    #[test]
    fn switch_table_entries() {
        assert_eq!(exit_of(&switch(&[]), "Test"), "F-Out");
        assert_eq!(exit_of(&switch(&[("Set", "Out")]), "Test"), "T-Out");
        assert_eq!(exit_of(&switch(&[("Set", "Out"), ("Test", "T-Out")]), "T-Out"), "Test");
    }

    #[test]
    fn switch_reuse_sequence() {
        let s = switch(&[]);
        let seq = s
            .traversals(&[("Set", "Out"), ("Test", "T-Out"), ("T-Out", "Test"), ("Out", "Set"), ("Test", "F-Out")])
            .unwrap();
        assert!(s.implements(&seq));
        assert!(!s.implements(&s.traversals(&[("Test", "T-Out")]).unwrap()));
        assert!(s.implements(&[]));
    }

    #[test]
    fn unspecified_entry_is_an_error() {
        let s = switch(&[]);
        assert!(s.step(s.initial_state(), s.port("Out").unwrap()).is_err());
    }

    #[test]
    fn closure_examples() {
        let s = switch(&[]);
        let x = s.traversals(&[("Set", "Out")]).unwrap();
        let y = s.traversals(&[("Test", "F-Out")]).unwrap();
        assert_eq!(s.reversal_closure_holds(&x, &y), Ok(true));

        let f = make_library_gadget(GadgetKind::ReversibleFanIn, None, &[]).unwrap();
        let x = f.traversals(&[("a", "c")]).unwrap();
        let y = f.traversals(&[("b", "c")]).unwrap();
        assert_eq!(f.reversal_closure_holds(&x, &y), Ok(true));
        assert_eq!(f.reversal_closure_holds(&x, &x), Ok(true));
        let bad = f.traversals(&[("c", "a")]).unwrap();
        assert_eq!(f.reversal_closure_holds(&bad, &y), Err(ClosurePrecondition::X));

        let sp = make_library_gadget(GadgetKind::Spinner3, None, &[]).unwrap();
        let x = sp.traversals(&[("a1", "a2")]).unwrap();
        let y = sp.traversals(&[("a3", "a1")]).unwrap();
        assert_eq!(sp.reversal_closure_holds(&x, &y), Ok(true));
    }

    #[test]
    fn crossover_sequences() {
        let c = make_library_gadget(GadgetKind::AbaCrossover, Some(&["A", "B", "a", "b"]), &[]).unwrap();
        assert!(c.implements(&c.traversals(&[("A", "a")]).unwrap()));
        assert!(c.implements(&c.traversals(&[("B", "b"), ("A", "a")]).unwrap()));
        assert!(!c.implements(&c.traversals(&[("A", "a"), ("B", "b")]).unwrap()));
        let after = make_library_gadget(GadgetKind::AbaCrossover, None, &[("A", "a")]).unwrap();
        assert!(after.implements(&after.traversals(&[("a", "A"), ("B", "b"), ("A", "a")]).unwrap()));
    }

    #[test]
    fn after_variants_from_captions() {
        let top = switch(&[("Test", "F-Out")]);
        assert_eq!(exit_of(&top, "F-Out"), "Test");
        let fan = make_library_gadget(GadgetKind::ReversibleFanIn, None, &[("a", "c")]).unwrap();
        assert_eq!(exit_of(&fan, "c"), "a");
        assert!(matches!(
            make_library_gadget(GadgetKind::Switch, None, &[("Test", "T-Out")]),
            Err(GadgetError::HistoryNotImplementable { step: 1, .. })
        ));
    }

    #[test]
    fn cyclic_order_validation() {
        assert!(make_library_gadget(GadgetKind::Switch, Some(&["Test", "Set", "F-Out", "Out", "T-Out"]), &[]).is_ok());
        assert!(make_library_gadget(GadgetKind::AbaCrossover, Some(&["B", "a", "b", "A"]), &[]).is_ok());
        assert!(make_library_gadget(GadgetKind::AbaCrossover, Some(&["A", "a", "B", "b"]), &[]).is_err());
        assert!(make_library_gadget(GadgetKind::Switch, Some(&["Set", "Out"]), &[]).is_err());
    }

    #[test]
    fn fsm_gadgets() {
        let l = make_library_gadget(GadgetKind::Locking2Toggle, None, &[("a", "b")]).unwrap();
        // the c→d tunnel is locked: bounce
        assert_eq!(exit_of(&l, "c"), "c");
        assert_eq!(exit_of(&l, "b"), "a");
        let r = make_library_gadget(GadgetKind::RotateCw, None, &[]).unwrap();
        for (p, q) in [("r1", "r2"), ("r2", "r3"), ("r3", "r1")] {
            let (s, _) = r.step(r.initial_state(), r.port(p).unwrap()).unwrap();
            assert_eq!(s, r.initial_state());
            assert_eq!(exit_of(&r, p), q);
        }
        let sp = make_library_gadget(GadgetKind::Spinner3, None, &[]).unwrap();
        let (s, exit) = sp.step(sp.initial_state(), 0).unwrap();
        assert_eq!((sp.describe_state(s).as_str(), exit), ("ccw", 1));
        let ccw = fsm_in_state(GadgetKind::Spinner3, None, "ccw").unwrap();
        assert_eq!(exit_of(&ccw, "a1"), "a3");
    }

    #[test]
    fn inconsistent_sequences_are_rejected() {
        let ports = vec!["p".to_string(), "q".to_string(), "r".to_string()];
        let t = |a, b| Traversal::new(a, b);
        assert!(matches!(
            SequenceSpec::new(ports.clone(), vec![vec![t(0, 1)], vec![t(0, 2)]]),
            Err(GadgetError::Nondeterministic { .. })
        ));
        // after p→q, entering q both undoes (exit p) and extends (exit r)
        assert!(matches!(SequenceSpec::new(ports, vec![vec![t(0, 1), t(1, 2)]]), Err(GadgetError::PopConflict { .. })));
    }

    #[test]
    fn json_export_names_ports() {
        let v = switch(&[("Set", "Out")]).to_json();
        assert_eq!(v["initial_history"][0][0], "Set");
        assert_eq!(v["behavior"]["type"], "sequences");
        let v = make_library_gadget(GadgetKind::Spinner3, None, &[]).unwrap().to_json();
        assert_eq!(v["behavior"]["states"][0], "cw");
    }
}
