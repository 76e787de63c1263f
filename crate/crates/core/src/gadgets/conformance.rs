//! Black-box conformance checks: drive an implementation through the
//! traversal sequences of a reference gadget and compare exits and states.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use rand::Rng;
use serde::Serialize;

use super::{time_reverse, Behavior, GadgetState, GadgetTemplate, Traversal};
use crate::network::Composite;

/// Anything that can be driven one entry at a time.
pub trait BlackBox {
    type State: Clone + Eq + Hash;
    fn port_names(&self) -> Vec<String>;
    fn initial(&self) -> Self::State;
    fn enter(&self, state: &Self::State, port: usize) -> Option<(Self::State, usize)>;
}

impl BlackBox for GadgetTemplate {
    type State = GadgetState;

    fn port_names(&self) -> Vec<String> {
        self.ports().to_vec()
    }

    fn initial(&self) -> GadgetState {
        self.initial_state()
    }

    fn enter(&self, state: &GadgetState, port: usize) -> Option<(GadgetState, usize)> {
        self.step(*state, port).ok()
    }
}

impl BlackBox for Composite {
    type State = Vec<GadgetState>;

    fn port_names(&self) -> Vec<String> {
        self.external_names()
    }

    fn initial(&self) -> Vec<GadgetState> {
        self.initial_states()
    }

    fn enter(&self, state: &Vec<GadgetState>, port: usize) -> Option<(Vec<GadgetState>, usize)> {
        let mut next = state.clone();
        let t = self.step(&mut next, port).ok()?;
        Some((next, t.exit))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Mismatch {
    /// The implementation has no port of this name.
    MissingPort(String),
    /// At position `index` the implementation exited elsewhere (or nowhere).
    Exit { index: usize, entry: String, expected: String, found: Option<String> },
    /// After the sequence and its time reverse the state differs from the start.
    NotRestored,
}

/// Port-name translation from a reference gadget to an implementation.
fn port_map(reference: &[String], imp: &[String]) -> Result<Vec<usize>, Mismatch> {
    reference.iter().map(|p| imp.iter().position(|q| q == p).ok_or_else(|| Mismatch::MissingPort(p.clone()))).collect()
}

/// Drive `seq` (named by `reference` ports) into a fresh `imp`.
pub fn check_sequence<B: BlackBox>(
    imp: &B,
    reference: &GadgetTemplate,
    seq: &[Traversal],
) -> Result<B::State, Mismatch> {
    let names = imp.port_names();
    let map = port_map(reference.ports(), &names)?;
    let mut state = imp.initial();
    for (index, t) in seq.iter().enumerate() {
        let got = imp.enter(&state, map[t.entry]);
        match got {
            Some((next, exit)) if exit == map[t.exit] => state = next,
            other => {
                return Err(Mismatch::Exit {
                    index,
                    entry: reference.ports()[t.entry].clone(),
                    expected: reference.ports()[t.exit].clone(),
                    found: other.map(|(_, e)| names[e].clone()),
                })
            }
        }
    }
    Ok(state)
}

/// Drive `seq` followed by its time reverse and require the initial state back.
pub fn check_with_reverse<B: BlackBox>(imp: &B, reference: &GadgetTemplate, seq: &[Traversal]) -> Result<(), Mismatch> {
    let mut full = seq.to_vec();
    full.extend(time_reverse(seq));
    let end = check_sequence(imp, reference, &full)?;
    if end == imp.initial() {
        Ok(())
    } else {
        Err(Mismatch::NotRestored)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProductReport {
    /// Reachable (reference state, implementation state) pairs explored.
    pub pairs: usize,
    /// Shortest failing entry sequence, with the mismatch, if any.
    pub failure: Option<(Vec<String>, Mismatch)>,
    pub complete: bool,
}

impl ProductReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.complete
    }
}

/// Exhaustive check that `imp` agrees with `reference` on every entry the
/// reference specifies, from every jointly reachable state pair.
pub fn product_conformance<B: BlackBox>(imp: &B, reference: &GadgetTemplate, max_pairs: usize) -> ProductReport {
    let names = imp.port_names();
    let map = match port_map(reference.ports(), &names) {
        Ok(m) => m,
        Err(e) => return ProductReport { pairs: 0, failure: Some((Vec::new(), e)), complete: false },
    };
    type Key<S> = (GadgetState, S);
    let start: Key<B::State> = (reference.initial_state(), imp.initial());
    let mut parent: HashMap<Key<B::State>, Option<(Key<B::State>, usize)>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([start]);
    let path_to = |parent: &HashMap<Key<B::State>, Option<(Key<B::State>, usize)>>, mut k: Key<B::State>| {
        let mut out = Vec::new();
        while let Some(Some((prev, p))) = parent.get(&k) {
            out.push(reference.ports()[*p].clone());
            k = prev.clone();
        }
        out.reverse();
        out
    };
    while let Some(key) = queue.pop_front() {
        for entry in 0..reference.num_ports() {
            let Ok((rs, rexit)) = reference.step(key.0, entry) else { continue };
            match imp.enter(&key.1, map[entry]) {
                Some((is, iexit)) if iexit == map[rexit] => {
                    let next = (rs, is);
                    if !parent.contains_key(&next) {
                        if parent.len() >= max_pairs {
                            return ProductReport { pairs: parent.len(), failure: None, complete: false };
                        }
                        parent.insert(next.clone(), Some((key.clone(), entry)));
                        queue.push_back(next);
                    }
                }
                other => {
                    let mut path = path_to(&parent, key.clone());
                    path.push(reference.ports()[entry].clone());
                    let index = path.len() - 1;
                    let failure = Mismatch::Exit {
                        index,
                        entry: reference.ports()[entry].clone(),
                        expected: reference.ports()[rexit].clone(),
                        found: other.map(|(_, e)| names[e].clone()),
                    };
                    return ProductReport { pairs: parent.len(), failure: Some((path, failure)), complete: false };
                }
            }
        }
    }
    ProductReport { pairs: parent.len(), failure: None, complete: true }
}

/// All prefixes of the base sequences of a gizmo (empty for FSM gadgets).
pub fn base_prefixes(t: &GadgetTemplate) -> Vec<Vec<Traversal>> {
    let Behavior::Gizmo(spec) = t.behavior() else { return Vec::new() };
    let mut out = vec![Vec::new()];
    for seq in spec.base_sequences() {
        for k in 1..=seq.len() {
            let p = seq[..k].to_vec();
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

/// A random sequence built from base-sequence prefixes by repeatedly
/// applying the closure rule `X, Y ⟹ X X⁻¹ Y`. Every result is in the
/// implemented set of a fresh gizmo by definition.
pub fn random_closed_sequence<R: Rng>(t: &GadgetTemplate, rounds: usize, rng: &mut R) -> Vec<Traversal> {
    let prefixes = base_prefixes(t);
    assert!(!prefixes.is_empty(), "closure sequences need a gizmo");
    let pick = |rng: &mut R| prefixes[rng.gen_range(0..prefixes.len())].clone();
    let mut cur = pick(rng);
    for _ in 0..rounds {
        let y = if rng.gen_bool(0.5) { pick(rng) } else { cur.clone() };
        // X is either the running sequence or a fresh prefix
        let x = if rng.gen_bool(0.5) { cur.clone() } else { pick(rng) };
        let mut next = x.clone();
        next.extend(time_reverse(&x));
        next.extend(y);
        cur = next;
    }
    cur
}
