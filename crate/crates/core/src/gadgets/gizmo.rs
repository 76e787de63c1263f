//! Prefix-closed sequence gadgets (gizmos) and their state trie.

use serde::{Deserialize, Serialize};

use super::{GadgetError, GadgetState, PortIdx, Traversal};

/// Prefix trie over the base sequences. Node 0 is the empty history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct TrieNode {
    parent: Option<(u32, Traversal)>,
    children: Vec<(PortIdx, PortIdx, u32)>,
}

/// A gadget given by the traversal sequences it implements.
///
/// The operational model is a reduced-history stack: an entry at the exit
/// port of the most recent traversal undoes it, otherwise the history is
/// extended along a base sequence. The stack is always a prefix of a base
/// sequence, so states are the nodes of the prefix trie.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceSpec {
    ports: Vec<String>,
    base_sequences: Vec<Vec<Traversal>>,
    trie: Vec<TrieNode>,
}

impl SequenceSpec {
    pub fn new(ports: Vec<String>, base_sequences: Vec<Vec<Traversal>>) -> Result<Self, GadgetError> {
        let mut trie = vec![TrieNode { parent: None, children: Vec::new() }];
        let show = |ports: &[String], seq: &[Traversal]| -> Vec<String> {
            seq.iter().map(|t| format!("{}→{}", ports[t.entry], ports[t.exit])).collect()
        };
        for seq in &base_sequences {
            let mut node = 0u32;
            for (i, &t) in seq.iter().enumerate() {
                if t.entry >= ports.len() || t.exit >= ports.len() {
                    return Err(GadgetError::UnknownPort(format!("{}", t.entry.max(t.exit))));
                }
                let existing = trie[node as usize].children.iter().find(|c| c.0 == t.entry).copied();
                node = match existing {
                    Some((_, exit, child)) if exit == t.exit => child,
                    Some((_, exit, _)) => {
                        return Err(GadgetError::Nondeterministic {
                            prefix: show(&ports, &seq[..i]),
                            entry: ports[t.entry].clone(),
                            first: ports[exit].clone(),
                            second: ports[t.exit].clone(),
                        })
                    }
                    None => {
                        let id = trie.len() as u32;
                        trie.push(TrieNode { parent: Some((node, t)), children: Vec::new() });
                        trie[node as usize].children.push((t.entry, t.exit, id));
                        id
                    }
                };
            }
        }
        let spec = SequenceSpec { ports, base_sequences, trie };
        // An entry that can both undo and extend must agree on the exit.
        for (id, node) in spec.trie.iter().enumerate() {
            if let Some((_, last)) = node.parent {
                if let Some(&(_, exit, _)) = node.children.iter().find(|c| c.0 == last.exit) {
                    if exit != last.entry {
                        return Err(GadgetError::PopConflict {
                            prefix: show(&spec.ports, &spec.history(GadgetState(id as u32))),
                            entry: spec.ports[last.exit].clone(),
                        });
                    }
                }
            }
        }
        Ok(spec)
    }

    pub fn ports(&self) -> &[String] {
        &self.ports
    }

    pub fn base_sequences(&self) -> &[Vec<Traversal>] {
        &self.base_sequences
    }

    pub fn num_states(&self) -> usize {
        self.trie.len()
    }

    pub(crate) fn step(&self, state: GadgetState, entry: PortIdx) -> Option<(GadgetState, PortIdx)> {
        let node = self.trie.get(state.0 as usize)?;
        if let Some((parent, last)) = node.parent {
            if last.exit == entry {
                return Some((GadgetState(parent), last.entry));
            }
        }
        node.children.iter().find(|c| c.0 == entry).map(|&(_, exit, child)| (GadgetState(child), exit))
    }

    pub fn history(&self, state: GadgetState) -> Vec<Traversal> {
        let mut out = Vec::new();
        let mut node = state.0;
        while let Some((parent, t)) = self.trie[node as usize].parent {
            out.push(t);
            node = parent;
        }
        out.reverse();
        out
    }
}
