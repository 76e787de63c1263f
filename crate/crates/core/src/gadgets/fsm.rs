//! Table-driven finite-state gadgets.

use serde::{Deserialize, Serialize};

use super::{GadgetError, GadgetState, PortIdx};

/// An explicit deterministic port-transition machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsmBehavior {
    ports: Vec<String>,
    states: Vec<String>,
    initial: usize,
    /// `delta[state][entry] = (next state, exit)`
    delta: Vec<Vec<Option<(usize, PortIdx)>>>,
}

impl FsmBehavior {
    pub fn new(
        ports: Vec<String>,
        states: Vec<String>,
        initial: usize,
        delta: Vec<Vec<Option<(usize, PortIdx)>>>,
    ) -> Result<Self, GadgetError> {
        if initial >= states.len() || delta.len() != states.len() {
            return Err(GadgetError::MalformedFsm(format!(
                "{} states, {} table rows, initial {initial}",
                states.len(),
                delta.len()
            )));
        }
        for (s, row) in delta.iter().enumerate() {
            if row.len() != ports.len() {
                return Err(GadgetError::MalformedFsm(format!("row {s} has {} entries", row.len())));
            }
            for &(next, exit) in row.iter().flatten() {
                if next >= states.len() || exit >= ports.len() {
                    return Err(GadgetError::MalformedFsm(format!("row {s} points outside the table")));
                }
            }
        }
        Ok(FsmBehavior { ports, states, initial, delta })
    }

    pub fn ports(&self) -> &[String] {
        &self.ports
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn with_initial(mut self, state: usize) -> Self {
        assert!(state < self.states.len());
        self.initial = state;
        self
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.states[s]
    }

    pub(crate) fn step(&self, state: GadgetState, entry: PortIdx) -> Option<(GadgetState, PortIdx)> {
        let (next, exit) = (*self.delta.get(state.0 as usize)?.get(entry)?)?;
        Some((GadgetState(next as u32), exit))
    }

    pub(crate) fn to_json(&self) -> serde_json::Value {
        let table: Vec<serde_json::Value> = self
            .delta
            .iter()
            .enumerate()
            .flat_map(|(s, row)| {
                row.iter().enumerate().filter_map(move |(p, cell)| {
                    cell.map(|(n, e)| {
                        serde_json::json!({
                            "state": self.states[s],
                            "entry": self.ports[p],
                            "next": self.states[n],
                            "exit": self.ports[e],
                        })
                    })
                })
            })
            .collect();
        serde_json::json!({
            "type": "fsm",
            "states": self.states,
            "initial": self.states[self.initial],
            "transitions": table,
        })
    }
}
