//! Sub-networks used as gadgets: a set of instances with internal pairings
//! and named external ports.

use std::sync::Arc;

use thiserror::Error;

use super::PortRef;
use crate::gadgets::{GadgetState, GadgetTemplate, PortIdx};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompositeError {
    #[error("unknown external port `{0}`")]
    UnknownPort(String),
    #[error("port {0} is linked twice")]
    DoubleLink(String),
    #[error("entry at {0} is unspecified")]
    Unspecified(String),
    #[error("signal exited at unlinked internal port {0}")]
    Dangling(String),
    #[error("signal did not leave the sub-network within {0} steps")]
    NoExit(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Free,
    Internal(PortRef),
    External(usize),
}

/// Where an external port leads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExternalEnd {
    Port(PortRef),
    /// A bare wire to another external port.
    Wire(usize),
}

/// A sub-network with named external ports. Internal ports pair with each
/// other; every other port must be external.
#[derive(Debug, Clone)]
pub struct Composite {
    name: String,
    instances: Vec<(String, Arc<GadgetTemplate>)>,
    slots: Vec<Vec<Slot>>,
    external: Vec<(String, ExternalEnd)>,
    step_limit: u64,
}

/// Result of driving one entry through a [`Composite`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeTraversal {
    pub exit: usize,
    /// Internal gadget traversals, in order, as `(instance, entry, exit)`.
    pub moves: Vec<(usize, PortIdx, PortIdx)>,
}

impl Composite {
    pub fn new(
        name: impl Into<String>,
        instances: Vec<(String, Arc<GadgetTemplate>)>,
        internal: &[(PortRef, PortRef)],
        external: Vec<(String, PortRef)>,
    ) -> Result<Self, CompositeError> {
        let mut c = Composite {
            name: name.into(),
            slots: instances.iter().map(|(_, t)| vec![Slot::Free; t.num_ports()]).collect(),
            instances,
            external: Vec::new(),
            step_limit: 100_000,
        };
        for &(p, q) in internal {
            c.claim(p, Slot::Internal(q))?;
            if p != q {
                c.claim(q, Slot::Internal(p))?;
            }
        }
        for (name, p) in external {
            c.claim(p, Slot::External(c.external.len()))?;
            c.external.push((name, ExternalEnd::Port(p)));
        }
        Ok(c)
    }

    fn claim(&mut self, p: PortRef, s: Slot) -> Result<(), CompositeError> {
        if self.slots[p.instance][p.port] != Slot::Free {
            return Err(CompositeError::DoubleLink(self.port_name(p)));
        }
        self.slots[p.instance][p.port] = s;
        Ok(())
    }

    /// Add two external ports joined by a bare wire.
    pub fn add_wire(&mut self, a: impl Into<String>, b: impl Into<String>) {
        let i = self.external.len();
        self.external.push((a.into(), ExternalEnd::Wire(i + 1)));
        self.external.push((b.into(), ExternalEnd::Wire(i)));
    }

    pub fn with_step_limit(mut self, limit: u64) -> Self {
        self.step_limit = limit;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn instances(&self) -> &[(String, Arc<GadgetTemplate>)] {
        &self.instances
    }

    pub fn external(&self) -> &[(String, ExternalEnd)] {
        &self.external
    }

    /// Gadget port behind external port `i`, unless it is a bare wire.
    pub fn external_port(&self, i: usize) -> Option<PortRef> {
        match self.external[i].1 {
            ExternalEnd::Port(p) => Some(p),
            ExternalEnd::Wire(_) => None,
        }
    }

    pub fn external_names(&self) -> Vec<String> {
        self.external.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn external_index(&self, name: &str) -> Result<usize, CompositeError> {
        self.external.iter().position(|(n, _)| n == name).ok_or_else(|| CompositeError::UnknownPort(name.to_string()))
    }

    /// Internal pairs, each listed once (a self-pair is a reflector).
    pub fn internal_pairs(&self) -> Vec<(PortRef, PortRef)> {
        let mut out = Vec::new();
        for (i, row) in self.slots.iter().enumerate() {
            for (p, s) in row.iter().enumerate() {
                let here = PortRef::new(i, p);
                if let Slot::Internal(q) = *s {
                    if here <= q {
                        out.push((here, q));
                    }
                }
            }
        }
        out
    }

    pub fn port_name(&self, p: PortRef) -> String {
        let (id, t) = &self.instances[p.instance];
        format!("{id}.{}", t.ports()[p.port])
    }

    pub fn initial_states(&self) -> Vec<GadgetState> {
        self.instances.iter().map(|(_, t)| t.initial_state()).collect()
    }

    /// Drive the signal in at external port `entry` until it leaves.
    pub fn step(&self, states: &mut [GadgetState], entry: usize) -> Result<CompositeTraversal, CompositeError> {
        let mut pos = match self.external[entry].1 {
            ExternalEnd::Port(p) => p,
            ExternalEnd::Wire(other) => return Ok(CompositeTraversal { exit: other, moves: Vec::new() }),
        };
        let mut moves = Vec::new();
        for _ in 0..self.step_limit {
            let t = &self.instances[pos.instance].1;
            let (next, exit) =
                t.step(states[pos.instance], pos.port).map_err(|_| CompositeError::Unspecified(self.port_name(pos)))?;
            states[pos.instance] = next;
            moves.push((pos.instance, pos.port, exit));
            let out = PortRef::new(pos.instance, exit);
            pos = match self.slots[out.instance][out.port] {
                Slot::Internal(q) => q,
                Slot::External(i) => return Ok(CompositeTraversal { exit: i, moves }),
                Slot::Free => return Err(CompositeError::Dangling(self.port_name(out))),
            };
        }
        Err(CompositeError::NoExit(self.step_limit))
    }

    /// Drive a whole entry sequence from the initial states; returns the
    /// final states and the exits taken.
    pub fn drive(&self, entries: &[usize]) -> Result<(Vec<GadgetState>, Vec<usize>), CompositeError> {
        let mut states = self.initial_states();
        let mut exits = Vec::new();
        for &e in entries {
            exits.push(self.step(&mut states, e)?.exit);
        }
        Ok((states, exits))
    }
}
