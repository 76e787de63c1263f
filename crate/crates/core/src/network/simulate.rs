//! Deterministic simulation of a network with trace recording and cycle detection.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Link, Network, PortRef};
use crate::gadgets::{GadgetState, PortIdx};

/// One gadget traversal of the signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    /// 1-based traversal count.
    pub step: u64,
    pub instance: usize,
    pub entry: PortIdx,
    pub exit: PortIdx,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub events: Vec<Event>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// `(instance, entry, exit)` triples, dropping step numbers.
    pub fn moves(&self) -> Vec<(usize, PortIdx, PortIdx)> {
        self.events.iter().map(|e| (e.instance, e.entry, e.exit)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// The gadget has no specified behavior for this entry.
    UnspecifiedTraversal,
    /// The signal exited into an unpaired port that is not the target.
    OpenPort,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Reached {
        step: u64,
        trace: Trace,
    },
    /// The configuration first seen before step `first_repeat + 1` recurred
    /// `period` steps later; the target is never reached.
    Cycled {
        first_repeat: u64,
        period: u64,
        trace: Trace,
    },
    StepLimit {
        trace: Trace,
    },
    Unspecified {
        instance: usize,
        port: PortIdx,
        step: u64,
        reason: StopReason,
        trace: Trace,
    },
}

impl Outcome {
    pub fn trace(&self) -> &Trace {
        match self {
            Outcome::Reached { trace, .. }
            | Outcome::Cycled { trace, .. }
            | Outcome::StepLimit { trace }
            | Outcome::Unspecified { trace, .. } => trace,
        }
    }

    pub fn is_reached(&self) -> bool {
        matches!(self, Outcome::Reached { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Reached { .. } => "reached",
            Outcome::Cycled { .. } => "cycled",
            Outcome::StepLimit { .. } => "step-limit",
            Outcome::Unspecified { .. } => "unspecified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub max_steps: u64,
    /// Maximum number of configurations remembered for cycle detection.
    pub cycle_memory: usize,
    pub record_trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { max_steps: 10_000_000, cycle_memory: 1_000_000, record_trace: true }
    }
}

/// Run the signal from the start port until it reaches the target, a
/// configuration repeats, a gadget rejects an entry, or a limit is hit.
///
/// Reaching means exiting through the target port or being about to enter
/// it; the target's own gadget is never stepped on arrival.
pub fn simulate(net: &Network, config: &SimConfig) -> Outcome {
    let mut states: Vec<GadgetState> = net.initial_states();
    let mut pos = net.start();
    let mut trace = Trace::default();
    let mut seen: HashMap<(Vec<GadgetState>, PortRef), u64> = HashMap::new();
    let target = net.target();
    let mut step: u64 = 0;

    if pos == target {
        return Outcome::Reached { step, trace };
    }
    loop {
        let key = (states.clone(), pos);
        if let Some(&first) = seen.get(&key) {
            return Outcome::Cycled { first_repeat: first, period: step - first, trace };
        }
        if seen.len() < config.cycle_memory {
            seen.insert(key, step);
        }
        if step >= config.max_steps {
            return Outcome::StepLimit { trace };
        }
        let inst = &net.instance(pos.instance).template;
        let (next, exit) = match inst.step(states[pos.instance], pos.port) {
            Ok(r) => r,
            Err(_) => {
                return Outcome::Unspecified {
                    instance: pos.instance,
                    port: pos.port,
                    step: step + 1,
                    reason: StopReason::UnspecifiedTraversal,
                    trace,
                }
            }
        };
        step += 1;
        states[pos.instance] = next;
        if config.record_trace {
            trace.events.push(Event { step, instance: pos.instance, entry: pos.port, exit });
        }
        let out = PortRef::new(pos.instance, exit);
        if out == target {
            return Outcome::Reached { step, trace };
        }
        pos = match net.link(out) {
            Link::Paired(q) => q,
            Link::Reflect => out,
            Link::Open => {
                return Outcome::Unspecified {
                    instance: out.instance,
                    port: out.port,
                    step,
                    reason: StopReason::OpenPort,
                    trace,
                }
            }
        };
        if pos == target {
            return Outcome::Reached { step, trace };
        }
    }
}
