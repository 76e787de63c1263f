//! Networks of gadget instances joined by a port pairing, and the
//! single-signal simulation over them.

mod composite;
mod export;
mod simulate;
mod usage;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gadgets::{GadgetError, GadgetState, GadgetTemplate, PortIdx};

pub use composite::{Composite, CompositeError, CompositeTraversal, ExternalEnd};
pub use export::{
    network_from_json, network_to_dot, network_to_json, trace_to_dot, trace_to_json, InstanceSpec, NetworkSpec,
};
pub use simulate::{simulate, Event, Outcome, SimConfig, StopReason, Trace};
pub use usage::{
    check_crossing_discipline, edge_usage, CrossingCheck, CrossoverInit, EdgeTraversal, EdgeUsage, UsageError,
    UsageInterval,
};

/// A port of a specific gadget instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortRef {
    pub instance: usize,
    pub port: PortIdx,
}

impl PortRef {
    pub fn new(instance: usize, port: PortIdx) -> Self {
        PortRef { instance, port }
    }
}

/// What a port is connected to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Link {
    Paired(PortRef),
    /// Paired with itself: a signal exiting here re-enters the same port.
    Reflect,
    /// Unpaired terminal.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

/// The far side of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeEnd {
    Port(PortRef),
    Reflector,
    Terminal,
}

/// A pairing edge. `a` is the smaller port when both ends are ports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub a: PortRef,
    pub b: EdgeEnd,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub id: String,
    pub template: Arc<GadgetTemplate>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("duplicate instance id `{0}`")]
    DuplicateInstance(String),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("instance `{instance}`: {source}")]
    Port { instance: String, source: GadgetError },
    #[error("port {0} is already linked")]
    AlreadyLinked(String),
    #[error("network has no {0} port")]
    Missing(&'static str),
    #[error("invalid network description: {0}")]
    Format(String),
}

#[derive(Debug, Clone)]
pub struct Network {
    instances: Vec<Instance>,
    links: Vec<Vec<Link>>,
    start: PortRef,
    target: PortRef,
    edges: Vec<Edge>,
    edge_of: Vec<Vec<EdgeId>>,
}

impl Network {
    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn instance(&self, i: usize) -> &Instance {
        &self.instances[i]
    }

    pub fn instance_index(&self, id: &str) -> Option<usize> {
        self.instances.iter().position(|inst| inst.id == id)
    }

    pub fn link(&self, p: PortRef) -> Link {
        self.links[p.instance][p.port]
    }

    pub fn start(&self) -> PortRef {
        self.start
    }

    pub fn target(&self) -> PortRef {
        self.target
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_at(&self, p: PortRef) -> EdgeId {
        self.edge_of[p.instance][p.port]
    }

    pub fn initial_states(&self) -> Vec<GadgetState> {
        self.instances.iter().map(|i| i.template.initial_state()).collect()
    }

    pub fn port_name(&self, p: PortRef) -> String {
        let inst = &self.instances[p.instance];
        format!("{}.{}", inst.id, inst.template.ports()[p.port])
    }

    /// Resolve `"instance.port"`.
    pub fn port_ref(&self, instance: &str, port: &str) -> Result<PortRef, NetworkError> {
        let i = self.instance_index(instance).ok_or_else(|| NetworkError::UnknownInstance(instance.to_string()))?;
        let p = self.instances[i]
            .template
            .port(port)
            .map_err(|source| NetworkError::Port { instance: instance.to_string(), source })?;
        Ok(PortRef::new(i, p))
    }

    pub fn edge_name(&self, e: EdgeId) -> String {
        let edge = self.edges[e.0];
        let far = match edge.b {
            EdgeEnd::Port(q) => self.port_name(q),
            EdgeEnd::Reflector => "⟲".into(),
            EdgeEnd::Terminal => "∎".into(),
        };
        format!("{}–{}", self.port_name(edge.a), far)
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}.{}", self.instance, self.port)
    }
}

/// Incremental construction of a [`Network`]. Ports never linked are open.
#[derive(Debug, Default, Clone)]
pub struct NetworkBuilder {
    instances: Vec<Instance>,
    links: Vec<Vec<Option<Link>>>,
    ids: HashMap<String, usize>,
    start: Option<PortRef>,
    target: Option<PortRef>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, id: impl Into<String>, template: Arc<GadgetTemplate>) -> Result<usize, NetworkError> {
        let id = id.into();
        if self.ids.contains_key(&id) {
            return Err(NetworkError::DuplicateInstance(id));
        }
        let idx = self.instances.len();
        self.links.push(vec![None; template.num_ports()]);
        self.ids.insert(id.clone(), idx);
        self.instances.push(Instance { id, template });
        Ok(idx)
    }

    pub fn num_instances(&self) -> usize {
        self.instances.len()
    }

    pub fn instance(&self, i: usize) -> &Instance {
        &self.instances[i]
    }

    pub fn port(&self, instance: usize, name: &str) -> Result<PortRef, NetworkError> {
        let inst = &self.instances[instance];
        let p = inst.template.port(name).map_err(|source| NetworkError::Port { instance: inst.id.clone(), source })?;
        Ok(PortRef::new(instance, p))
    }

    pub fn port_by_id(&self, id: &str, name: &str) -> Result<PortRef, NetworkError> {
        let i = *self.ids.get(id).ok_or_else(|| NetworkError::UnknownInstance(id.to_string()))?;
        self.port(i, name)
    }

    fn describe(&self, p: PortRef) -> String {
        let inst = &self.instances[p.instance];
        format!("{}.{}", inst.id, inst.template.ports()[p.port])
    }

    fn claim(&mut self, p: PortRef, link: Link) -> Result<(), NetworkError> {
        let slot = &mut self.links[p.instance][p.port];
        if slot.is_some() {
            return Err(NetworkError::AlreadyLinked(self.describe(p)));
        }
        *slot = Some(link);
        Ok(())
    }

    pub fn connect(&mut self, p: PortRef, q: PortRef) -> Result<(), NetworkError> {
        if p == q {
            return self.reflect(p);
        }
        if self.links[q.instance][q.port].is_some() {
            return Err(NetworkError::AlreadyLinked(self.describe(q)));
        }
        self.claim(p, Link::Paired(q))?;
        self.claim(q, Link::Paired(p))
    }

    pub fn reflect(&mut self, p: PortRef) -> Result<(), NetworkError> {
        self.claim(p, Link::Reflect)
    }

    /// Mark a port as an explicit terminal.
    pub fn open(&mut self, p: PortRef) -> Result<(), NetworkError> {
        self.claim(p, Link::Open)
    }

    pub fn is_linked(&self, p: PortRef) -> bool {
        self.links[p.instance][p.port].is_some()
    }

    pub fn set_start(&mut self, p: PortRef) {
        self.start = Some(p);
    }

    pub fn set_target(&mut self, p: PortRef) {
        self.target = Some(p);
    }

    pub fn build(self) -> Result<Network, NetworkError> {
        let start = self.start.ok_or(NetworkError::Missing("start"))?;
        let target = self.target.ok_or(NetworkError::Missing("target"))?;
        let links: Vec<Vec<Link>> =
            self.links.into_iter().map(|row| row.into_iter().map(|l| l.unwrap_or(Link::Open)).collect()).collect();
        let mut edges = Vec::new();
        let mut edge_of: Vec<Vec<EdgeId>> = links.iter().map(|row| vec![EdgeId(usize::MAX); row.len()]).collect();
        for (i, row) in links.iter().enumerate() {
            for (p, link) in row.iter().enumerate() {
                let here = PortRef::new(i, p);
                let b = match *link {
                    Link::Paired(q) if q < here => continue,
                    Link::Paired(q) => EdgeEnd::Port(q),
                    Link::Reflect => EdgeEnd::Reflector,
                    Link::Open => EdgeEnd::Terminal,
                };
                let id = EdgeId(edges.len());
                edges.push(Edge { a: here, b });
                edge_of[i][p] = id;
                if let EdgeEnd::Port(q) = b {
                    edge_of[q.instance][q.port] = id;
                }
            }
        }
        Ok(Network { instances: self.instances, links, start, target, edges, edge_of })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::{make_library_gadget, GadgetKind};

    fn single_switch() -> Network {
        let mut b = NetworkBuilder::new();
        let s = b.add("s", make_library_gadget(GadgetKind::Switch, None, &[]).unwrap()).unwrap();
        b.set_start(b.port(s, "Set").unwrap());
        b.set_target(b.port(s, "Out").unwrap());
        b.build().unwrap()
    }

    #[test]
    fn single_traversal_reaches_target() {
        let net = single_switch();
        match simulate(&net, &SimConfig::default()) {
            Outcome::Reached { step, trace } => {
                assert_eq!(step, 1);
                assert_eq!(trace.moves(), vec![(0, 0, 1)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rotators_cycle() {
        let mut b = NetworkBuilder::new();
        let rot = make_library_gadget(GadgetKind::RotateCw, None, &[]).unwrap();
        let x = b.add("x", rot.clone()).unwrap();
        let y = b.add("y", rot).unwrap();
        for (p, q) in [("r1", "r1"), ("r2", "r3"), ("r3", "r2")] {
            b.connect(b.port(x, p).unwrap(), b.port(y, q).unwrap()).unwrap();
        }
        b.set_start(b.port(x, "r1").unwrap());
        b.set_target(b.port(x, "r3").unwrap());
        let net = b.build().unwrap();
        // x.r1→x.r2 → y.r3→y.r1 → x.r1: period 2, x.r3 never entered
        match simulate(&net, &SimConfig::default()) {
            Outcome::Cycled { first_repeat, period, .. } => {
                assert_eq!((first_repeat, period), (0, 2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn open_ports_and_limits() {
        let mut b = NetworkBuilder::new();
        let s = b.add("s", make_library_gadget(GadgetKind::Switch, None, &[]).unwrap()).unwrap();
        b.set_start(b.port(s, "Test").unwrap());
        b.set_target(b.port(s, "Out").unwrap());
        let net = b.build().unwrap();
        assert!(matches!(
            simulate(&net, &SimConfig::default()),
            Outcome::Unspecified { reason: StopReason::OpenPort, step: 1, .. }
        ));
        let limited = SimConfig { max_steps: 0, ..SimConfig::default() };
        assert!(matches!(simulate(&net, &limited), Outcome::StepLimit { .. }));
    }

    #[test]
    fn reflector_retraces() {
        // fan-in a→c, c reflects, c→a back out through the start terminal
        let mut b = NetworkBuilder::new();
        let f = b.add("f", make_library_gadget(GadgetKind::ReversibleFanIn, None, &[]).unwrap()).unwrap();
        let s = b.add("s", make_library_gadget(GadgetKind::Switch, None, &[]).unwrap()).unwrap();
        b.connect(b.port(s, "F-Out").unwrap(), b.port(f, "a").unwrap()).unwrap();
        b.reflect(b.port(f, "c").unwrap()).unwrap();
        b.set_start(b.port(s, "Test").unwrap());
        b.set_target(b.port(f, "b").unwrap());
        let net = b.build().unwrap();
        let out = simulate(&net, &SimConfig::default());
        assert_eq!(out.trace().moves(), vec![(1, 2, 4), (0, 0, 2), (0, 2, 0), (1, 4, 2)]);
        assert!(matches!(out, Outcome::Unspecified { reason: StopReason::OpenPort, .. }));

        let usage = edge_usage(out.trace(), &net).unwrap();
        assert!(usage.alternates());
        let e = net.edge_at(b_port(&net, "f", "c"));
        assert_eq!(usage.directions(e), vec![true, false]);
    }

    fn b_port(net: &Network, i: &str, p: &str) -> PortRef {
        net.port_ref(i, p).unwrap()
    }

    #[test]
    fn json_round_trip() {
        let mut b = NetworkBuilder::new();
        let s = b.add("q1.top", make_library_gadget(GadgetKind::Switch, None, &[("Test", "F-Out")]).unwrap()).unwrap();
        let sp = b.add("sp", crate::gadgets::fsm_in_state(GadgetKind::Spinner3, None, "ccw").unwrap()).unwrap();
        b.connect(b.port(s, "Out").unwrap(), b.port(sp, "a1").unwrap()).unwrap();
        b.reflect(b.port(sp, "a2").unwrap()).unwrap();
        b.set_start(b.port(s, "Set").unwrap());
        b.set_target(b.port(sp, "a3").unwrap());
        let net = b.build().unwrap();
        let text = network_to_json(&net).unwrap();
        let back = network_from_json(&text).unwrap();
        assert_eq!(network_to_json(&back).unwrap(), text);
        assert_eq!(back.initial_states(), net.initial_states());
        assert!(network_to_dot(&net).contains("shape=doublecircle"));
    }

    #[test]
    fn builder_rejects_double_links() {
        let mut b = NetworkBuilder::new();
        let t = make_library_gadget(GadgetKind::ReversibleFanIn, None, &[]).unwrap();
        let f = b.add("f", t.clone()).unwrap();
        assert!(matches!(b.add("f", t), Err(NetworkError::DuplicateInstance(_))));
        b.reflect(b.port(f, "a").unwrap()).unwrap();
        let a = b.port(f, "a").unwrap();
        let c = b.port(f, "c").unwrap();
        assert!(matches!(b.connect(c, a), Err(NetworkError::AlreadyLinked(_))));
        assert!(!b.is_linked(c));
    }
}
