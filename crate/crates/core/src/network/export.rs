//! JSON and DOT renderings of networks and traces.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{EdgeEnd, Link, Network, NetworkBuilder, NetworkError, PortRef, Trace};
use crate::gadgets::{fsm_in_state, make_library_gadget, Behavior, GadgetKind, GadgetTemplate};

/// Serializable description of one gadget instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub id: String,
    pub kind: GadgetKind,
    pub cyclic_order: Vec<String>,
    /// FSM state before `initial_history` is applied; absent for gizmos.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default)]
    pub initial_history: Vec<[String; 2]>,
}

/// Serializable network: instances, pairs of `"instance.port"` names,
/// reflector ports, start and target. Unlisted ports are terminals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub instances: Vec<InstanceSpec>,
    pub pairs: Vec<[String; 2]>,
    #[serde(default)]
    pub reflectors: Vec<String>,
    pub start: String,
    pub target: String,
}

impl InstanceSpec {
    pub fn from_template(id: &str, t: &GadgetTemplate) -> Result<Self, NetworkError> {
        let kind = t.kind().ok_or_else(|| NetworkError::Format(format!("instance `{id}` is not a catalog gadget")))?;
        let state = match t.behavior() {
            Behavior::Fsm(m) => Some(m.state_name(m.initial()).to_string()),
            Behavior::Gizmo(_) => None,
        };
        Ok(InstanceSpec {
            id: id.to_string(),
            kind,
            cyclic_order: t.cyclic_order().iter().map(|&p| t.ports()[p].clone()).collect(),
            state,
            initial_history: t
                .initial_history()
                .iter()
                .map(|tr| [t.ports()[tr.entry].clone(), t.ports()[tr.exit].clone()])
                .collect(),
        })
    }

    pub fn to_template(&self) -> Result<Arc<GadgetTemplate>, NetworkError> {
        let wrap = |source| NetworkError::Port { instance: self.id.clone(), source };
        let order: Vec<&str> = self.cyclic_order.iter().map(String::as_str).collect();
        let history: Vec<(&str, &str)> = self.initial_history.iter().map(|[a, b]| (a.as_str(), b.as_str())).collect();
        match &self.state {
            Some(state) => {
                let base = fsm_in_state(self.kind, Some(&order), state).map_err(wrap)?;
                if history.is_empty() {
                    return Ok(base);
                }
                let seq = base.traversals(&history).map_err(wrap)?;
                Ok(Arc::new(base.after(&seq).map_err(wrap)?))
            }
            None => make_library_gadget(self.kind, Some(&order), &history).map_err(wrap),
        }
    }
}

impl NetworkSpec {
    pub fn from_network(net: &Network) -> Result<Self, NetworkError> {
        let instances = net
            .instances()
            .iter()
            .map(|i| InstanceSpec::from_template(&i.id, &i.template))
            .collect::<Result<Vec<_>, _>>()?;
        let mut pairs = Vec::new();
        let mut reflectors = Vec::new();
        for e in net.edges() {
            match e.b {
                EdgeEnd::Port(q) => pairs.push([net.port_name(e.a), net.port_name(q)]),
                EdgeEnd::Reflector => reflectors.push(net.port_name(e.a)),
                EdgeEnd::Terminal => {}
            }
        }
        Ok(NetworkSpec {
            instances,
            pairs,
            reflectors,
            start: net.port_name(net.start()),
            target: net.port_name(net.target()),
        })
    }

    pub fn build(&self) -> Result<Network, NetworkError> {
        let mut b = NetworkBuilder::new();
        for inst in &self.instances {
            b.add(inst.id.clone(), inst.to_template()?)?;
        }
        let resolve = |b: &NetworkBuilder, name: &str| -> Result<PortRef, NetworkError> {
            let (id, port) = split_port(name)?;
            b.port_by_id(id, port)
        };
        for [p, q] in &self.pairs {
            if p == q {
                return Err(NetworkError::Format(format!("`{p}` is paired with itself; list it as a reflector")));
            }
            let (p, q) = (resolve(&b, p)?, resolve(&b, q)?);
            b.connect(p, q)?;
        }
        for r in &self.reflectors {
            let p = resolve(&b, r)?;
            b.reflect(p)?;
        }
        let start = resolve(&b, &self.start)?;
        let target = resolve(&b, &self.target)?;
        b.set_start(start);
        b.set_target(target);
        b.build()
    }
}

/// Split `"instance.port"` at the last dot (instance ids may contain dots).
fn split_port(name: &str) -> Result<(&str, &str), NetworkError> {
    // port names never contain dots, so the last dot separates them
    name.rsplit_once('.').ok_or_else(|| NetworkError::Format(format!("expected `instance.port`, found `{name}`")))
}

/// Deterministic JSON (sorted keys, pretty-printed).
pub fn network_to_json(net: &Network) -> Result<String, NetworkError> {
    let spec = NetworkSpec::from_network(net)?;
    let value = serde_json::to_value(&spec).map_err(|e| NetworkError::Format(e.to_string()))?;
    Ok(serde_json::to_string_pretty(&value).expect("json value serializes"))
}

pub fn network_from_json(text: &str) -> Result<Network, NetworkError> {
    let spec: NetworkSpec = serde_json::from_str(text).map_err(|e| NetworkError::Format(e.to_string()))?;
    spec.build()
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT graph: one node per instance, one edge per pairing.
pub fn network_to_dot(net: &Network) -> String {
    let mut out = String::from("graph network {\n  node [shape=box];\n");
    for inst in net.instances() {
        let _ = writeln!(
            out,
            "  {} [label={}];",
            quote(&inst.id),
            quote(&format!("{}\\n{}", inst.id, inst.template.name()))
        );
    }
    let port = |p: PortRef| net.instance(p.instance).template.ports()[p.port].clone();
    for (i, e) in net.edges().iter().enumerate() {
        let from = quote(&net.instance(e.a.instance).id);
        match e.b {
            EdgeEnd::Port(q) => {
                let _ = writeln!(
                    out,
                    "  {from} -- {} [taillabel={}, headlabel={}];",
                    quote(&net.instance(q.instance).id),
                    quote(&port(e.a)),
                    quote(&port(q))
                );
            }
            EdgeEnd::Reflector => {
                let r = quote(&format!("reflect{i}"));
                let _ = writeln!(out, "  {r} [shape=point];\n  {from} -- {r} [taillabel={}];", quote(&port(e.a)));
            }
            EdgeEnd::Terminal => {
                let attrs = match (e.a == net.start(), e.a == net.target()) {
                    (true, _) => "shape=circle, label=\"start\"",
                    (_, true) => "shape=doublecircle, label=\"target\"",
                    _ => "shape=plaintext, label=\"\"",
                };
                let t = quote(&format!("terminal{i}"));
                let _ = writeln!(out, "  {t} [{attrs}];\n  {from} -- {t} [taillabel={}];", quote(&port(e.a)));
            }
        }
    }
    out.push_str("}\n");
    out
}

/// DOT graph of a trace: instances as nodes, one directed edge per event
/// transition, labelled with step numbers.
pub fn trace_to_dot(net: &Network, trace: &Trace) -> String {
    let mut out = String::from("digraph trace {\n  node [shape=box];\n");
    for inst in net.instances() {
        let _ = writeln!(out, "  {};", quote(&inst.id));
    }
    for w in trace.events.windows(2) {
        let (a, b) = (w[0], w[1]);
        let from = PortRef::new(a.instance, a.exit);
        let to = PortRef::new(b.instance, b.entry);
        let kind = if matches!(net.link(from), Link::Reflect) { ", style=dashed" } else { "" };
        let _ = writeln!(
            out,
            "  {} -> {} [label={}{kind}];",
            quote(&net.instance(a.instance).id),
            quote(&net.instance(b.instance).id),
            quote(&format!("{}: {} → {}", a.step, net.port_name(from), net.port_name(to))),
        );
    }
    out.push_str("}\n");
    out
}

/// Trace as JSON events with named ports.
pub fn trace_to_json(net: &Network, trace: &Trace) -> serde_json::Value {
    let events: Vec<serde_json::Value> = trace
        .events
        .iter()
        .map(|e| {
            let t = &net.instance(e.instance).template;
            serde_json::json!({
                "step": e.step,
                "instance": net.instance(e.instance).id,
                "entry": t.ports()[e.entry],
                "exit": t.ports()[e.exit],
            })
        })
        .collect();
    serde_json::Value::Array(events)
}
