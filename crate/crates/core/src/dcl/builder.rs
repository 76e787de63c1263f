//! Composing fragments, wires and terminals into a single constraint graph.

use std::collections::HashMap;

use super::graph::{Color, ConstraintGraph, GraphError, VertexKind};

/// A constraint-graph piece whose ports are blue edges ending at stub vertices.
///
/// Stubs stand in for the degree-2 joints that connect ports; they are
/// replaced by real vertices when the fragment is added to a [`DclBuilder`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub name: String,
    pub graph: ConstraintGraph,
    /// Port name, port edge, stub vertex.
    pub ports: Vec<(String, usize, usize)>,
}

impl Fragment {
    pub fn port(&self, name: &str) -> Option<(usize, usize)> {
        self.ports.iter().find(|p| p.0 == name).map(|p| (p.1, p.2))
    }

    pub fn port_names(&self) -> Vec<String> {
        self.ports.iter().map(|p| p.0.clone()).collect()
    }

    /// Does the port edge point into the fragment at rest?
    pub fn port_points_inward(&self, name: &str) -> bool {
        let (e, stub) = self.port(name).expect("unknown port");
        self.graph.head(&self.graph.initial, e) != stub
    }

    pub fn is_stub(&self, v: usize) -> bool {
        self.ports.iter().any(|p| p.2 == v)
    }

    /// The graph JSON plus a `ports` list naming each port's edge.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.graph.to_json();
        let ports: Vec<serde_json::Value> = self
            .ports
            .iter()
            .map(|(n, e, _)| serde_json::json!({ "name": n, "edge": self.graph.edges[*e].name }))
            .collect();
        v["name"] = serde_json::json!(self.name);
        v["ports"] = serde_json::json!(ports);
        v
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Fragment, GraphError> {
        let graph = ConstraintGraph::from_json(value)?;
        let name = value["name"].as_str().ok_or_else(|| GraphError::Format("fragment needs a name".into()))?;
        let list = value["ports"].as_array().ok_or_else(|| GraphError::Format("fragment needs ports".into()))?;
        let mut ports = Vec::new();
        for p in list {
            let (Some(port), Some(edge)) = (p["name"].as_str(), p["edge"].as_str()) else {
                return Err(GraphError::Format(format!("malformed port {p}")));
            };
            let e = graph.edge_index(edge).ok_or_else(|| GraphError::Format(format!("unknown port edge `{edge}`")))?;
            let stub = graph
                .vertex_index(&format!("{port}.stub"))
                .filter(|&s| graph.edges[e].u == s || graph.edges[e].v == s)
                .ok_or_else(|| GraphError::Format(format!("port `{port}` has no stub on its edge")))?;
            ports.push((port.to_string(), e, stub));
        }
        Ok(Fragment { name: name.to_string(), graph, ports })
    }
}

/// Incremental construction of a constraint graph.
#[derive(Debug, Clone, Default)]
pub struct DclBuilder {
    pub graph: ConstraintGraph,
    counter: usize,
}

impl DclBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn fresh(&mut self, base: &str) -> String {
        self.counter += 1;
        format!("{base}#{}", self.counter)
    }

    pub fn vertex(&mut self, name: impl Into<String>, kind: VertexKind) -> usize {
        self.graph.add_vertex(name, kind)
    }

    pub fn joint(&mut self, name: &str) -> usize {
        self.graph.add_vertex(name, VertexKind::Deg2)
    }

    /// An edge pointing from `tail` to `head`.
    pub fn edge(&mut self, name: impl Into<String>, color: Color, tail: usize, head: usize) -> usize {
        self.graph.add_edge(name, color, tail, head)
    }

    /// Copy `frag` in, mapping each port's stub to the vertex given in `joints`.
    /// Returns the new id of every port edge.
    pub fn add_fragment(
        &mut self,
        prefix: &str,
        frag: &Fragment,
        joints: &HashMap<String, usize>,
    ) -> HashMap<String, usize> {
        let mut map = vec![usize::MAX; frag.graph.vertices.len()];
        for (port, _, stub) in &frag.ports {
            map[*stub] = *joints.get(port).unwrap_or_else(|| panic!("no joint for port {port}"));
        }
        for (v, vertex) in frag.graph.vertices.iter().enumerate() {
            if map[v] == usize::MAX {
                map[v] = self.graph.add_vertex(format!("{prefix}.{}", vertex.name), vertex.kind);
            }
        }
        let mut edge_map = vec![0; frag.graph.edges.len()];
        for (e, edge) in frag.graph.edges.iter().enumerate() {
            let id = self.graph.add_edge(format!("{prefix}.{}", edge.name), edge.color, map[edge.u], map[edge.v]);
            self.graph.initial.toward_v[id] = frag.graph.initial.toward_v[e];
            self.graph.initial.flipped[id] = frag.graph.initial.flipped[e];
            edge_map[e] = id;
        }
        frag.ports.iter().map(|(p, e, _)| (p.clone(), edge_map[*e])).collect()
    }

    /// A path of `len` edges from `from` to `to` through new degree-2 vertices,
    /// oriented for a signal that will travel from `from` to `to`.
    pub fn path(&mut self, name: &str, from: usize, to: usize, len: usize, color: Color) -> Vec<usize> {
        assert!(len >= 1, "a path needs at least one edge");
        let mut prev = from;
        let mut edges = Vec::with_capacity(len);
        for i in 0..len {
            let next = if i + 1 == len {
                to
            } else {
                let n = self.fresh(name);
                self.joint(&n)
            };
            edges.push(self.edge(format!("{name}.{i}"), color, next, prev));
            prev = next;
        }
        edges
    }

    /// An AND vertex anchored by a frozen red/blue digon, exposing one red edge
    /// to `at`. The red edge points at `at`; a signal arriving over it bounces.
    /// Returns the exposed edge.
    pub fn bounce_terminal(&mut self, name: &str, at: usize) -> usize {
        let a = self.vertex(format!("{name}.and"), VertexKind::And);
        let x = self.joint(&format!("{name}.anchor"));
        self.edge(format!("{name}.hold"), Color::Blue, x, a);
        self.edge(format!("{name}.back"), Color::Red, a, x);
        self.edge(format!("{name}.end"), Color::Red, a, at)
    }

    /// A frozen AND vertex whose exposed red edge points away from `at`.
    pub fn source_terminal(&mut self, name: &str, at: usize) -> usize {
        let a = self.vertex(format!("{name}.and"), VertexKind::And);
        let x = self.joint(&format!("{name}.anchor"));
        self.edge(format!("{name}.hold"), Color::Blue, a, x);
        self.edge(format!("{name}.back"), Color::Red, x, a);
        self.edge(format!("{name}.end"), Color::Red, at, a)
    }

    pub fn finish(self) -> ConstraintGraph {
        self.graph
    }
}

/// Builder for a single fragment: like [`DclBuilder`] but with named ports.
#[derive(Debug, Clone)]
pub struct FragmentBuilder {
    name: String,
    graph: ConstraintGraph,
    ports: Vec<(String, usize, usize)>,
    index: HashMap<String, usize>,
}

impl FragmentBuilder {
    pub fn new(name: &str) -> Self {
        FragmentBuilder { name: name.into(), graph: ConstraintGraph::new(), ports: Vec::new(), index: HashMap::new() }
    }

    pub fn vertex(&mut self, name: &str, kind: VertexKind) -> usize {
        let v = self.graph.add_vertex(name, kind);
        self.index.insert(name.into(), v);
        v
    }

    pub fn v(&self, name: &str) -> usize {
        *self.index.get(name).unwrap_or_else(|| panic!("unknown vertex {name}"))
    }

    /// Red or blue edge `tail -> head` between named vertices.
    pub fn edge(&mut self, name: &str, color: Color, tail: &str, head: &str) -> usize {
        let (t, h) = (self.v(tail), self.v(head));
        self.graph.add_edge(name, color, t, h)
    }

    /// An edge that flipped at step 0 (a bouncing edge in phase).
    pub fn bouncing(&mut self, name: &str, color: Color, tail: &str, head: &str) -> usize {
        let e = self.edge(name, color, tail, head);
        self.graph.initial.flipped[e] = true;
        e
    }

    /// A port edge between `inner` and a fresh stub; `inward` orients it at `inner`.
    pub fn port(&mut self, name: &str, inner: &str, inward: bool) -> usize {
        let stub = self.graph.add_vertex(format!("{name}.stub"), VertexKind::Deg2);
        let inner = self.v(inner);
        let e = if inward {
            self.graph.add_edge(name, Color::Blue, stub, inner)
        } else {
            self.graph.add_edge(name, Color::Blue, inner, stub)
        };
        self.ports.push((name.into(), e, stub));
        e
    }

    pub fn finish(self) -> Fragment {
        Fragment { name: self.name, graph: self.graph, ports: self.ports }
    }
}

impl Fragment {
    /// Wrap a built graph; each port is `(name, port edge, stub vertex)`.
    pub fn from_graph(name: &str, graph: ConstraintGraph, ports: Vec<(String, usize, usize)>) -> Fragment {
        Fragment { name: name.into(), graph, ports }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_points_back_to_its_source() {
        let mut b = DclBuilder::new();
        let (s, t) = (b.joint("s"), b.joint("t"));
        let edges = b.path("w", s, t, 3, Color::Blue);
        let g = b.finish();
        assert_eq!(edges.len(), 3);
        assert_eq!(g.head(&g.initial, edges[0]), s);
        assert_eq!(g.tail(&g.initial, edges[2]), t);
        assert_eq!(g.vertices.len(), 4);
    }

    #[test]
    fn bounce_terminal_returns_an_arriving_signal() {
        // s -> wire -> terminal; a seeded edge at s sends the signal down the wire
        let mut b = DclBuilder::new();
        let (s0, s, t) = (b.joint("s0"), b.joint("s"), b.joint("t"));
        let seed = b.edge("seed", Color::Blue, s, s0);
        let wire = b.path("w", s, t, 2, Color::Blue);
        b.bounce_terminal("end", t);
        let mut g = b.finish();
        g.initial.flipped[seed] = true;
        let mut state = g.initial.clone();
        let mut flips = Vec::new();
        for _ in 0..8 {
            let next = g.step(&state);
            flips.push((0..g.edges.len()).filter(|&e| next.toward_v[e] != state.toward_v[e]).collect::<Vec<_>>());
            state = next;
        }
        assert_eq!(flips[1], vec![wire[0]]);
        assert_eq!(flips[2], vec![wire[1]]);
        // the wire flips back in reverse order
        let again = |e: usize| flips.iter().skip(3).position(|f| f.contains(&e)).map(|i| i + 3);
        let (w1, w0) = (again(wire[1]).expect("w.1 returns"), again(wire[0]).expect("w.0 returns"));
        assert_eq!(w0, w1 + 1);
    }

    #[test]
    fn fragment_edges_are_copied_in_order() {
        let mut fb = FragmentBuilder::new("f");
        fb.vertex("o", VertexKind::Or);
        fb.port("a", "o", true);
        fb.port("b", "o", false);
        fb.port("c", "o", false);
        let frag = fb.finish();
        let mut b = DclBuilder::new();
        b.joint("pad");
        let base = b.graph.edges.len();
        let joints: HashMap<String, usize> = ["a", "b", "c"].iter().map(|p| (p.to_string(), b.joint(p))).collect();
        let ports = b.add_fragment("x", &frag, &joints);
        for (name, &e) in &ports {
            assert_eq!(e, base + frag.port(name).unwrap().0);
            assert!(b.graph.edges[e].u == joints[name] || b.graph.edges[e].v == joints[name]);
        }
    }
}
