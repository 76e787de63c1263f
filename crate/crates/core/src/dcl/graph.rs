//! Constraint graphs, their states and the synchronous two-phase flip rule.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    And,
    Or,
    Deg2,
}

impl VertexKind {
    /// Minimum in-weight.
    pub fn required(self) -> u32 {
        match self {
            VertexKind::And | VertexKind::Or => 2,
            VertexKind::Deg2 => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    pub fn weight(self) -> u32 {
        match self {
            Color::Red => 1,
            Color::Blue => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub name: String,
    pub kind: VertexKind,
}

/// An edge between `u` and `v`; its orientation lives in [`DclState`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DclEdge {
    pub name: String,
    pub color: Color,
    pub u: usize,
    pub v: usize,
}

/// Orientation and flipped-last-step flag of every edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DclState {
    /// `toward_v[e]`: edge `e` points at its `v` end.
    pub toward_v: Vec<bool>,
    pub flipped: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} ({kind:?}) has the wrong incident edges: {detail}")]
    Degree { vertex: String, kind: VertexKind, detail: String },
    #[error("vertex {vertex} has in-weight {weight}, needs {required}")]
    InWeight { vertex: String, weight: u32, required: u32 },
    #[error("invalid constraint graph: {0}")]
    Format(String),
}

/// A constraint graph together with its time-0 state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<DclEdge>,
    pub initial: DclState,
}

impl Default for ConstraintGraph {
    fn default() -> Self {
        ConstraintGraph {
            vertices: Vec::new(),
            edges: Vec::new(),
            initial: DclState { toward_v: Vec::new(), flipped: Vec::new() },
        }
    }
}

impl ConstraintGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, name: impl Into<String>, kind: VertexKind) -> usize {
        self.vertices.push(Vertex { name: name.into(), kind });
        self.vertices.len() - 1
    }

    /// Add an edge pointing from `tail` to `head`.
    pub fn add_edge(&mut self, name: impl Into<String>, color: Color, tail: usize, head: usize) -> usize {
        self.edges.push(DclEdge { name: name.into(), color, u: tail, v: head });
        self.initial.toward_v.push(true);
        self.initial.flipped.push(false);
        self.edges.len() - 1
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.name == name)
    }

    pub fn head(&self, state: &DclState, e: usize) -> usize {
        let edge = &self.edges[e];
        if state.toward_v[e] {
            edge.v
        } else {
            edge.u
        }
    }

    pub fn tail(&self, state: &DclState, e: usize) -> usize {
        let edge = &self.edges[e];
        if state.toward_v[e] {
            edge.u
        } else {
            edge.v
        }
    }

    /// Point edge `e` at vertex `head`.
    pub fn point(&mut self, e: usize, head: usize) {
        let edge = &self.edges[e];
        assert!(edge.u == head || edge.v == head, "edge {} does not touch vertex {head}", edge.name);
        self.initial.toward_v[e] = edge.v == head;
    }

    pub fn in_weights(&self, state: &DclState) -> Vec<u32> {
        let mut w = vec![0; self.vertices.len()];
        for (e, edge) in self.edges.iter().enumerate() {
            w[self.head(state, e)] += edge.color.weight();
        }
        w
    }

    /// Degree and color invariants of every vertex.
    pub fn check_structure(&self) -> Result<(), GraphError> {
        let mut incident: Vec<(u32, u32)> = vec![(0, 0); self.vertices.len()];
        for e in &self.edges {
            for x in [e.u, e.v] {
                match e.color {
                    Color::Red => incident[x].0 += 1,
                    Color::Blue => incident[x].1 += 1,
                }
            }
        }
        for (v, &(red, blue)) in self.vertices.iter().zip(&incident) {
            let ok = match v.kind {
                VertexKind::And => red == 2 && blue == 1,
                VertexKind::Or => red == 0 && blue == 3,
                VertexKind::Deg2 => red + blue == 2,
            };
            if !ok {
                return Err(GraphError::Degree {
                    vertex: v.name.clone(),
                    kind: v.kind,
                    detail: format!("{red} red, {blue} blue"),
                });
            }
        }
        Ok(())
    }

    /// In-weight constraint of every vertex in `state`.
    pub fn check_weights(&self, state: &DclState) -> Result<(), GraphError> {
        for (v, w) in self.in_weights(state).into_iter().enumerate() {
            let required = self.vertices[v].kind.required();
            if w < required {
                return Err(GraphError::InWeight { vertex: self.vertices[v].name.clone(), weight: w, required });
            }
        }
        Ok(())
    }

    /// Edges that flip in the step after `state`.
    pub fn flip_set(&self, state: &DclState) -> Vec<bool> {
        let inw = self.in_weights(state);
        let n = self.edges.len();
        // phase 1: edges that did not flip may flip if their head stays satisfied
        let mut can = vec![false; n];
        let mut can_into = vec![0u32; self.vertices.len()];
        for e in 0..n {
            if state.flipped[e] {
                continue;
            }
            let h = self.head(state, e);
            if inw[h] - self.edges[e].color.weight() >= self.vertices[h].kind.required() {
                can[e] = true;
                can_into[h] += 1;
            }
        }
        // phase 2: edges that just flipped flip back unless another edge into
        // their head can flip
        let mut flips = can;
        for e in 0..n {
            if state.flipped[e] && can_into[self.head(state, e)] == 0 {
                flips[e] = true;
            }
        }
        flips
    }

    /// One synchronous step.
    pub fn step(&self, state: &DclState) -> DclState {
        let flips = self.flip_set(state);
        let toward_v = state.toward_v.iter().zip(&flips).map(|(&t, &f)| t != f).collect();
        DclState { toward_v, flipped: flips }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<serde_json::Value> = self
            .edges
            .iter()
            .enumerate()
            .map(|(e, edge)| {
                let head = self.head(&self.initial, e);
                let tail = self.tail(&self.initial, e);
                serde_json::json!({
                    "name": edge.name,
                    "color": edge.color,
                    "endpoints": [self.vertices[edge.u].name, self.vertices[edge.v].name],
                    "head": self.vertices[head].name,
                    "tail": self.vertices[tail].name,
                    "flipped": self.initial.flipped[e],
                })
            })
            .collect();
        serde_json::json!({ "vertices": self.vertices, "edges": edges })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, GraphError> {
        #[derive(Deserialize)]
        struct EdgeSpec {
            name: String,
            color: Color,
            endpoints: [String; 2],
            head: String,
            #[serde(default)]
            flipped: bool,
        }
        #[derive(Deserialize)]
        struct Spec {
            vertices: Vec<Vertex>,
            edges: Vec<EdgeSpec>,
        }
        let spec: Spec = serde_json::from_value(value.clone()).map_err(|e| GraphError::Format(e.to_string()))?;
        let mut g = ConstraintGraph::new();
        let mut index = HashMap::new();
        for v in spec.vertices {
            if index.insert(v.name.clone(), g.vertices.len()).is_some() {
                return Err(GraphError::Format(format!("duplicate vertex `{}`", v.name)));
            }
            g.add_vertex(v.name, v.kind);
        }
        let find = |n: &str| index.get(n).copied().ok_or_else(|| GraphError::Format(format!("unknown vertex `{n}`")));
        for e in spec.edges {
            let (u, v) = (find(&e.endpoints[0])?, find(&e.endpoints[1])?);
            let head = find(&e.head)?;
            if head != u && head != v {
                return Err(GraphError::Format(format!("edge `{}` points at a vertex it does not touch", e.name)));
            }
            let id = g.add_edge(e.name, e.color, u, v);
            g.point(id, head);
            g.initial.flipped[id] = e.flipped;
        }
        Ok(g)
    }

    /// DOT rendering: blue edges bold, flipped edges dashed.
    pub fn to_dot(&self, state: &DclState) -> String {
        let mut out = String::from("digraph dcl {\n");
        for v in &self.vertices {
            let shape = match v.kind {
                VertexKind::And => "box",
                VertexKind::Or => "circle",
                VertexKind::Deg2 => "point",
            };
            let _ = writeln!(out, "  \"{}\" [shape={shape}];", v.name);
        }
        for (e, edge) in self.edges.iter().enumerate() {
            let (t, h) = (self.tail(state, e), self.head(state, e));
            let style = match (edge.color, state.flipped[e]) {
                (Color::Red, false) => "color=red",
                (Color::Red, true) => "color=red, style=dashed",
                (Color::Blue, false) => "color=blue, penwidth=2",
                (Color::Blue, true) => "color=blue, penwidth=2, style=dashed",
            };
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [{style}, label=\"{}\"];",
                self.vertices[t].name, self.vertices[h].name, edge.name
            );
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Graph with the named vertices; `edges` are (name, color, tail, head, flagged).
    fn graph(vertices: &[(&str, VertexKind)], edges: &[(&str, Color, &str, &str, bool)]) -> ConstraintGraph {
        let mut g = ConstraintGraph::new();
        for (n, k) in vertices {
            g.add_vertex(*n, *k);
        }
        for &(n, c, t, h, f) in edges {
            let e = g.add_edge(n, c, g.vertex_index(t).unwrap(), g.vertex_index(h).unwrap());
            g.initial.flipped[e] = f;
        }
        g
    }

    fn flipping(g: &ConstraintGraph, state: &DclState) -> Vec<String> {
        let f = g.flip_set(state);
        (0..g.edges.len()).filter(|&e| f[e]).map(|e| g.edges[e].name.clone()).collect()
    }

    fn and_star(edges: [(&str, Color, bool, bool); 3]) -> ConstraintGraph {
        // (name, color, points into the AND, flagged); each edge's far end is its own DEG2 vertex
        let mut vs = vec![("and", VertexKind::And)];
        let names: Vec<String> = edges.iter().map(|e| format!("x.{}", e.0)).collect();
        for n in &names {
            vs.push((n.as_str(), VertexKind::Deg2));
        }
        let es: Vec<_> = edges
            .iter()
            .zip(&names)
            .map(
                |(&(n, c, inward, f), x)| {
                    if inward {
                        (n, c, x.as_str(), "and", f)
                    } else {
                        (n, c, "and", x.as_str(), f)
                    }
                },
            )
            .collect();
        graph(&vs, &es)
    }

    #[test]
    fn path_propagates_one_edge_per_step() {
        let g = graph(
            &[("v0", VertexKind::Deg2), ("v1", VertexKind::Deg2), ("v2", VertexKind::Deg2), ("v3", VertexKind::Deg2)],
            &[
                ("e1", Color::Blue, "v1", "v0", true),
                ("e2", Color::Blue, "v2", "v1", false),
                ("e3", Color::Blue, "v3", "v2", false),
            ],
        );
        let mut state = g.initial.clone();
        for want in ["e1", "e2", "e3"] {
            assert_eq!(flipping(&g, &state), vec![want.to_string()]);
            state = g.step(&state);
        }
        for e in 0..3 {
            assert_eq!(g.head(&state, e), e + 1);
        }
        // a dead end sends the signal back
        assert_eq!(flipping(&g, &state), vec!["e3".to_string()]);
    }

    #[test]
    fn or_hands_off_to_the_previous_incoming_edge() {
        let g = graph(
            &[("or", VertexKind::Or), ("xa", VertexKind::Deg2), ("xb", VertexKind::Deg2), ("xc", VertexKind::Deg2)],
            &[
                ("a", Color::Blue, "xa", "or", true),
                ("b", Color::Blue, "or", "xb", false),
                ("c", Color::Blue, "xc", "or", false),
            ],
        );
        assert_eq!(flipping(&g, &g.initial), vec!["c"]);
    }

    #[test]
    fn and_splits_when_blue_arrives() {
        let g = and_star([
            ("g", Color::Blue, true, true),
            ("r1", Color::Red, true, false),
            ("r2", Color::Red, true, false),
        ]);
        assert_eq!(flipping(&g, &g.initial), vec!["r1", "r2"]);
    }

    #[test]
    fn and_joins_simultaneous_reds() {
        let g =
            and_star([("g", Color::Blue, true, false), ("r1", Color::Red, true, true), ("r2", Color::Red, true, true)]);
        assert_eq!(flipping(&g, &g.initial), vec!["g"]);
    }

    #[test]
    fn and_bounces_a_single_red() {
        let g = and_star([
            ("g", Color::Blue, true, false),
            ("r1", Color::Red, true, true),
            ("r2", Color::Red, false, false),
        ]);
        assert_eq!(flipping(&g, &g.initial), vec!["r1"]);
        let next = g.step(&g.initial);
        assert_eq!(g.head(&next, 1), g.vertex_index("x.r1").unwrap());
        assert!(next.flipped[1]);
    }

    #[test]
    fn new_flags_are_the_flip_set() {
        let g = and_star([
            ("g", Color::Blue, true, true),
            ("r1", Color::Red, true, false),
            ("r2", Color::Red, true, false),
        ]);
        let next = g.step(&g.initial);
        assert_eq!(next.flipped, g.flip_set(&g.initial));
    }

    #[test]
    fn structure_check_counts_colors() {
        let ok = and_star([
            ("g", Color::Blue, true, false),
            ("r1", Color::Red, true, false),
            ("r2", Color::Red, false, false),
        ]);
        // the leaves have degree 1, so only the AND is checked here
        let err = ok.check_structure().unwrap_err();
        assert!(matches!(err, GraphError::Degree { ref vertex, .. } if vertex.starts_with("x.")));
        let bad = and_star([
            ("g", Color::Blue, true, false),
            ("r1", Color::Blue, true, false),
            ("r2", Color::Red, true, false),
        ]);
        let err = bad.check_structure().unwrap_err();
        assert!(matches!(err, GraphError::Degree { ref vertex, .. } if vertex == "and"));
    }

    #[test]
    fn in_weight_violation_is_reported() {
        let g = and_star([
            ("g", Color::Blue, false, false),
            ("r1", Color::Red, true, false),
            ("r2", Color::Red, false, false),
        ]);
        assert!(
            matches!(g.check_weights(&g.initial), Err(GraphError::InWeight { ref vertex, weight: 1, required: 2 }) if vertex == "and")
        );
    }

    #[test]
    fn dot_marks_colors_and_flags() {
        let g = and_star([
            ("g", Color::Blue, true, true),
            ("r1", Color::Red, true, false),
            ("r2", Color::Red, true, false),
        ]);
        let dot = g.to_dot(&g.initial);
        assert!(dot.contains("color=blue, penwidth=2, style=dashed, label=\"g\""));
        assert!(dot.contains("color=red, label=\"r1\""));
    }

    fn arb_graph() -> impl Strategy<Value = ConstraintGraph> {
        (2usize..7).prop_flat_map(|nv| {
            let kinds = prop::collection::vec(
                prop_oneof![Just(VertexKind::And), Just(VertexKind::Or), Just(VertexKind::Deg2)],
                nv,
            );
            let edge = (0..nv, 0..nv, any::<bool>(), any::<bool>(), any::<bool>());
            (kinds, prop::collection::vec(edge, 1..12)).prop_map(|(kinds, edges)| {
                let mut g = ConstraintGraph::new();
                for (i, k) in kinds.into_iter().enumerate() {
                    g.add_vertex(format!("v{i}"), k);
                }
                for (i, (u, v, blue, toward, flag)) in edges.into_iter().enumerate() {
                    let v = if u == v { (v + 1) % g.vertices.len() } else { v };
                    let e = g.add_edge(format!("e{i}"), if blue { Color::Blue } else { Color::Red }, u, v);
                    g.initial.toward_v[e] = toward;
                    g.initial.flipped[e] = flag;
                }
                g
            })
        })
    }

    proptest! {
        #[test]
        fn step_is_a_function_of_the_state(g in arb_graph()) {
            let copy = g.initial.clone();
            prop_assert_eq!(g.step(&g.initial), g.step(&copy));
        }

        #[test]
        fn step_flips_exactly_the_flip_set(g in arb_graph()) {
            let f = g.flip_set(&g.initial);
            let next = g.step(&g.initial);
            for e in 0..g.edges.len() {
                prop_assert_eq!(next.toward_v[e] != g.initial.toward_v[e], f[e]);
            }
            prop_assert_eq!(next.flipped, f);
        }

        #[test]
        fn json_round_trips(g in arb_graph()) {
            let back = ConstraintGraph::from_json(&g.to_json()).unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
