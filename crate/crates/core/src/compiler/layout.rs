//! Blocks of the reduction drawn as one-page book embeddings.
//!
//! Every block is a row of points on a horizontal spine: gadget ports
//! (each gadget's ports contiguous, read left to right in clockwise order)
//! and the block's external ports. Wires are arcs above the spine, so two
//! wires cross exactly when their endpoints interleave.

use std::sync::Arc;

use serde::Serialize;

use crate::gadgets::{make_library_gadget, GadgetKind, GadgetTemplate, PortIdx};
use crate::network::{Composite, CrossoverInit, PortRef};
use crate::qbf::{Literal, Quantifier};

/// Cyclic order of every Switch the compiler emits.
pub const SWITCH_ORDER: [&str; 5] = ["Set", "Out", "T-Out", "Test", "F-Out"];

/// External ports of a quantifier block, in cyclic order.
pub const QUANTIFIER_PORTS: [&str; 8] = ["F-Out", "T-Out", "In", "Write-Out", "Write-In", "Out", "T-In", "F-In"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Point {
    Ext(&'static str),
    /// External port with a generated name (per-variable CNF ports).
    ExtOwned(usize),
    Port(usize, PortIdx),
}

/// A wire between two spine positions; traversed first from `from` to `to`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wire {
    pub label: String,
    pub from: usize,
    pub to: usize,
    /// Position in the order in which wires become used (CNF only).
    pub rank: Option<[usize; 4]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockKind {
    Quantifier(Quantifier),
    Cnf,
}

/// A crossover placement between two wires, named by label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CrossingDecl {
    /// Wire carried by the A–a tunnel.
    pub a_tunnel: String,
    /// Forward traversals of the A–a wire enter at A.
    pub a_forward_is_a_to_a: bool,
    pub b_tunnel: String,
    pub b_forward_is_b_to_b: bool,
    pub initial: CrossoverInit,
}

#[derive(Debug, Clone)]
pub struct Block {
    pub name: String,
    pub kind: BlockKind,
    pub gadgets: Vec<(String, Arc<GadgetTemplate>)>,
    pub spine: Vec<Point>,
    pub wires: Vec<Wire>,
    ext_names: Vec<String>,
}

fn switch(history: &[(&str, &str)]) -> Arc<GadgetTemplate> {
    make_library_gadget(GadgetKind::Switch, Some(&SWITCH_ORDER), history).expect("catalog switch")
}

fn fanin(order: [&str; 3], history: &[(&str, &str)]) -> Arc<GadgetTemplate> {
    make_library_gadget(GadgetKind::ReversibleFanIn, Some(&order), history).expect("catalog fan-in")
}

/// The existential relabeling of a universal port name.
pub fn swap_role(name: &str) -> &str {
    match name {
        "T-In" => "F-In",
        "F-In" => "T-In",
        "T-Out" => "F-Out",
        "F-Out" => "T-Out",
        other => other,
    }
}

impl Block {
    /// Quantifier block: two Switches and two Reversible Fan-ins.
    ///
    /// Wires, forward direction first:
    /// 1 In→top.F-Out, 2 top.Test→merge.a, 3 top.T-Out→Write-Out,
    /// 4 Write-In→bottom.Set, 5 bottom.Out→merge.b, 6 merge.c→Out,
    /// 7 T-In→bottom.Test, 8 bottom.F-Out→latch.c, 9 bottom.T-Out→T-Out,
    /// 10 F-In→F-Out, x latch.a→top.Set, y top.Out→latch.b.
    pub fn quantifier(name: &str, q: Quantifier) -> Block {
        let (top, bottom, merge, latch) = (0, 1, 2, 3);
        let gadgets = vec![
            ("top".to_string(), switch(&[("Test", "F-Out")])),
            ("bottom".to_string(), switch(&[])),
            ("merge".to_string(), fanin(["b", "a", "c"], &[])),
            ("latch".to_string(), fanin(["c", "a", "b"], &[("a", "c")])),
        ];
        let port = |g: usize, p: &str| Point::Port(g, gadgets[g].1.port(p).unwrap());
        let ext = |p: &'static str| match q {
            Quantifier::Universal => Point::Ext(p),
            Quantifier::Existential => Point::Ext(swap_role(p)),
        };
        let spine = vec![
            ext("F-Out"),
            ext("F-In"),
            ext("T-In"),
            port(bottom, "T-Out"),
            port(bottom, "Test"),
            port(bottom, "F-Out"),
            port(bottom, "Set"),
            port(bottom, "Out"),
            port(merge, "b"),
            port(merge, "a"),
            port(merge, "c"),
            ext("Out"),
            ext("Write-In"),
            port(latch, "c"),
            port(latch, "a"),
            port(latch, "b"),
            ext("Write-Out"),
            port(top, "Out"),
            port(top, "T-Out"),
            port(top, "Test"),
            port(top, "F-Out"),
            port(top, "Set"),
            ext("In"),
            ext("T-Out"),
        ];
        let w = |label: &str, from, to| Wire { label: label.to_string(), from, to, rank: None };
        let wires = vec![
            w("1", 22, 20),
            w("2", 19, 9),
            w("3", 18, 16),
            w("4", 12, 6),
            w("5", 7, 8),
            w("6", 10, 11),
            w("7", 2, 4),
            w("8", 5, 13),
            w("9", 3, 23),
            w("10", 1, 0),
            w("x", 14, 21),
            w("y", 17, 15),
        ];
        Block { name: name.to_string(), kind: BlockKind::Quantifier(q), gadgets, spine, wires, ext_names: Vec::new() }
    }

    /// CNF evaluation over padded clauses for variables `1..=n`.
    ///
    /// Each clause is three literal Switches tested in series; the false exit
    /// of one feeds the next Test, the true exits merge through two Fan-ins
    /// into the next clause, and the false exits of the last Switches merge
    /// through a chain of Fan-ins into F-Out. The path for `x_i` runs
    /// `Set→Out` through every Switch of an occurrence of `x_i`.
    pub fn cnf(name: &str, n: usize, clauses: &[[Literal; 3]]) -> Block {
        let m = clauses.len();
        assert!(m > 0, "a CNF block needs a clause");
        let mut gadgets = Vec::new();
        let mut lit = vec![[0usize; 3]; m];
        let mut or = vec![[0usize; 2]; m];
        for j in 0..m {
            for k in 0..3 {
                lit[j][k] = gadgets.len();
                gadgets.push((format!("c{}.l{}", j + 1, k + 1), switch(&[])));
            }
            for r in 0..2 {
                or[j][r] = gadgets.len();
                gadgets.push((format!("c{}.or{}", j + 1, r + 1), fanin(["a", "b", "c"], &[])));
            }
        }
        let mut falses = Vec::new();
        for i in 1..m {
            falses.push(gadgets.len());
            gadgets.push((format!("false{i}"), fanin(["a", "b", "c"], &[])));
        }

        let mut spine = vec![Point::Ext("In")];
        let mut at = std::collections::HashMap::new();
        let mut place = |spine: &mut Vec<Point>, g: usize, p: &str| {
            let idx = gadgets[g].1.port(p).unwrap();
            at.insert((g, idx), spine.len());
            spine.push(Point::Port(g, idx));
        };
        for j in 0..m {
            for k in 0..3 {
                for p in ["Test", "F-Out", "Set", "Out", "T-Out"] {
                    place(&mut spine, lit[j][k], p);
                }
            }
            for r in 0..2 {
                for p in ["a", "b", "c"] {
                    place(&mut spine, or[j][r], p);
                }
            }
        }
        for &f in &falses {
            for p in ["a", "b", "c"] {
                place(&mut spine, f, p);
            }
        }
        let t_out = spine.len();
        spine.push(Point::Ext("T-Out"));
        let f_out = spine.len();
        spine.push(Point::Ext("F-Out"));
        let mut ext_names = Vec::new();
        let mut var_in = vec![0; n + 1];
        let mut var_out = vec![0; n + 1];
        for v in (1..=n).rev() {
            var_out[v] = spine.len();
            spine.push(Point::ExtOwned(ext_names.len()));
            ext_names.push(format!("x{v}-Out"));
            var_in[v] = spine.len();
            spine.push(Point::ExtOwned(ext_names.len()));
            ext_names.push(format!("x{v}-In"));
        }
        let pos = |g: usize, p: &str| at[&(g, gadgets[g].1.port(p).unwrap())];

        let mut wires = Vec::new();
        let mut wire = |label: String, from: usize, to: usize, rank: [usize; 4]| {
            wires.push(Wire { label, from, to, rank: Some(rank) });
        };
        for (j, clause) in clauses.iter().enumerate() {
            let c = j + 1;
            let entry = if j == 0 { 0 } else { pos(or[j - 1][1], "c") };
            wire(format!("c{c}.in"), entry, pos(lit[j][0], "Test"), [1, c, 0, 0]);
            for k in 0..3 {
                let (t, f) = if clause[k].positive { ("T-Out", "F-Out") } else { ("F-Out", "T-Out") };
                let false_to = if k < 2 {
                    pos(lit[j][k + 1], "Test")
                } else if m == 1 {
                    f_out
                } else if j == 0 {
                    pos(falses[0], "a")
                } else {
                    pos(falses[j - 1], "b")
                };
                wire(format!("c{c}.l{}.f", k + 1), pos(lit[j][k], f), false_to, [1, c, k + 1, 1]);
                let true_to = match k {
                    0 => pos(or[j][0], "a"),
                    1 => pos(or[j][0], "b"),
                    _ => pos(or[j][1], "b"),
                };
                wire(format!("c{c}.l{}.t", k + 1), pos(lit[j][k], t), true_to, [1, c, k + 1, 2]);
            }
            wire(format!("c{c}.or"), pos(or[j][0], "c"), pos(or[j][1], "a"), [1, c, 2, 3]);
        }
        wire("true".to_string(), pos(or[m - 1][1], "c"), t_out, [1, m + 1, 0, 0]);
        for (i, &f) in falses.iter().enumerate() {
            let to = if i + 1 < falses.len() { pos(falses[i + 1], "a") } else { f_out };
            wire(format!("false{}", i + 1), pos(f, "c"), to, [1, i + 2, 3, 4]);
        }
        for v in 1..=n {
            let occurrences: Vec<usize> = (0..m)
                .flat_map(|j| (0..3).map(move |k| (j, k)))
                .filter(|&(j, k)| clauses[j][k].var == v)
                .map(|(j, k)| lit[j][k])
                .collect();
            let mut from = var_in[v];
            for (p, &s) in occurrences.iter().enumerate() {
                wire(format!("x{v}.{p}"), from, pos(s, "Set"), [0, v, p, 0]);
                from = pos(s, "Out");
            }
            wire(format!("x{v}.{}", occurrences.len()), from, var_out[v], [0, v, occurrences.len(), 0]);
        }
        Block { name: name.to_string(), kind: BlockKind::Cnf, gadgets, spine, wires, ext_names }
    }

    pub fn point_name(&self, i: usize) -> String {
        match self.spine[i] {
            Point::Ext(n) => n.to_string(),
            Point::ExtOwned(k) => self.ext_names[k].clone(),
            Point::Port(g, p) => format!("{}.{}", self.gadgets[g].0, self.gadgets[g].1.ports()[p]),
        }
    }

    pub fn is_external(&self, i: usize) -> bool {
        !matches!(self.spine[i], Point::Port(..))
    }

    /// Spine position of an external port.
    pub fn external_position(&self, name: &str) -> Option<usize> {
        (0..self.spine.len()).find(|&i| self.is_external(i) && self.point_name(i) == name)
    }

    /// External port names in spine order.
    pub fn external_ports(&self) -> Vec<String> {
        (0..self.spine.len()).filter(|&i| self.is_external(i)).map(|i| self.point_name(i)).collect()
    }

    pub fn wire(&self, label: &str) -> Option<usize> {
        self.wires.iter().position(|w| w.label == label)
    }

    /// Wire attached at spine position `i`.
    pub fn wire_at(&self, i: usize) -> Option<usize> {
        self.wires.iter().position(|w| w.from == i || w.to == i)
    }

    fn span(&self, w: usize) -> (usize, usize) {
        let w = &self.wires[w];
        (w.from.min(w.to), w.from.max(w.to))
    }

    /// Pairs of wires whose arcs cross, as indices with `s < t`.
    pub fn crossings(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in 0..self.wires.len() {
            for t in s + 1..self.wires.len() {
                let ((a, b), (c, d)) = (self.span(s), self.span(t));
                if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                    out.push((s, t));
                }
            }
        }
        out
    }

    /// Horizontal coordinate where the semicircle arcs of two crossing wires meet.
    pub fn crossing_x(&self, s: usize, t: usize) -> f64 {
        let circle = |w: usize| {
            let (a, b) = self.span(w);
            ((a + b) as f64 / 2.0, (b - a) as f64 / 2.0)
        };
        let ((c1, r1), (c2, r2)) = (circle(s), circle(t));
        (r1 * r1 - r2 * r2 + c2 * c2 - c1 * c1) / (2.0 * (c2 - c1))
    }

    /// Crossover placement for a crossing of wires `s` and `t`.
    pub fn orient(&self, s: usize, t: usize) -> CrossingDecl {
        let full = |w: usize| format!("{}.{}", self.name, self.wires[w].label);
        let decl = |a: usize, a_fwd: bool, b: usize, b_fwd: bool, initial| CrossingDecl {
            a_tunnel: full(a),
            a_forward_is_a_to_a: a_fwd,
            b_tunnel: full(b),
            b_forward_is_b_to_b: b_fwd,
            initial,
        };
        match self.kind {
            BlockKind::Cnf => {
                let (rs, rt) = (self.wires[s].rank.unwrap(), self.wires[t].rank.unwrap());
                // the wire used later is the A→a tunnel
                let (a, b) = if rs > rt { (s, t) } else { (t, s) };
                decl(a, true, b, true, CrossoverInit::Fresh)
            }
            BlockKind::Quantifier(_) => {
                let num = |w: usize| self.wires[w].label.parse::<u32>().ok();
                match (num(s), num(t)) {
                    (Some(i), Some(j)) => {
                        let (a, b) = if i > j { (s, t) } else { (t, s) };
                        decl(a, true, b, true, CrossoverInit::Fresh)
                    }
                    (None, None) => {
                        // x is always used before y
                        let (x, y) = if self.wires[s].label == "x" { (s, t) } else { (t, s) };
                        decl(y, true, x, true, CrossoverInit::Fresh)
                    }
                    (i, _) => {
                        let (n, xy) = if i.is_some() { (s, t) } else { (t, s) };
                        match num(n).unwrap() {
                            1 => decl(xy, true, n, true, CrossoverInit::Fresh),
                            2 | 6 | 7 | 8 => decl(n, false, xy, true, CrossoverInit::AfterAa),
                            _ => decl(n, true, xy, true, CrossoverInit::Fresh),
                        }
                    }
                }
            }
        }
    }

    /// All crossover placements of this block, ordered by wire pair.
    pub fn crossing_decls(&self) -> Vec<CrossingDecl> {
        self.crossings().into_iter().map(|(s, t)| self.orient(s, t)).collect()
    }

    /// The block as a black box with its external ports.
    pub fn composite(&self) -> Composite {
        let mut internal = Vec::new();
        let mut external = Vec::new();
        let mut wires = Vec::new();
        for w in &self.wires {
            match (self.spine[w.from], self.spine[w.to]) {
                (Point::Port(g, p), Point::Port(h, q)) => internal.push((PortRef::new(g, p), PortRef::new(h, q))),
                (Point::Port(g, p), _) => external.push((self.point_name(w.to), PortRef::new(g, p))),
                (_, Point::Port(g, p)) => external.push((self.point_name(w.from), PortRef::new(g, p))),
                _ => wires.push((self.point_name(w.from), self.point_name(w.to))),
            }
        }
        let mut c = Composite::new(self.name.clone(), self.gadgets.clone(), &internal, external)
            .expect("block wiring is a matching");
        for (a, b) in wires {
            c.add_wire(a, b);
        }
        c
    }

    /// Wires traversed by one composite traversal, as `(label, forward)`.
    pub fn wires_traversed(
        &self,
        c: &Composite,
        entry: usize,
        moves: &[(usize, PortIdx, PortIdx)],
    ) -> Vec<(String, bool)> {
        let at_point = |pt: usize| -> (String, bool) {
            let w = self.wire_at(pt).expect("every spine point has a wire");
            (self.wires[w].label.clone(), self.wires[w].to == pt)
        };
        let locate = |g: usize, p: PortIdx| {
            (0..self.spine.len()).find(|&i| self.spine[i] == Point::Port(g, p)).expect("port on spine")
        };
        let ext = |name: &str| self.external_position(name).expect("external port on spine");
        let mut out = Vec::new();
        let entry_pt = ext(&c.external()[entry].0);
        if moves.is_empty() {
            // bare wire: entering at one end, leaving at the other
            let (label, _) = at_point(entry_pt);
            let w = self.wire(&label).unwrap();
            out.push((label, self.wires[w].from == entry_pt));
            return out;
        }
        // entering: arriving at the first gadget port
        let (g, p, _) = moves[0];
        out.push(at_point(locate(g, p)));
        for &(g, _, x) in moves {
            let (label, toward) = at_point(locate(g, x));
            out.push((label, !toward));
        }
        out
    }
}

/// Universal quantifier contract; the existential one swaps T/F roles.
pub fn quantifier_contract(q: Quantifier) -> Vec<Vec<(String, String)>> {
    let base: [&[(&str, &str)]; 3] = [
        &[("In", "Out"), ("F-In", "F-Out")],
        &[("In", "Out"), ("T-In", "T-In"), ("Out", "Write-Out"), ("Write-In", "Out"), ("F-In", "F-Out")],
        &[("In", "Out"), ("T-In", "T-In"), ("Out", "Write-Out"), ("Write-In", "Out"), ("T-In", "T-Out")],
    ];
    let rename = |p: &str| -> String {
        match q {
            Quantifier::Universal => p.to_string(),
            Quantifier::Existential => swap_role(p).to_string(),
        }
    };
    base.iter().map(|seq| seq.iter().map(|(a, b)| (rename(a), rename(b))).collect()).collect()
}
