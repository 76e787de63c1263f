//! Prenex quantified Boolean formulas over a CNF matrix.
//!
//! The text format is line oriented:
//!
//! ```text
//! c comment
//! qbf 2 1
//! a 1
//! e 2
//! -2 0
//! ```
//!
//! The header gives the variable and clause counts, then one quantifier line
//! per variable in prefix order, then one clause per line as signed variable
//! indices terminated by `0`.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantifier {
    Universal,
    Existential,
}

impl Quantifier {
    fn symbol(self) -> &'static str {
        match self {
            Quantifier::Universal => "a",
            Quantifier::Existential => "e",
        }
    }
}

/// A variable occurrence. Variables are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, positive: false }
    }

    pub fn negated(self) -> Self {
        Literal { positive: !self.positive, ..self }
    }

    fn value(self, assignment: &[bool]) -> bool {
        assignment[self.var - 1] == self.positive
    }

    fn signed(self) -> i64 {
        if self.positive {
            self.var as i64
        } else {
            -(self.var as i64)
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "x{}", self.var)
        } else {
            write!(f, "¬x{}", self.var)
        }
    }
}

pub type Clause = Vec<Literal>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QbfError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("variable x{var} is used but not quantified")]
    UnboundVariable { var: usize },
    #[error("variable x{var} is quantified more than once")]
    DuplicateQuantifier { var: usize },
    #[error("clause {clause} is empty")]
    EmptyClause { clause: usize },
    #[error("clause {clause} has {len} literals; at most 3 are allowed")]
    ClauseTooLong { clause: usize, len: usize },
    #[error("quantified variables must be exactly 1..={n}; x{var} is out of range")]
    VariableOutOfRange { var: usize, n: usize },
}

/// A prenex formula `Q1 x_{v1} ... Qn x_{vn} : clauses`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QbfFormula {
    quantifiers: Vec<(Quantifier, usize)>,
    clauses: Vec<Clause>,
}

impl QbfFormula {
    pub fn new(quantifiers: Vec<(Quantifier, usize)>, clauses: Vec<Clause>) -> Result<Self, QbfError> {
        let n = quantifiers.len();
        let mut seen = vec![false; n + 1];
        for &(_, var) in &quantifiers {
            if var == 0 || var > n {
                return Err(QbfError::VariableOutOfRange { var, n });
            }
            if seen[var] {
                return Err(QbfError::DuplicateQuantifier { var });
            }
            seen[var] = true;
        }
        for (i, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(QbfError::EmptyClause { clause: i + 1 });
            }
            if clause.len() > 3 {
                return Err(QbfError::ClauseTooLong { clause: i + 1, len: clause.len() });
            }
            for lit in clause {
                if lit.var == 0 || lit.var > n || !seen[lit.var] {
                    return Err(QbfError::UnboundVariable { var: lit.var });
                }
            }
        }
        Ok(QbfFormula { quantifiers, clauses })
    }

    pub fn quantifiers(&self) -> &[(Quantifier, usize)] {
        &self.quantifiers
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_vars(&self) -> usize {
        self.quantifiers.len()
    }

    /// Brute-force evaluation by recursion over the quantifier prefix.
    pub fn evaluate(&self) -> bool {
        let mut assignment = vec![false; self.num_vars()];
        self.eval_from(0, &mut assignment)
    }

    fn eval_from(&self, depth: usize, assignment: &mut [bool]) -> bool {
        let Some(&(q, var)) = self.quantifiers.get(depth) else {
            return self.matrix_holds(assignment);
        };
        let branch = |value: bool, a: &mut [bool]| {
            a[var - 1] = value;
            self.eval_from(depth + 1, a)
        };
        let result = match q {
            Quantifier::Universal => branch(false, assignment) && branch(true, assignment),
            Quantifier::Existential => branch(false, assignment) || branch(true, assignment),
        };
        assignment[var - 1] = false;
        result
    }

    /// Whether every clause has a true literal under `assignment`
    /// (indexed by variable - 1).
    pub fn matrix_holds(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| clause.iter().any(|lit| lit.value(assignment)))
    }

    /// Flip the polarity of every occurrence of `var`.
    pub fn negate_variable(&self, var: usize) -> Self {
        let clauses = self
            .clauses
            .iter()
            .map(|c| c.iter().map(|&l| if l.var == var { l.negated() } else { l }).collect())
            .collect();
        QbfFormula { quantifiers: self.quantifiers.clone(), clauses }
    }

    /// Clauses padded to exactly three literals by repeating the first literal.
    pub fn padded_clauses(&self) -> Vec<[Literal; 3]> {
        self.clauses
            .iter()
            .map(|c| {
                let first = c[0];
                [first, *c.get(1).unwrap_or(&first), *c.get(2).unwrap_or(&first)]
            })
            .collect()
    }

    /// Position of `var` in the quantifier prefix.
    pub fn depth_of(&self, var: usize) -> usize {
        self.quantifiers.iter().position(|&(_, v)| v == var).expect("bound variable")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("qbf {} {}\n", self.num_vars(), self.clauses.len());
        for &(q, var) in &self.quantifiers {
            out.push_str(&format!("{} {}\n", q.symbol(), var));
        }
        for clause in &self.clauses {
            for lit in clause {
                out.push_str(&format!("{} ", lit.signed()));
            }
            out.push_str("0\n");
        }
        out
    }
}

impl fmt::Display for QbfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(q, var) in &self.quantifiers {
            let sym = match q {
                Quantifier::Universal => '∀',
                Quantifier::Existential => '∃',
            };
            write!(f, "{sym}x{var} ")?;
        }
        write!(f, ":")?;
        for (i, clause) in self.clauses.iter().enumerate() {
            if i > 0 {
                write!(f, " ∧")?;
            }
            write!(f, " (")?;
            for (j, lit) in clause.iter().enumerate() {
                if j > 0 {
                    write!(f, " ∨ ")?;
                }
                write!(f, "{lit}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

pub fn parse_qbf(text: &str) -> Result<QbfFormula, QbfError> {
    let syntax = |line: usize, message: String| QbfError::Syntax { line, message };
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('c'));

    let (hline, header) = lines.next().ok_or_else(|| syntax(1, "missing `qbf <n> <m>` header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "qbf" {
        return Err(syntax(hline, format!("expected `qbf <n> <m>`, found `{header}`")));
    }
    let count = |s: &str| s.parse::<usize>().map_err(|_| syntax(hline, format!("invalid count `{s}`")));
    let n = count(fields[1])?;
    let m = count(fields[2])?;

    let mut quantifiers = Vec::with_capacity(n);
    let mut clauses = Vec::with_capacity(m);
    for (lineno, line) in lines {
        let mut tokens = line.split_whitespace().peekable();
        let first = *tokens.peek().expect("non-empty line");
        if first == "a" || first == "e" {
            tokens.next();
            if !clauses.is_empty() {
                return Err(syntax(lineno, "quantifier line after clauses".into()));
            }
            let q = if first == "a" { Quantifier::Universal } else { Quantifier::Existential };
            let rest: Vec<&str> = tokens.collect();
            if rest.len() != 1 {
                return Err(syntax(lineno, format!("expected `{first} <var>`")));
            }
            let var =
                rest[0].parse::<usize>().map_err(|_| syntax(lineno, format!("invalid variable `{}`", rest[0])))?;
            quantifiers.push((q, var));
            continue;
        }
        let mut clause = Vec::new();
        let mut terminated = false;
        for tok in tokens {
            if terminated {
                return Err(syntax(lineno, format!("token `{tok}` after terminating 0")));
            }
            let v: i64 = tok.parse().map_err(|_| syntax(lineno, format!("invalid literal `{tok}`")))?;
            if v == 0 {
                terminated = true;
            } else {
                clause.push(Literal { var: v.unsigned_abs() as usize, positive: v > 0 });
            }
        }
        if !terminated {
            return Err(syntax(lineno, "clause not terminated by 0".into()));
        }
        if clause.is_empty() {
            return Err(QbfError::EmptyClause { clause: clauses.len() + 1 });
        }
        clauses.push(clause);
    }
    if quantifiers.len() != n {
        return Err(syntax(hline, format!("header declares {n} variables, found {} quantifiers", quantifiers.len())));
    }
    if clauses.len() != m {
        return Err(syntax(hline, format!("header declares {m} clauses, found {}", clauses.len())));
    }
    QbfFormula::new(quantifiers, clauses)
}

/// Every prenex formula with `n` variables (prefix order x1..xn, all
/// quantifier patterns) and up to `max_clauses` clauses, each clause a
/// sorted set of 1 to 3 distinct literals over distinct variables.
/// Clause lists are non-decreasing in a fixed literal-set order, so each
/// matrix appears once.
pub fn enumerate_formulas(n: usize, max_clauses: usize) -> Vec<QbfFormula> {
    let mut clause_pool: Vec<Clause> = Vec::new();
    for size in 1..=3.min(n) {
        for vars in combinations(n, size) {
            for signs in 0..(1u32 << size) {
                clause_pool.push(
                    vars.iter()
                        .enumerate()
                        .map(|(i, &v)| Literal { var: v, positive: signs & (1 << i) == 0 })
                        .collect(),
                );
            }
        }
    }
    let mut matrices: Vec<Vec<Clause>> = Vec::new();
    let mut stack: Vec<(Vec<usize>, usize)> = vec![(vec![], 0)];
    while let Some((chosen, from)) = stack.pop() {
        if !chosen.is_empty() {
            matrices.push(chosen.iter().map(|&i| clause_pool[i].clone()).collect());
        }
        if chosen.len() < max_clauses {
            for i in from..clause_pool.len() {
                let mut next = chosen.clone();
                next.push(i);
                stack.push((next, i));
            }
        }
    }
    matrices.sort();
    let mut out = Vec::new();
    for pattern in 0..(1u32 << n) {
        let quantifiers: Vec<(Quantifier, usize)> = (1..=n)
            .map(|v| {
                let q = if pattern & (1 << (v - 1)) == 0 { Quantifier::Universal } else { Quantifier::Existential };
                (q, v)
            })
            .collect();
        for matrix in &matrices {
            out.push(QbfFormula::new(quantifiers.clone(), matrix.clone()).expect("enumerated formula is valid"));
        }
    }
    out
}

/// A random prenex formula with `num_vars` variables in a shuffled prefix
/// order and 1 to `max_clauses` clauses of 1 to 3 literals.
pub fn random_formula<R: Rng>(num_vars: usize, max_clauses: usize, rng: &mut R) -> QbfFormula {
    assert!(num_vars > 0 && max_clauses > 0, "a formula needs a variable and a clause");
    let mut order: Vec<usize> = (1..=num_vars).collect();
    order.shuffle(rng);
    let quantifiers = order
        .into_iter()
        .map(|v| (if rng.gen_bool(0.5) { Quantifier::Universal } else { Quantifier::Existential }, v))
        .collect();
    let clauses = (0..rng.gen_range(1..=max_clauses))
        .map(|_| {
            (0..rng.gen_range(1..=3))
                .map(|_| Literal { var: rng.gen_range(1..=num_vars), positive: rng.gen_bool(0.5) })
                .collect()
        })
        .collect();
    QbfFormula::new(quantifiers, clauses).expect("random formula is valid")
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..=n {
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, k, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn random_formulas_are_seed_determined() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20).map(|_| random_formula(4, 3, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
        assert!(draw(7).iter().all(|f| f.num_vars() == 4 && (1..=3).contains(&f.clauses().len())));
    }

    #[test]
    fn parses_forall_exists_not_y() {
        let f = parse_qbf("qbf 2 1\na 1\ne 2\n-2 0\n").unwrap();
        assert_eq!(f.quantifiers(), &[(Quantifier::Universal, 1), (Quantifier::Existential, 2)]);
        assert_eq!(f.clauses(), &[vec![Literal::neg(2)]]);
    }

    #[test]
    fn parses_minimal_instance_with_comments() {
        let f = parse_qbf("c smallest true instance\nqbf 1 1\ne 1\n1 0\n").unwrap();
        assert_eq!(f.quantifiers(), &[(Quantifier::Existential, 1)]);
        assert_eq!(f.clauses(), &[vec![Literal::pos(1)]]);
    }

    #[test]
    fn rejects_unbound_variable() {
        let err = parse_qbf("qbf 2 1\na 1\ne 2\n1 3 0\n").unwrap_err();
        assert_eq!(err, QbfError::UnboundVariable { var: 3 });
    }

    #[test]
    fn rejects_duplicate_quantifier() {
        let err = parse_qbf("qbf 2 1\na 1\ne 1\n1 0\n").unwrap_err();
        assert_eq!(err, QbfError::DuplicateQuantifier { var: 1 });
    }

    #[test]
    fn rejects_empty_clause() {
        assert_eq!(parse_qbf("qbf 1 1\ne 1\n0\n").unwrap_err(), QbfError::EmptyClause { clause: 1 });
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        match parse_qbf("qbf 1 1\ne 1\n1 x 0\n").unwrap_err() {
            QbfError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match parse_qbf("qbf 1 1\ne 1\n1\n").unwrap_err() {
            QbfError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn evaluates_reference_formulas() {
        let f = QbfFormula::new(
            vec![(Quantifier::Universal, 1), (Quantifier::Existential, 2)],
            vec![vec![Literal::neg(2)]],
        )
        .unwrap();
        assert!(f.evaluate());
        let g = QbfFormula::new(
            vec![(Quantifier::Universal, 1), (Quantifier::Existential, 2)],
            vec![vec![Literal::pos(2), Literal::neg(2)]],
        )
        .unwrap();
        assert!(g.evaluate());
        let h = QbfFormula::new(vec![(Quantifier::Universal, 1)], vec![vec![Literal::pos(1)]]).unwrap();
        assert!(!h.evaluate());
    }

    #[test]
    fn text_round_trip() {
        let f = parse_qbf("qbf 3 2\ne 2\na 1\ne 3\n1 -2 3 0\n-3 0\n").unwrap();
        assert_eq!(parse_qbf(&f.to_text()).unwrap(), f);
    }

    #[test]
    fn padding_repeats_first_literal() {
        let f = parse_qbf("qbf 2 2\na 1\ne 2\n-2 0\n1 2 0\n").unwrap();
        let padded = f.padded_clauses();
        assert_eq!(padded[0], [Literal::neg(2); 3]);
        assert_eq!(padded[1], [Literal::pos(1), Literal::pos(2), Literal::pos(1)]);
    }

    #[test]
    fn enumeration_sizes() {
        // one variable: clauses {x1}, {¬x1}; matrices with ≤ 2 clauses: 2 + 3
        assert_eq!(enumerate_formulas(1, 2).len(), 2 * 5);
        for f in enumerate_formulas(2, 1) {
            assert!(f.clauses().len() == 1);
        }
    }
}
