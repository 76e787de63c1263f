//! Shared fixtures for the benchmarks.

use gadgetnet::qbf::enumerate_formulas;
use gadgetnet::{parse_qbf, QbfFormula};

/// Alternating chain `∀x1 ∃x2 … : (x1 ∨ ¬x2) ∧ (x2 ∨ ¬x3) ∧ …` on `n` variables.
pub fn chain(n: usize) -> QbfFormula {
    let mut text = format!("qbf {n} {}\n", n.saturating_sub(1).max(1));
    for v in 1..=n {
        text += &format!("{} {v}\n", if v % 2 == 1 { 'a' } else { 'e' });
    }
    if n == 1 {
        text += "1 -1 0\n";
    }
    for v in 1..n {
        text += &format!("{v} -{} 0\n", v + 1);
    }
    parse_qbf(&text).expect("chain formulas are well formed")
}

/// Every formula with `n` variables and one clause.
pub fn small_corpus(n: usize) -> Vec<QbfFormula> {
    enumerate_formulas(n, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chains_parse_and_evaluate() {
        // x1 ∨ ¬x1 is a tautology; longer chains fail when ∀ picks x1 false and ∃ must pick x2 true
        assert!(chain(1).evaluate());
        for n in 2..=5 {
            assert_eq!(chain(n).num_vars(), n);
        }
    }
}
