//! Properties of the brute-force QBF oracle.

use gadgetnet::qbf::{parse_qbf, Clause, Literal, QbfFormula, Quantifier};
use proptest::prelude::*;

/// Random formula over `1..=n` with a shuffled prefix and 1 to 4 clauses.
fn arb_formula(max_vars: usize) -> impl Strategy<Value = QbfFormula> {
    (1..=max_vars).prop_flat_map(|n| {
        let prefix = (Just((1..=n).collect::<Vec<_>>()).prop_shuffle(), prop::collection::vec(any::<bool>(), n));
        let lit = (1..=n, any::<bool>()).prop_map(|(var, positive)| Literal { var, positive });
        let clause = prop::collection::vec(lit, 1..=3);
        (prefix, prop::collection::vec(clause, 1..=4)).prop_map(|((order, kinds), clauses)| {
            let quantifiers = order
                .into_iter()
                .zip(kinds)
                .map(|(v, a)| (if a { Quantifier::Universal } else { Quantifier::Existential }, v))
                .collect();
            QbfFormula::new(quantifiers, clauses).unwrap()
        })
    })
}

/// Truth table of the matrix over all assignments, collapsed one quantifier
/// at a time from the innermost outwards.
fn expand(f: &QbfFormula) -> bool {
    let n = f.num_vars();
    let holds = |mask: usize, c: &Clause| c.iter().any(|l| ((mask >> (l.var - 1)) & 1 == 1) == l.positive);
    let mut table: Vec<bool> = (0..1usize << n).map(|mask| f.clauses().iter().all(|c| holds(mask, c))).collect();
    // after collapsing variable v, entries with bit v set are ignored
    for &(q, var) in f.quantifiers().iter().rev() {
        let bit = 1usize << (var - 1);
        for mask in 0..table.len() {
            if mask & bit == 0 {
                let (lo, hi) = (table[mask], table[mask | bit]);
                table[mask] = match q {
                    Quantifier::Universal => lo && hi,
                    Quantifier::Existential => lo || hi,
                };
            }
        }
    }
    table[0]
}

proptest! {
    #[test]
    fn evaluate_matches_full_expansion(f in arb_formula(6)) {
        prop_assert_eq!(f.evaluate(), expand(&f));
    }

    #[test]
    fn duplicating_a_literal_keeps_the_value(f in arb_formula(5), pick in any::<prop::sample::Index>()) {
        let short: Vec<usize> = (0..f.clauses().len()).filter(|&i| f.clauses()[i].len() < 3).collect();
        prop_assume!(!short.is_empty());
        let i = short[pick.index(short.len())];
        let mut clauses = f.clauses().to_vec();
        let lit = clauses[i][0];
        clauses[i].push(lit);
        let g = QbfFormula::new(f.quantifiers().to_vec(), clauses).unwrap();
        prop_assert_eq!(g.evaluate(), f.evaluate());
    }

    #[test]
    fn negating_a_variable_is_an_involution(f in arb_formula(5), v in 1usize..=5) {
        prop_assume!(v <= f.num_vars());
        let g = f.negate_variable(v);
        prop_assert_eq!(g.negate_variable(v), f.clone());
        prop_assert_eq!(g.quantifiers(), f.quantifiers());
    }

    #[test]
    fn text_round_trips(f in arb_formula(5)) {
        prop_assert_eq!(parse_qbf(&f.to_text()).unwrap(), f);
    }
}

#[test]
fn regression_formulas() {
    let cases = [
        ("qbf 1 1\ne 1\n1 0\n", true),
        ("qbf 1 1\na 1\n1 0\n", false),
        ("qbf 2 1\na 1\ne 2\n-2 0\n", true),
        ("qbf 2 1\na 1\ne 2\n2 -2 0\n", true),
    ];
    for (text, want) in cases {
        let f = parse_qbf(text).unwrap();
        assert_eq!(f.evaluate(), want, "{f}");
        assert_eq!(expand(&f), want, "{f}");
    }
}
