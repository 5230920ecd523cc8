use serde::{Deserialize, Serialize};

use super::ast::{Atom, Formula};
use super::term::{bitlen, LinearTerm};

/// Size and shape measurements of a formula.
///
/// `phi_bits` uses this accounting: every operator, relation, quantifier and
/// variable occurrence costs 1, every integer `n` costs `bitlen(n)` (see
/// [`bitlen`]). An n-ary `and`/`or` costs `n - 1`, as its binary chain would.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub total_vars: usize,
    pub num_inequalities: usize,
    pub num_quantifier_alternations: usize,
    pub phi_bits: u64,
}

impl ShapeReport {
    /// Membership in Short-PA_{k,t}.
    pub fn is_short(&self, k: usize, t: usize) -> bool {
        self.total_vars <= k && self.num_inequalities <= t
    }
}

pub fn shape(f: &Formula) -> ShapeReport {
    ShapeReport {
        total_vars: f.all_vars().len(),
        num_inequalities: f.atoms().iter().map(|a| a.inequality_count()).sum(),
        num_quantifier_alternations: alternations(f, false, None),
        phi_bits: phi_bits(f),
    }
}

/// Maximum number of ∃/∀ switches along any root-to-leaf path, with
/// quantifiers under an odd number of negations counted dually.
fn alternations(f: &Formula, negated: bool, last: Option<bool>) -> usize {
    match f {
        Formula::Exists(_, b) | Formula::Forall(_, b) => {
            let existential = matches!(f, Formula::Exists(..)) != negated;
            let step = usize::from(last.is_some_and(|l| l != existential));
            step + alternations(b, negated, Some(existential))
        }
        Formula::Not(g) => alternations(g, !negated, last),
        _ => f
            .children()
            .into_iter()
            .map(|c| alternations(c, negated, last))
            .max()
            .unwrap_or(0),
    }
}

pub fn phi_bits(f: &Formula) -> u64 {
    match f {
        Formula::True | Formula::False => 1,
        Formula::Atom(a) => atom_bits(a),
        Formula::Not(g) => 1 + phi_bits(g),
        Formula::And(cs) | Formula::Or(cs) => {
            (cs.len() as u64).saturating_sub(1) + cs.iter().map(phi_bits).sum::<u64>()
        }
        Formula::Exists(_, b) | Formula::Forall(_, b) => 2 + phi_bits(b),
    }
}

fn atom_bits(a: &Atom) -> u64 {
    match a {
        Atom::Le(l, r) | Atom::Lt(l, r) | Atom::Eq(l, r) => 1 + term_bits(l) + term_bits(r),
        Atom::Div { modulus, term } => 1 + bitlen(modulus) + term_bits(term),
    }
}

/// `Σ cᵢ·vᵢ + k`: per variable one occurrence, one `*` and the coefficient;
/// one `+` per extra summand; the constant when nonzero or alone.
pub fn term_bits(t: &LinearTerm) -> u64 {
    let mut bits = 0;
    let mut summands = 0u64;
    for (_, c) in t.coeffs() {
        bits += 2 + bitlen(c);
        summands += 1;
    }
    if !num_traits::Zero::is_zero(t.constant_part()) || summands == 0 {
        bits += bitlen(t.constant_part());
        summands += 1;
    }
    bits + summands - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn single_atom() {
        let s = shape(&parse("(<= x 5)").unwrap());
        assert_eq!(s.total_vars, 1);
        assert_eq!(s.num_inequalities, 1);
        assert_eq!(s.num_quantifier_alternations, 0);
        // relation 1, x: var 1 + `*` 1 + bitlen(1)=2, 5: bitlen 4
        assert_eq!(s.phi_bits, 1 + 4 + 4);
        assert!(s.is_short(1, 1));
        assert!(!s.is_short(0, 1));
    }

    #[test]
    fn equality_counts_twice() {
        let s = shape(&parse("(exists t (= t (+ x y)))").unwrap());
        assert_eq!(s.total_vars, 3);
        assert_eq!(s.num_inequalities, 2);
    }

    #[test]
    fn alternations_follow_polarity() {
        let f = parse("(exists u (forall v (<= u v)))").unwrap();
        assert_eq!(shape(&f).num_quantifier_alternations, 1);
        let g = parse("(exists u (not (exists v (<= u v))))").unwrap();
        assert_eq!(shape(&g).num_quantifier_alternations, 1);
        let h = parse("(not (exists u (exists v (<= u v))))").unwrap();
        assert_eq!(shape(&h).num_quantifier_alternations, 0);
    }

    #[test]
    fn and_is_additive() {
        let f = parse("(<= x 5)").unwrap();
        let g = parse("(exists t (< (* 3 t) (+ y -2)))").unwrap();
        let both = Formula::and(vec![f.clone(), g.clone()]);
        assert_eq!(phi_bits(&both), phi_bits(&f) + phi_bits(&g) + 1);
    }
}
