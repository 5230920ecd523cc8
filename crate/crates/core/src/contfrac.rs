//! Finite continued fractions `[a₀; a₁, …, a_L]` of nonnegative rationals
//! and their convergents, in exact big-integer arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::serde_util::bigint_str;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContFracError {
    #[error("continued fraction needs at least one term")]
    Empty,
    #[error("leading term must be nonnegative")]
    NegativeLead,
    #[error("term a_{0} must be at least 1")]
    NonPositiveTerm(usize),
    #[error("last term must be at least 2 when there is more than one term")]
    NonCanonicalTail,
    #[error("rational must have p >= 0 and q >= 1")]
    BadRational,
}

/// A canonical continued fraction: `a₀ ≥ 0`, `aᵢ ≥ 1` for `i ≥ 1`, and the
/// last term is at least 2 whenever `L ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContinuedFraction {
    #[serde(serialize_with = "bigint_str::vec::serialize")]
    terms: Vec<BigInt>,
}

/// The `k`-th convergent `p_k / q_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub index: usize,
    #[serde(with = "bigint_str")]
    pub p: BigInt,
    #[serde(with = "bigint_str")]
    pub q: BigInt,
}

impl ContinuedFraction {
    pub fn new(terms: Vec<BigInt>) -> Result<Self, ContFracError> {
        let Some(first) = terms.first() else {
            return Err(ContFracError::Empty);
        };
        if first.is_negative() {
            return Err(ContFracError::NegativeLead);
        }
        if let Some(i) = terms.iter().skip(1).position(|a| *a < BigInt::one()) {
            return Err(ContFracError::NonPositiveTerm(i + 1));
        }
        if terms.len() > 1 && *terms.last().unwrap() < BigInt::from(2) {
            return Err(ContFracError::NonCanonicalTail);
        }
        Ok(Self { terms })
    }

    /// Canonical expansion of `p/q` by the Euclidean algorithm.
    pub fn from_rational(p: &BigInt, q: &BigInt) -> Result<Self, ContFracError> {
        if p.is_negative() || *q < BigInt::one() {
            return Err(ContFracError::BadRational);
        }
        let mut terms = Vec::new();
        let (mut a, mut b) = (p.clone(), q.clone());
        while !b.is_zero() {
            let (quot, rem) = a.div_rem(&b);
            terms.push(quot);
            a = b;
            b = rem;
        }
        // Euclid's last quotient is ≥ 2 whenever there are two or more terms.
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[BigInt] {
        &self.terms
    }

    /// `L`, the index of the last term.
    pub fn depth(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn convergents(&self) -> Vec<Convergent> {
        // seeds p₋₂ = 0, p₋₁ = 1, q₋₂ = 1, q₋₁ = 0
        let (mut p2, mut p1) = (BigInt::zero(), BigInt::one());
        let (mut q2, mut q1) = (BigInt::one(), BigInt::zero());
        let mut out = Vec::with_capacity(self.terms.len());
        for (index, a) in self.terms.iter().enumerate() {
            let p = a * &p1 + &p2;
            let q = a * &q1 + &q2;
            p2 = std::mem::replace(&mut p1, p.clone());
            q2 = std::mem::replace(&mut q1, q.clone());
            out.push(Convergent { index, p, q });
        }
        out
    }

    /// The value `p/q` in lowest terms.
    pub fn to_rational(&self) -> (BigInt, BigInt) {
        let last = self.convergents().pop().expect("nonempty");
        (last.p, last.q)
    }
}
