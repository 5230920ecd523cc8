use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Returns true when `name` matches `[a-zA-Z][a-zA-Z0-9_]*`.
pub fn is_valid_var(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// An integer linear expression `Σ cᵢ·vᵢ + k`.
///
/// Zero coefficients are never stored, so two terms denoting the same
/// expression compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearTerm {
    coeffs: BTreeMap<String, BigInt>,
    constant: BigInt,
}

impl LinearTerm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: impl Into<BigInt>) -> Self {
        Self {
            coeffs: BTreeMap::new(),
            constant: value.into(),
        }
    }

    /// The term `1·name`.
    ///
    /// Panics if `name` is not a valid identifier.
    pub fn var(name: &str) -> Self {
        Self::scaled_var(BigInt::one(), name)
    }

    /// The term `coeff·name`.
    pub fn scaled_var(coeff: impl Into<BigInt>, name: &str) -> Self {
        assert!(is_valid_var(name), "invalid variable name {name:?}");
        let mut t = Self::zero();
        t.add_coeff(name, coeff.into());
        t
    }

    pub fn from_parts<I, S>(coeffs: I, constant: impl Into<BigInt>) -> Self
    where
        I: IntoIterator<Item = (S, BigInt)>,
        S: AsRef<str>,
    {
        let mut t = Self::constant(constant);
        for (v, c) in coeffs {
            assert!(is_valid_var(v.as_ref()), "invalid variable name {:?}", v.as_ref());
            t.add_coeff(v.as_ref(), c);
        }
        t
    }

    /// Adds `coeff·name` to the term, dropping the entry if it cancels.
    pub fn add_coeff(&mut self, name: &str, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        match self.coeffs.get_mut(name) {
            Some(c) => {
                *c += coeff;
                if c.is_zero() {
                    self.coeffs.remove(name);
                }
            }
            None => {
                self.coeffs.insert(name.to_string(), coeff);
            }
        }
    }

    pub fn add_constant(&mut self, value: &BigInt) {
        self.constant += value;
    }

    pub fn coeff(&self, name: &str) -> Option<&BigInt> {
        self.coeffs.get(name)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&str, &BigInt)> {
        self.coeffs.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn constant_part(&self) -> &BigInt {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.coeffs.keys().map(String::as_str)
    }

    pub fn num_vars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.coeffs.contains_key(name)
    }

    pub fn scale(&self, factor: &BigInt) -> Self {
        if factor.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, v)| (k.clone(), v * factor))
                .collect(),
            constant: &self.constant * factor,
        }
    }

    /// Replaces `name` by the integer `value`, folding it into the constant.
    pub fn substitute(&self, name: &str, value: &BigInt) -> Self {
        match self.coeffs.get(name) {
            None => self.clone(),
            Some(c) => {
                let mut out = self.clone();
                out.coeffs.remove(name);
                out.constant += c * value;
                out
            }
        }
    }

    /// Replaces `name` by another linear term.
    pub fn substitute_term(&self, name: &str, replacement: &LinearTerm) -> Self {
        match self.coeffs.get(name) {
            None => self.clone(),
            Some(c) => {
                let c = c.clone();
                let mut out = self.clone();
                out.coeffs.remove(name);
                &out + &replacement.scale(&c)
            }
        }
    }

    /// Evaluates the term; `None` if some variable has no value.
    pub fn eval<'a, F>(&self, mut lookup: F) -> Option<BigInt>
    where
        F: FnMut(&str) -> Option<&'a BigInt>,
    {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * lookup(v)?;
        }
        Some(acc)
    }

    /// Largest bit length among coefficients and the constant.
    pub fn max_coeff_bits(&self) -> u64 {
        self.coeffs
            .values()
            .chain(std::iter::once(&self.constant))
            .map(|c| c.bits())
            .max()
            .unwrap_or(0)
    }
}

impl Add for &LinearTerm {
    type Output = LinearTerm;

    fn add(self, rhs: &LinearTerm) -> LinearTerm {
        let mut out = self.clone();
        for (v, c) in &rhs.coeffs {
            out.add_coeff(v, c.clone());
        }
        out.constant += &rhs.constant;
        out
    }
}

impl Sub for &LinearTerm {
    type Output = LinearTerm;

    fn sub(self, rhs: &LinearTerm) -> LinearTerm {
        self + &(-rhs)
    }
}

impl Neg for &LinearTerm {
    type Output = LinearTerm;

    fn neg(self) -> LinearTerm {
        LinearTerm {
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), -v)).collect(),
            constant: -&self.constant,
        }
    }
}

impl fmt::Display for LinearTerm {
    /// Canonical surface syntax: a bare integer, a bare variable, `(* c v)`,
    /// or `(+ ...)` with variables in name order and the constant last.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(v, c)| {
                if c.is_one() {
                    v.clone()
                } else {
                    format!("(* {c} {v})")
                }
            })
            .collect();
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push(self.constant.to_string());
        }
        if parts.len() == 1 {
            f.write_str(&parts[0])
        } else {
            write!(f, "(+ {})", parts.join(" "))
        }
    }
}

/// Bit length of an integer under the formula length convention:
/// `⌈log₂(|n|+1)⌉ + 1`, the extra bit being the sign.
pub fn bitlen(n: &BigInt) -> u64 {
    // ⌈log₂(m+1)⌉ equals the plain bit count of m for m ≥ 0.
    n.abs().bits() + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coefficients_are_dropped() {
        let t = LinearTerm::from_parts([("x", BigInt::from(0)), ("y", BigInt::from(2))], 3);
        assert_eq!(t.num_vars(), 1);
        let u = &t - &LinearTerm::scaled_var(2, "y");
        assert!(u.is_constant());
        assert_eq!(u, LinearTerm::constant(3));
    }

    #[test]
    fn substitution_folds_constants() {
        let t = LinearTerm::from_parts([("x", BigInt::from(1)), ("y", BigInt::from(1))], 0);
        let s = t.substitute("y", &BigInt::from(1));
        assert_eq!(s, LinearTerm::from_parts([("x", BigInt::from(1))], 1));
    }

    #[test]
    fn bitlen_convention() {
        assert_eq!(bitlen(&BigInt::from(0)), 1);
        assert_eq!(bitlen(&BigInt::from(1)), 2);
        assert_eq!(bitlen(&BigInt::from(-1)), 2);
        assert_eq!(bitlen(&BigInt::from(5)), 4);
        assert_eq!(bitlen(&BigInt::from(8)), 5);
        assert_eq!(bitlen(&BigInt::from(7)), 4);
    }

    #[test]
    fn identifiers() {
        assert!(is_valid_var("x"));
        assert!(is_valid_var("x_hat2"));
        assert!(!is_valid_var("2x"));
        assert!(!is_valid_var(""));
        assert!(!is_valid_var("_x"));
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(LinearTerm::constant(-4).to_string(), "-4");
        assert_eq!(LinearTerm::var("x").to_string(), "x");
        assert_eq!(LinearTerm::scaled_var(3, "x").to_string(), "(* 3 x)");
        let t = LinearTerm::from_parts([("y", BigInt::from(-2)), ("x", BigInt::from(1))], 7);
        assert_eq!(t.to_string(), "(+ x (* -2 y) 7)");
    }
}
