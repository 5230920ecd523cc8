//! Quantifier elimination for Presburger arithmetic (Cooper's method) and
//! the decision procedure built on it.

mod qf;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::formula::{Atom, Formula, FormulaError, LinearTerm};
use qf::{Lit, Qf, Rel, Term, Var};

/// Environment variable overriding [`QeConfig::max_atoms`].
pub const MAX_ATOMS_ENV: &str = "PAVC_MAX_ATOMS";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QeError {
    #[error("quantifier elimination would produce about {atoms} atoms, above the cap {cap}")]
    AtomCap { atoms: usize, cap: usize },
    #[error("quantifier elimination produced a {bits}-bit coefficient, above the cap {cap}")]
    CoeffCap { bits: u64, cap: u64 },
    #[error("sentence expected, but `{0}` is free")]
    FreeVariable(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

#[derive(Debug, Clone)]
pub struct QeConfig {
    pub max_atoms: usize,
    pub max_coeff_bits: u64,
}

impl Default for QeConfig {
    fn default() -> Self {
        Self {
            max_atoms: 1_000_000,
            max_coeff_bits: 100_000,
        }
    }
}

impl QeConfig {
    /// Defaults, with the atom cap taken from `PAVC_MAX_ATOMS` when set.
    pub fn from_env() -> Self {
        let mut c = Self::default();
        if let Some(n) = std::env::var(MAX_ATOMS_ENV).ok().and_then(|s| s.trim().parse().ok()) {
            c.max_atoms = n;
        }
        c
    }
}

/// A formula without quantifiers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QfFormula(Formula);

impl QfFormula {
    /// Returns `None` if `f` has a quantifier.
    pub fn new(f: Formula) -> Option<Self> {
        f.is_quantifier_free().then_some(Self(f))
    }

    pub fn formula(&self) -> &Formula {
        &self.0
    }

    pub fn into_formula(self) -> Formula {
        self.0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct QeStats {
    pub atoms_before: usize,
    pub atoms_after: usize,
    pub max_coeff_bits: u64,
}

#[derive(Debug, Clone)]
pub struct QeOutcome {
    pub formula: QfFormula,
    pub stats: QeStats,
}

/// A quantifier-free formula with the same free variables' solution set
/// over ℤ, using the default caps.
pub fn eliminate_quantifiers(f: &Formula) -> Result<QfFormula, QeError> {
    eliminate_quantifiers_with(f, &QeConfig::default()).map(|o| o.formula)
}

pub fn eliminate_quantifiers_with(f: &Formula, config: &QeConfig) -> Result<QeOutcome, QeError> {
    f.check_binding()?;
    let mut e = Eliminator::new(config);
    let qf = e.convert(f, false)?;
    let out = e.to_formula(&qf);
    let stats = QeStats {
        atoms_before: f.atom_count(),
        atoms_after: out.atom_count(),
        max_coeff_bits: qf.max_coeff_bits(),
    };
    Ok(QeOutcome {
        formula: QfFormula(out),
        stats,
    })
}

/// Truth of a sentence over ℤ.
pub fn decide(f: &Formula) -> Result<bool, QeError> {
    decide_with(f, &QeConfig::default())
}

pub fn decide_with(f: &Formula, config: &QeConfig) -> Result<bool, QeError> {
    if let Some(v) = f.free_vars().into_iter().next() {
        return Err(QeError::FreeVariable(v));
    }
    f.check_binding()?;
    let mut e = Eliminator::new(config);
    match e.convert(f, false)? {
        Qf::True => Ok(true),
        Qf::False => Ok(false),
        other => unreachable!("ground literals fold to constants, got {other:?}"),
    }
}

struct Eliminator<'c> {
    config: &'c QeConfig,
    names: Vec<String>,
    ids: HashMap<String, Var>,
}

impl<'c> Eliminator<'c> {
    fn new(config: &'c QeConfig) -> Self {
        Self {
            config,
            names: Vec::new(),
            ids: HashMap::new(),
        }
    }

    fn intern(&mut self, name: &str) -> Var {
        if let Some(&v) = self.ids.get(name) {
            return v;
        }
        let v = self.names.len() as Var;
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), v);
        v
    }

    fn term(&mut self, t: &LinearTerm) -> Term {
        let mut coeffs: Vec<(Var, BigInt)> = t
            .coeffs()
            .map(|(v, c)| (self.intern(v), c.clone()))
            .collect();
        coeffs.sort_by_key(|(v, _)| *v);
        Term {
            coeffs,
            constant: t.constant_part().clone(),
        }
    }

    fn atom(&mut self, a: &Atom) -> Qf {
        match a {
            Atom::Le(l, r) => {
                let t = self.term(l).add_scaled(&self.term(r), &-BigInt::one());
                Qf::lit(Rel::Le, t)
            }
            Atom::Lt(l, r) => {
                let mut t = self.term(l).add_scaled(&self.term(r), &-BigInt::one());
                t.constant += 1;
                Qf::lit(Rel::Le, t)
            }
            Atom::Eq(l, r) => {
                let t = self.term(l).add_scaled(&self.term(r), &-BigInt::one());
                Qf::lit(Rel::Eq, t)
            }
            Atom::Div { modulus, term } => {
                let t = self.term(term);
                Qf::lit(Rel::Div(modulus.clone()), t)
            }
        }
    }

    /// Quantifier-free NNF of `f` (negated when `neg`), innermost
    /// quantifiers first.
    fn convert(&mut self, f: &Formula, neg: bool) -> Result<Qf, QeError> {
        Ok(match f {
            Formula::True => Qf::bool(!neg),
            Formula::False => Qf::bool(neg),
            Formula::Atom(a) => {
                let q = self.atom(a);
                if neg {
                    q.negate()
                } else {
                    q
                }
            }
            Formula::Not(g) => self.convert(g, !neg)?,
            Formula::And(cs) | Formula::Or(cs) => {
                let parts = cs
                    .iter()
                    .map(|c| self.convert(c, neg))
                    .collect::<Result<Vec<_>, _>>()?;
                if matches!(f, Formula::And(_)) != neg {
                    Qf::and(parts)
                } else {
                    Qf::or(parts)
                }
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                // ∀v b ≡ ¬∃v ¬b
                let forall = matches!(f, Formula::Forall(..));
                let x = self.intern(v);
                let inner = self.convert(body, forall)?;
                let r = self.exists(x, inner)?;
                if forall != neg {
                    r.negate()
                } else {
                    r
                }
            }
        })
    }

    fn check(&self, q: &Qf) -> Result<(), QeError> {
        let atoms = q.size();
        if atoms > self.config.max_atoms {
            return Err(QeError::AtomCap {
                atoms,
                cap: self.config.max_atoms,
            });
        }
        let bits = q.max_coeff_bits();
        if bits > self.config.max_coeff_bits {
            return Err(QeError::CoeffCap {
                bits,
                cap: self.config.max_coeff_bits,
            });
        }
        Ok(())
    }

    /// Eliminates `∃x` from the quantifier-free `phi`.
    fn exists(&mut self, x: Var, phi: Qf) -> Result<Qf, QeError> {
        if !phi.mentions(x) {
            return Ok(phi);
        }
        let r = match phi {
            Qf::Or(cs) => {
                let mut out = Vec::with_capacity(cs.len());
                let mut size = 0;
                for c in cs {
                    let r = self.exists(x, c)?;
                    size += r.size();
                    if size > self.config.max_atoms {
                        return Err(QeError::AtomCap {
                            atoms: size,
                            cap: self.config.max_atoms,
                        });
                    }
                    out.push(r);
                }
                Qf::or(out)
            }
            Qf::And(cs) => {
                let (with, without): (Vec<Qf>, Vec<Qf>) = cs.into_iter().partition(|c| c.mentions(x));
                let mut parts = without;
                parts.push(self.exists_conj(x, with)?);
                Qf::and(parts)
            }
            lit => self.exists_conj(x, vec![lit])?,
        };
        self.check(&r)?;
        Ok(r)
    }

    fn exists_conj(&mut self, x: Var, conj: Vec<Qf>) -> Result<Qf, QeError> {
        // an equation c·x + s = 0 among the conjuncts pins x down
        let best = conj
            .iter()
            .enumerate()
            .filter_map(|(i, c)| match c {
                Qf::Lit(Lit { rel: Rel::Eq, term }) => term.coeff(x).map(|a| (i, a.abs())),
                _ => None,
            })
            .min_by(|a, b| a.1.cmp(&b.1));
        if let Some((i, _)) = best {
            let mut rest = conj;
            let Qf::Lit(eq) = rest.swap_remove(i) else {
                unreachable!()
            };
            return Ok(solve_equation(x, &eq.term, Qf::and(rest)));
        }
        self.cooper(x, Qf::and(conj))
    }

    /// The smallest constant-width window `lo ≤ x ≤ lo + c` cut out by two
    /// unit-coefficient conjuncts, as `(lo, c)`.
    fn window(x: Var, conj: &Qf) -> Option<(Term, BigInt)> {
        let items: &[Qf] = match conj {
            Qf::And(cs) => cs,
            other => std::slice::from_ref(other),
        };
        let (mut lows, mut highs) = (vec![], vec![]);
        for it in items {
            if let Qf::Lit(Lit { rel: Rel::Le, term }) = it {
                match term.coeff(x) {
                    Some(a) if a.is_one() => highs.push(term.without(x).neg()),
                    Some(a) if (-a).is_one() => lows.push(term.without(x)),
                    _ => {}
                }
            }
        }
        let mut best: Option<(Term, BigInt)> = None;
        for lo in &lows {
            for hi in &highs {
                let diff = hi.add_scaled(lo, &-BigInt::one());
                if diff.is_ground() && best.as_ref().is_none_or(|(_, c)| diff.constant < *c) {
                    best = Some((lo.clone(), diff.constant));
                }
            }
        }
        best
    }

    fn cooper(&mut self, x: Var, phi: Qf) -> Result<Qf, QeError> {
        let plan = self.plan(x, phi);
        let cost = plan.cost();
        if let Some((lo, c)) = Self::window(x, &plan.source) {
            if c.is_negative() {
                return Ok(Qf::False);
            }
            if cost.as_ref().is_none_or(|n| c < BigInt::from(*n)) {
                let width = c.to_usize().unwrap() + 1;
                self.check_estimate(width.checked_mul(plan.source.size()))?;
                let mut out = Vec::with_capacity(width);
                for k in 0..width {
                    let mut v = lo.clone();
                    v.constant += k;
                    let r = plan.source.substitute(x, &v);
                    if r == Qf::True {
                        return Ok(Qf::True);
                    }
                    out.push(r);
                }
                return Ok(Qf::or(out));
            }
        }
        self.check_estimate(cost.and_then(|n| n.checked_mul(plan.phi.size())))?;
        let Plan {
            phi,
            from_below,
            bounds,
            points,
            holes,
            delta,
            ..
        } = plan;
        let steps = delta.to_usize().unwrap();

        // Beyond every bound only the periodic literals still depend on x.
        let infinite = phi.map_lits_of(x, &mut |lit| {
            let a = lit.term.coeff(x).unwrap();
            match &lit.rel {
                Rel::Le => Qf::bool(a.is_positive() == from_below),
                Rel::Eq => Qf::False,
                Rel::Ne => Qf::True,
                _ => Qf::Lit(lit.clone()),
            }
        });

        let sign = if from_below { BigInt::one() } else { -BigInt::one() };
        let mut out = Vec::new();
        for k in 0..steps {
            let k = BigInt::from(k);
            if infinite.mentions(x) || k.is_zero() {
                out.push(infinite.substitute(x, &Term::constant(&sign * &k)));
            }
            for b in &bounds {
                let mut c = b.clone();
                c.constant += &sign * &k;
                out.push(phi.substitute(x, &c));
            }
            if matches!(out.last(), Some(Qf::True)) {
                return Ok(Qf::True);
            }
        }
        for p in &points {
            out.push(phi.substitute(x, p));
        }
        for h in &holes {
            let mut c = h.clone();
            c.constant += &sign * &delta;
            out.push(phi.substitute(x, &c));
        }
        Ok(Qf::or(out))
    }

    fn check_estimate(&self, atoms: Option<usize>) -> Result<(), QeError> {
        match atoms {
            Some(n) if n <= self.config.max_atoms => Ok(()),
            n => Err(QeError::AtomCap {
                atoms: n.unwrap_or(usize::MAX),
                cap: self.config.max_atoms,
            }),
        }
    }

    /// Brings `x` to unit coefficients and collects the test points.
    fn plan(&self, x: Var, source: Qf) -> Plan {
        // scale every literal so that x has coefficient ±L, then read L·x as x
        let mut l = BigInt::one();
        source.for_each_lit(&mut |lit| {
            if let Some(a) = lit.term.coeff(x) {
                l = l.lcm(a);
            }
        });
        let mut phi = if l.is_one() {
            source.clone()
        } else {
            source.map_lits_of(x, &mut |lit| {
                let a = lit.term.coeff(x).unwrap();
                let f = &l / a.abs();
                let mut term = lit.term.scale(&f);
                let i = term.coeffs.binary_search_by_key(&x, |(v, _)| *v).unwrap();
                term.coeffs[i].1 = a.signum();
                let rel = match &lit.rel {
                    Rel::Div(m) => Rel::Div(m * &f),
                    Rel::NDiv(m) => Rel::NDiv(m * &f),
                    r => r.clone(),
                };
                Qf::Lit(Lit { rel, term })
            })
        };
        if !l.is_one() {
            phi = Qf::and(vec![phi, Qf::lit(Rel::Div(l.clone()), Term::var(x))]);
        }

        let mut delta = BigInt::one();
        let (mut lower, mut upper, mut points, mut holes) = (vec![], vec![], vec![], vec![]);
        phi.for_each_lit(&mut |lit| {
            let Some(a) = lit.term.coeff(x) else { return };
            // the literal reads  a·x + rest ⋈ 0  with a = ±1
            let rest = lit.term.without(x);
            let root = if a.is_positive() { rest.neg() } else { rest.clone() };
            match &lit.rel {
                Rel::Le if a.is_positive() => upper.push(root),
                Rel::Le => lower.push(root),
                Rel::Eq => points.push(root),
                Rel::Ne => holes.push(root),
                Rel::Div(m) | Rel::NDiv(m) => delta = delta.lcm(m),
            }
        });
        for v in [&mut lower, &mut upper, &mut points, &mut holes] {
            v.sort_unstable();
            v.dedup();
        }
        // Take the side with fewer test points.
        let from_below = lower.len() <= upper.len();
        let bounds = if from_below { lower } else { upper };
        Plan {
            source,
            phi,
            from_below,
            bounds,
            points,
            holes,
            delta,
        }
    }

    fn linear_term(&self, t: &Term) -> LinearTerm {
        LinearTerm::from_parts(
            t.coeffs.iter().map(|(v, c)| (self.names[*v as usize].as_str(), c.clone())),
            t.constant.clone(),
        )
    }

    /// Splits `t ⋈ 0` into `lhs ⋈ rhs` with nonnegative coefficients on
    /// both sides.
    fn sides(&self, t: &Term) -> (LinearTerm, LinearTerm) {
        let (pos, neg): (Vec<_>, Vec<_>) = t.coeffs.iter().cloned().partition(|(_, c)| c.is_positive());
        let neg: Vec<_> = neg.into_iter().map(|(v, c)| (v, -c)).collect();
        let (kl, kr) = if t.constant.is_positive() {
            (t.constant.clone(), BigInt::zero())
        } else {
            (BigInt::zero(), -&t.constant)
        };
        let l = Term { coeffs: pos, constant: kl };
        let r = Term { coeffs: neg, constant: kr };
        (self.linear_term(&l), self.linear_term(&r))
    }

    fn to_formula(&self, q: &Qf) -> Formula {
        match q {
            Qf::True => Formula::True,
            Qf::False => Formula::False,
            Qf::Lit(l) => match &l.rel {
                Rel::Le => {
                    let (a, b) = self.sides(&l.term);
                    Formula::le(a, b)
                }
                Rel::Eq | Rel::Ne => {
                    let (a, b) = self.sides(&l.term);
                    let eq = Formula::eq(a, b);
                    if l.rel == Rel::Eq {
                        eq
                    } else {
                        Formula::not(eq)
                    }
                }
                Rel::Div(m) | Rel::NDiv(m) => {
                    let d = Formula::atom(Atom::divides(m.clone(), self.linear_term(&l.term)));
                    if matches!(l.rel, Rel::Div(_)) {
                        d
                    } else {
                        Formula::not(d)
                    }
                }
            },
            Qf::And(cs) => Formula::and(cs.iter().map(|c| self.to_formula(c)).collect()),
            Qf::Or(cs) => Formula::or(cs.iter().map(|c| self.to_formula(c)).collect()),
        }
    }
}

struct Plan {
    source: Qf,
    phi: Qf,
    from_below: bool,
    bounds: Vec<Term>,
    points: Vec<Term>,
    holes: Vec<Term>,
    delta: BigInt,
}

impl Plan {
    /// Number of substituted copies Cooper's expansion would build.
    fn cost(&self) -> Option<usize> {
        self.delta
            .to_usize()
            .and_then(|d| d.checked_mul(self.bounds.len() + 1))
            .and_then(|n| n.checked_add(self.points.len() + self.holes.len()))
    }
}

/// `∃x (c·x + s = 0 ∧ rest)` ≡ `c | s ∧ rest[c·x := −s]`, with each
/// literal of `rest` scaled by |c| first.
fn solve_equation(x: Var, eq: &Term, rest: Qf) -> Qf {
    let c = eq.coeff(x).unwrap().clone();
    let s = eq.without(x);
    let c_abs = c.abs();
    // value that replaces |c|·x
    let value = if c.is_positive() { s.neg() } else { s.clone() };
    let body = rest.map_lits_of(x, &mut |lit| {
        let a = lit.term.coeff(x).unwrap();
        let term = lit.term.without(x).scale(&c_abs).add_scaled(&value, a);
        let rel = match &lit.rel {
            Rel::Div(m) => Rel::Div(m * &c_abs),
            Rel::NDiv(m) => Rel::NDiv(m * &c_abs),
            r => r.clone(),
        };
        Qf::lit(rel, term)
    });
    Qf::and(vec![Qf::lit(Rel::Div(c_abs), s), body])
}
