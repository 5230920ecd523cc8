use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub(crate) type Var = u32;

/// `Σ cᵢ·xᵢ + k` over interned variables; coefficients sorted by variable
/// and never zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Term {
    pub coeffs: Vec<(Var, BigInt)>,
    pub constant: BigInt,
}

impl Term {
    pub fn constant(k: BigInt) -> Self {
        Self {
            coeffs: Vec::new(),
            constant: k,
        }
    }

    pub fn var(v: Var) -> Self {
        Self {
            coeffs: vec![(v, BigInt::one())],
            constant: BigInt::zero(),
        }
    }

    pub fn coeff(&self, v: Var) -> Option<&BigInt> {
        self.coeffs
            .binary_search_by_key(&v, |(w, _)| *w)
            .ok()
            .map(|i| &self.coeffs[i].1)
    }

    pub fn mentions(&self, v: Var) -> bool {
        self.coeff(v).is_some()
    }

    pub fn is_ground(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn without(&self, v: Var) -> Self {
        Self {
            coeffs: self.coeffs.iter().filter(|(w, _)| *w != v).cloned().collect(),
            constant: self.constant.clone(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::default();
        }
        Self {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigInt::one())
    }

    /// `self + k·other`.
    pub fn add_scaled(&self, other: &Term, k: &BigInt) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + other.coeffs.len());
        let (mut i, mut j) = (0, 0);
        while i < self.coeffs.len() || j < other.coeffs.len() {
            let a = self.coeffs.get(i);
            let b = other.coeffs.get(j);
            match (a, b) {
                (Some((va, ca)), Some((vb, cb))) if va == vb => {
                    let c = ca + cb * k;
                    if !c.is_zero() {
                        coeffs.push((*va, c));
                    }
                    i += 1;
                    j += 1;
                }
                (Some((va, ca)), Some((vb, _))) if va < vb => {
                    coeffs.push((*va, ca.clone()));
                    i += 1;
                }
                (Some((va, ca)), None) => {
                    coeffs.push((*va, ca.clone()));
                    i += 1;
                }
                (_, Some((vb, cb))) => {
                    let c = cb * k;
                    if !c.is_zero() {
                        coeffs.push((*vb, c));
                    }
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Self {
            coeffs,
            constant: &self.constant + &other.constant * k,
        }
    }

    /// The term with `v` replaced by `value`.
    pub fn substitute(&self, v: Var, value: &Term) -> Self {
        match self.coeff(v) {
            None => self.clone(),
            Some(c) => {
                let c = c.clone();
                self.without(v).add_scaled(value, &c)
            }
        }
    }

    pub fn max_coeff_bits(&self) -> u64 {
        self.coeffs
            .iter()
            .map(|(_, c)| c.bits())
            .chain(std::iter::once(self.constant.bits()))
            .max()
            .unwrap_or(0)
    }

    fn coeff_gcd(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |g, (_, c)| g.gcd(c))
    }

    fn div_exact(&self, g: &BigInt) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c / g)).collect(),
            constant: &self.constant / g,
        }
    }

    fn reduce_mod(&self, m: &BigInt) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, c)| (*v, c.mod_floor(m)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
            constant: self.constant.mod_floor(m),
        }
    }
}

/// Relation of a literal's term to zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Rel {
    Le,
    Eq,
    Ne,
    Div(BigInt),
    NDiv(BigInt),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Lit {
    pub rel: Rel,
    pub term: Term,
}

/// Quantifier-free formula in negation normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Qf {
    False,
    True,
    Lit(Lit),
    And(Vec<Qf>),
    Or(Vec<Qf>),
}

impl Qf {
    pub fn bool(b: bool) -> Self {
        if b {
            Qf::True
        } else {
            Qf::False
        }
    }

    /// Builds the literal `term rel 0` in normal form, folding it to a
    /// constant when decidable.
    pub fn lit(rel: Rel, term: Term) -> Self {
        match rel {
            Rel::Le => {
                if term.is_ground() {
                    return Qf::bool(!term.constant.is_positive());
                }
                let g = term.coeff_gcd();
                let term = if g.is_one() {
                    term
                } else {
                    // Σ aᵢxᵢ + c ≤ 0  ⇔  Σ (aᵢ/g)xᵢ + ⌈c/g⌉ ≤ 0
                    Term {
                        coeffs: term.coeffs.iter().map(|(v, c)| (*v, c / &g)).collect(),
                        constant: -(-&term.constant).div_floor(&g),
                    }
                };
                Qf::Lit(Lit { rel: Rel::Le, term })
            }
            Rel::Eq | Rel::Ne => {
                let eq = rel == Rel::Eq;
                if term.is_ground() {
                    return Qf::bool(term.constant.is_zero() == eq);
                }
                let g = term.coeff_gcd();
                if !term.constant.is_multiple_of(&g) {
                    return Qf::bool(!eq);
                }
                let mut term = term.div_exact(&g);
                if term.coeffs[0].1.is_negative() {
                    term = term.neg();
                }
                Qf::Lit(Lit { rel, term })
            }
            Rel::Div(_) | Rel::NDiv(_) => {
                let pos = matches!(rel, Rel::Div(_));
                let m = match rel {
                    Rel::Div(m) | Rel::NDiv(m) => m,
                    _ => unreachable!(),
                };
                let term = term.reduce_mod(&m);
                if term.is_ground() {
                    return Qf::bool(term.constant.is_zero() == pos);
                }
                let g = term.coeff_gcd().gcd(&term.constant).gcd(&m);
                let (m, term) = if g.is_one() {
                    (m, term)
                } else {
                    (&m / &g, term.div_exact(&g))
                };
                if m.is_one() {
                    return Qf::bool(pos);
                }
                // m | t ⇔ m | −t: keep the smaller representative
                let flipped = term.neg().reduce_mod(&m);
                let term = term.min(flipped);
                let rel = if pos { Rel::Div(m) } else { Rel::NDiv(m) };
                Qf::Lit(Lit { rel, term })
            }
        }
    }

    pub fn and(items: Vec<Qf>) -> Self {
        let mut out = Vec::with_capacity(items.len());
        for it in items {
            match it {
                Qf::True => {}
                Qf::False => return Qf::False,
                Qf::And(cs) => out.extend(cs),
                other => out.push(other),
            }
        }
        out.sort_unstable();
        out.dedup();
        match out.len() {
            0 => Qf::True,
            1 => out.pop().unwrap(),
            _ => Qf::And(out),
        }
    }

    pub fn or(items: Vec<Qf>) -> Self {
        let mut out = Vec::with_capacity(items.len());
        for it in items {
            match it {
                Qf::False => {}
                Qf::True => return Qf::True,
                Qf::Or(cs) => out.extend(cs),
                other => out.push(other),
            }
        }
        out.sort_unstable();
        out.dedup();
        match out.len() {
            0 => Qf::False,
            1 => out.pop().unwrap(),
            _ => Qf::Or(out),
        }
    }

    pub fn negate(&self) -> Self {
        match self {
            Qf::True => Qf::False,
            Qf::False => Qf::True,
            Qf::Lit(l) => match &l.rel {
                // ¬(t ≤ 0) ⇔ −t + 1 ≤ 0
                Rel::Le => {
                    let mut t = l.term.neg();
                    t.constant += 1;
                    Qf::lit(Rel::Le, t)
                }
                Rel::Eq => Qf::Lit(Lit {
                    rel: Rel::Ne,
                    term: l.term.clone(),
                }),
                Rel::Ne => Qf::Lit(Lit {
                    rel: Rel::Eq,
                    term: l.term.clone(),
                }),
                Rel::Div(m) => Qf::Lit(Lit {
                    rel: Rel::NDiv(m.clone()),
                    term: l.term.clone(),
                }),
                Rel::NDiv(m) => Qf::Lit(Lit {
                    rel: Rel::Div(m.clone()),
                    term: l.term.clone(),
                }),
            },
            Qf::And(cs) => Qf::or(cs.iter().map(Qf::negate).collect()),
            Qf::Or(cs) => Qf::and(cs.iter().map(Qf::negate).collect()),
        }
    }

    pub fn mentions(&self, v: Var) -> bool {
        match self {
            Qf::True | Qf::False => false,
            Qf::Lit(l) => l.term.mentions(v),
            Qf::And(cs) | Qf::Or(cs) => cs.iter().any(|c| c.mentions(v)),
        }
    }

    pub fn for_each_lit<'a>(&'a self, f: &mut impl FnMut(&'a Lit)) {
        match self {
            Qf::True | Qf::False => {}
            Qf::Lit(l) => f(l),
            Qf::And(cs) | Qf::Or(cs) => cs.iter().for_each(|c| c.for_each_lit(f)),
        }
    }

    /// Rebuilds the formula with every literal mentioning `v` replaced.
    pub fn map_lits_of(&self, v: Var, f: &mut impl FnMut(&Lit) -> Qf) -> Qf {
        match self {
            Qf::Lit(l) if l.term.mentions(v) => f(l),
            Qf::And(cs) if self.mentions(v) => {
                Qf::and(cs.iter().map(|c| c.map_lits_of(v, f)).collect())
            }
            Qf::Or(cs) if self.mentions(v) => {
                Qf::or(cs.iter().map(|c| c.map_lits_of(v, f)).collect())
            }
            other => other.clone(),
        }
    }

    pub fn substitute(&self, v: Var, value: &Term) -> Qf {
        self.map_lits_of(v, &mut |l| Qf::lit(l.rel.clone(), l.term.substitute(v, value)))
    }

    pub fn size(&self) -> usize {
        match self {
            Qf::True | Qf::False => 0,
            Qf::Lit(_) => 1,
            Qf::And(cs) | Qf::Or(cs) => cs.iter().map(Qf::size).sum(),
        }
    }

    pub fn max_coeff_bits(&self) -> u64 {
        let mut m = 0;
        self.for_each_lit(&mut |l| {
            m = m.max(l.term.max_coeff_bits());
            if let Rel::Div(d) | Rel::NDiv(d) = &l.rel {
                m = m.max(d.bits());
            }
        });
        m
    }
}
