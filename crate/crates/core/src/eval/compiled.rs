//! Formulas compiled to negation normal form over variable slots.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use super::scalar::{Overflow, Scalar};
use super::EvalError;
use crate::formula::{Atom, Formula, LinearTerm};

#[derive(Debug, Clone)]
pub(crate) enum Rel<N> {
    /// `Σ ≤ 0`
    Le,
    /// `Σ = 0`
    Eq,
    /// `Σ ≠ 0`
    Ne,
    /// `m | Σ`
    Div(N),
    /// `m ∤ Σ`
    NDiv(N),
}

#[derive(Debug, Clone)]
pub(crate) struct Lit<N> {
    pub rel: Rel<N>,
    pub terms: Vec<(usize, N)>,
    pub constant: N,
}

#[derive(Debug, Clone)]
pub(crate) enum Node<N> {
    Const(bool),
    Lit(Lit<N>),
    And(Vec<Node<N>>),
    Or(Vec<Node<N>>),
    Block(Box<Block<N>>),
}

/// A maximal run of same-kind quantifiers. For `∃` the items are the
/// conjuncts of the body, for `∀` its disjuncts.
#[derive(Debug, Clone)]
pub(crate) struct Block<N> {
    pub exists: bool,
    pub vars: Vec<usize>,
    pub ranges: Vec<(N, N)>,
    pub items: Vec<Node<N>>,
    /// bit `i` set when the item mentions `vars[i]`
    pub masks: Vec<u64>,
}

pub(crate) struct Compiler<'a> {
    pub slots: BTreeMap<String, usize>,
    pub next_slot: usize,
    pub hints: &'a BTreeMap<String, (BigInt, BigInt)>,
}

fn lin(t: &LinearTerm, slots: &BTreeMap<String, usize>) -> (Vec<(usize, BigInt)>, BigInt) {
    let terms = t
        .coeffs()
        .map(|(v, c)| (slots[v], c.clone()))
        .collect();
    (terms, t.constant_part().clone())
}

impl<'a> Compiler<'a> {
    pub fn compile(&mut self, f: &Formula, negated: bool) -> Result<Node<BigInt>, EvalError> {
        Ok(match f {
            Formula::True => Node::Const(!negated),
            Formula::False => Node::Const(negated),
            Formula::Atom(a) => Node::Lit(self.literal(a, negated)),
            Formula::Not(g) => self.compile(g, !negated)?,
            Formula::And(cs) | Formula::Or(cs) => {
                let conj = matches!(f, Formula::And(_)) != negated;
                let mut out = Vec::with_capacity(cs.len());
                for c in cs {
                    match (self.compile(c, negated)?, conj) {
                        (Node::And(inner), true) | (Node::Or(inner), false) => out.extend(inner),
                        (n, _) => out.push(n),
                    }
                }
                if conj {
                    Node::And(out)
                } else {
                    Node::Or(out)
                }
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let exists = matches!(f, Formula::Exists(..)) != negated;
                let (lo, hi) = self
                    .hints
                    .get(v)
                    .cloned()
                    .ok_or_else(|| EvalError::MissingHint(v.clone()))?;
                let slot = *self.slots.entry(v.clone()).or_insert_with(|| {
                    self.next_slot += 1;
                    self.next_slot - 1
                });
                let body = self.compile(body, negated)?;
                let (mut vars, mut ranges, items) = match body {
                    Node::Block(b) if b.exists == exists => (b.vars, b.ranges, b.items),
                    Node::And(items) if exists => (vec![], vec![], items),
                    Node::Or(items) if !exists => (vec![], vec![], items),
                    other => (vec![], vec![], vec![other]),
                };
                vars.insert(0, slot);
                ranges.insert(0, (lo, hi));
                if vars.len() > 64 {
                    return Err(EvalError::BlockTooLong);
                }
                let masks = items
                    .iter()
                    .map(|it| {
                        let mut used = Vec::new();
                        it.collect_slots(&mut used);
                        vars.iter()
                            .enumerate()
                            .filter(|(_, s)| used.contains(s))
                            .fold(0u64, |m, (i, _)| m | (1 << i))
                    })
                    .collect();
                Node::Block(Box::new(Block {
                    exists,
                    vars,
                    ranges,
                    items,
                    masks,
                }))
            }
        })
    }

    fn literal(&self, a: &Atom, negated: bool) -> Lit<BigInt> {
        let one = BigInt::from(1);
        let (rel, t) = match a {
            Atom::Le(l, r) if !negated => (Rel::Le, l - r),
            // ¬(l ≤ r)  ⇔  r - l + 1 ≤ 0
            Atom::Le(l, r) => (Rel::Le, &(r - l) + &LinearTerm::constant(one)),
            Atom::Lt(l, r) if !negated => (Rel::Le, &(l - r) + &LinearTerm::constant(one)),
            Atom::Lt(l, r) => (Rel::Le, r - l),
            Atom::Eq(l, r) => (if negated { Rel::Ne } else { Rel::Eq }, l - r),
            Atom::Div { modulus, term } => (
                if negated {
                    Rel::NDiv(modulus.clone())
                } else {
                    Rel::Div(modulus.clone())
                },
                term.clone(),
            ),
        };
        let (terms, constant) = lin(&t, &self.slots);
        Lit {
            rel,
            terms,
            constant,
        }
    }
}

impl<N: Scalar> Node<N> {
    fn collect_slots(&self, out: &mut Vec<usize>) {
        match self {
            Node::Const(_) => {}
            Node::Lit(l) => out.extend(l.terms.iter().map(|(s, _)| *s)),
            Node::And(cs) | Node::Or(cs) => cs.iter().for_each(|c| c.collect_slots(out)),
            Node::Block(b) => b.items.iter().for_each(|c| c.collect_slots(out)),
        }
    }

    /// Converts every constant; `None` if one does not fit.
    pub fn convert<M: Scalar>(&self) -> Option<Node<M>> {
        let c = |v: &N| -> Option<M> { M::from_big(&v.to_big()) };
        Some(match self {
            Node::Const(b) => Node::Const(*b),
            Node::Lit(l) => Node::Lit(Lit {
                rel: match &l.rel {
                    Rel::Le => Rel::Le,
                    Rel::Eq => Rel::Eq,
                    Rel::Ne => Rel::Ne,
                    Rel::Div(m) => Rel::Div(c(m)?),
                    Rel::NDiv(m) => Rel::NDiv(c(m)?),
                },
                terms: l
                    .terms
                    .iter()
                    .map(|(s, v)| Some((*s, c(v)?)))
                    .collect::<Option<_>>()?,
                constant: c(&l.constant)?,
            }),
            Node::And(cs) => Node::And(cs.iter().map(|n| n.convert()).collect::<Option<_>>()?),
            Node::Or(cs) => Node::Or(cs.iter().map(|n| n.convert()).collect::<Option<_>>()?),
            Node::Block(b) => Node::Block(Box::new(Block {
                exists: b.exists,
                vars: b.vars.clone(),
                ranges: b
                    .ranges
                    .iter()
                    .map(|(lo, hi)| Some((c(lo)?, c(hi)?)))
                    .collect::<Option<_>>()?,
                items: b.items.iter().map(|n| n.convert()).collect::<Option<_>>()?,
                masks: b.masks.clone(),
            })),
        })
    }

    /// Worst-case number of enumerated assignments along any path of
    /// nested blocks.
    pub fn enumeration_size(&self) -> BigInt {
        match self {
            Node::Const(_) | Node::Lit(_) => BigInt::from(1),
            Node::And(cs) | Node::Or(cs) => cs
                .iter()
                .map(Node::enumeration_size)
                .max()
                .unwrap_or_else(|| BigInt::from(1)),
            Node::Block(b) => {
                let own: BigInt = b
                    .ranges
                    .iter()
                    .map(|(lo, hi)| (hi.to_big() - lo.to_big() + BigInt::from(1)).max(BigInt::from(0)))
                    .product();
                let inner = b
                    .items
                    .iter()
                    .map(Node::enumeration_size)
                    .max()
                    .unwrap_or_else(|| BigInt::from(1));
                own * inner
            }
        }
    }

    pub fn eval(&self, env: &mut [N]) -> Result<bool, Overflow> {
        match self {
            Node::Const(b) => Ok(*b),
            Node::Lit(l) => l.eval(env),
            Node::And(cs) => {
                for c in cs {
                    if !c.eval(env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Node::Or(cs) => {
                for c in cs {
                    if c.eval(env)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Node::Block(b) => {
                let all = if b.vars.len() == 64 {
                    u64::MAX
                } else {
                    (1u64 << b.vars.len()) - 1
                };
                let found = b.search(all, env)?;
                Ok(if b.exists { found } else { !found })
            }
        }
    }
}

impl<N: Scalar> Lit<N> {
    fn value(&self, env: &[N]) -> Result<N, Overflow> {
        let mut acc = self.constant.clone();
        for (s, c) in &self.terms {
            acc = acc.add(&c.mul(&env[*s])?)?;
        }
        Ok(acc)
    }

    fn eval(&self, env: &[N]) -> Result<bool, Overflow> {
        let v = self.value(env)?;
        Ok(match &self.rel {
            Rel::Le => !v.is_pos(),
            Rel::Eq => v.is_zero(),
            Rel::Ne => !v.is_zero(),
            Rel::Div(m) => v.is_multiple_of(m),
            Rel::NDiv(m) => !v.is_multiple_of(m),
        })
    }

    /// Intersects `[lo, hi]` with the values of `slot` for which the literal
    /// has truth value `want`, all other slots fixed. Returns false when the
    /// result is empty.
    fn narrow(&self, slot: usize, want: bool, env: &[N], lo: &mut N, hi: &mut N) -> Result<bool, Overflow> {
        let mut coeff = None;
        let mut rest = self.constant.clone();
        for (s, c) in &self.terms {
            if *s == slot {
                coeff = Some(c);
            } else {
                rest = rest.add(&c.mul(&env[*s])?)?;
            }
        }
        let Some(c) = coeff else { return Ok(lo <= hi) };
        let zero = N::zero();
        match (&self.rel, want) {
            (Rel::Le, true) => {
                // c·v ≤ -rest
                let bound = zero.sub(&rest)?;
                if c.is_pos() {
                    *hi = hi.clone().min(bound.div_floor(c));
                } else {
                    *lo = lo.clone().max(bound.div_ceil(c));
                }
            }
            (Rel::Le, false) => {
                // c·v ≥ 1 - rest
                let bound = N::one().sub(&rest)?;
                if c.is_pos() {
                    *lo = lo.clone().max(bound.div_ceil(c));
                } else {
                    *hi = hi.clone().min(bound.div_floor(c));
                }
            }
            (Rel::Eq, true) | (Rel::Ne, false) => {
                let target = zero.sub(&rest)?;
                if !target.is_multiple_of(c) {
                    return Ok(false);
                }
                let v = target.div_floor(c);
                *lo = lo.clone().max(v.clone());
                *hi = hi.clone().min(v);
            }
            _ => {}
        }
        Ok(lo <= hi)
    }
}

impl<N: Scalar> Block<N> {
    /// For `∃`, whether some assignment of the unassigned block variables
    /// makes every item true; for `∀`, whether some assignment makes every
    /// item false.
    fn search(&self, unassigned: u64, env: &mut [N]) -> Result<bool, Overflow> {
        let want = self.exists;
        for (item, mask) in self.items.iter().zip(&self.masks) {
            if mask & unassigned == 0 && item.eval(env)? != want {
                return Ok(false);
            }
        }
        if unassigned == 0 {
            return Ok(true);
        }
        let mut best: Option<(usize, N, N)> = None;
        let mut bits = unassigned;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let (mut lo, mut hi) = self.ranges[i].clone();
            for (item, mask) in self.items.iter().zip(&self.masks) {
                if mask & unassigned == 1 << i {
                    if let Node::Lit(l) = item {
                        if !l.narrow(self.vars[i], want, env, &mut lo, &mut hi)? {
                            return Ok(false);
                        }
                    }
                }
            }
            if lo > hi {
                return Ok(false);
            }
            let width = hi.sub(&lo)?;
            if best.as_ref().map_or(true, |(_, blo, bhi)| {
                bhi.sub(blo).map_or(false, |w| width < w)
            }) {
                best = Some((i, lo, hi));
            }
        }
        let (i, lo, hi) = best.expect("some variable is unassigned");
        let slot = self.vars[i];
        let rest = unassigned & !(1 << i);
        let mut v = lo;
        loop {
            env[slot] = v.clone();
            if self.search(rest, env)? {
                return Ok(true);
            }
            if v >= hi {
                return Ok(false);
            }
            v = v.succ()?;
        }
    }
}
