use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::term::LinearTerm;
use super::FormulaError;

/// A linear atom. `Div` is `modulus | term`; it appears in quantifier
/// elimination output and is rejected by the parser unless enabled.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Le(LinearTerm, LinearTerm),
    Lt(LinearTerm, LinearTerm),
    Eq(LinearTerm, LinearTerm),
    Div { modulus: BigInt, term: LinearTerm },
}

impl Atom {
    pub fn le(a: LinearTerm, b: LinearTerm) -> Self {
        Atom::Le(a, b)
    }

    pub fn lt(a: LinearTerm, b: LinearTerm) -> Self {
        Atom::Lt(a, b)
    }

    pub fn eq(a: LinearTerm, b: LinearTerm) -> Self {
        Atom::Eq(a, b)
    }

    /// Panics if `modulus < 1`.
    pub fn divides(modulus: impl Into<BigInt>, term: LinearTerm) -> Self {
        let modulus = modulus.into();
        assert!(modulus >= BigInt::one(), "divisibility modulus must be positive");
        Atom::Div { modulus, term }
    }

    pub fn terms(&self) -> Vec<&LinearTerm> {
        match self {
            Atom::Le(a, b) | Atom::Lt(a, b) | Atom::Eq(a, b) => vec![a, b],
            Atom::Div { term, .. } => vec![term],
        }
    }

    pub fn vars(&self) -> BTreeSet<&str> {
        self.terms().into_iter().flat_map(|t| t.vars()).collect()
    }

    /// Number of inequalities the atom stands for: `=` is a pair of
    /// inequalities, and so is a divisibility constraint (∃q. t = m·q).
    pub fn inequality_count(&self) -> usize {
        match self {
            Atom::Le(..) | Atom::Lt(..) => 1,
            Atom::Eq(..) | Atom::Div { .. } => 2,
        }
    }

    pub fn map_terms(&self, mut f: impl FnMut(&LinearTerm) -> LinearTerm) -> Atom {
        match self {
            Atom::Le(a, b) => Atom::Le(f(a), f(b)),
            Atom::Lt(a, b) => Atom::Lt(f(a), f(b)),
            Atom::Eq(a, b) => Atom::Eq(f(a), f(b)),
            Atom::Div { modulus, term } => Atom::Div {
                modulus: modulus.clone(),
                term: f(term),
            },
        }
    }

    /// Truth value of a ground atom; `None` if a variable remains.
    pub fn eval_ground(&self) -> Option<bool> {
        self.eval(|_| None)
    }

    pub fn eval<'a, F>(&self, mut lookup: F) -> Option<bool>
    where
        F: FnMut(&str) -> Option<&'a BigInt>,
    {
        Some(match self {
            Atom::Le(a, b) => a.eval(&mut lookup)? <= b.eval(&mut lookup)?,
            Atom::Lt(a, b) => a.eval(&mut lookup)? < b.eval(&mut lookup)?,
            Atom::Eq(a, b) => a.eval(&mut lookup)? == b.eval(&mut lookup)?,
            Atom::Div { modulus, term } => {
                let v = term.eval(&mut lookup)?;
                (v % modulus).abs() == BigInt::from(0)
            }
        })
    }
}

/// A Presburger formula over `(ℤ, <, +)`.
///
/// Use the lowercase constructors: they never build an `And`/`Or` with fewer
/// than two children.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl From<Atom> for Formula {
    fn from(a: Atom) -> Self {
        Formula::Atom(a)
    }
}

impl Formula {
    pub fn atom(a: Atom) -> Self {
        Formula::Atom(a)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(mut children: Vec<Formula>) -> Self {
        match children.len() {
            0 => Formula::True,
            1 => children.pop().unwrap(),
            _ => Formula::And(children),
        }
    }

    pub fn or(mut children: Vec<Formula>) -> Self {
        match children.len() {
            0 => Formula::False,
            1 => children.pop().unwrap(),
            _ => Formula::Or(children),
        }
    }

    pub fn exists(var: &str, body: Formula) -> Self {
        Formula::Exists(var.to_string(), Box::new(body))
    }

    pub fn forall(var: &str, body: Formula) -> Self {
        Formula::Forall(var.to_string(), Box::new(body))
    }

    /// `∃v₁ ∃v₂ … body`, outermost first.
    pub fn exists_many(vars: &[&str], body: Formula) -> Self {
        vars.iter().rev().fold(body, |acc, v| Formula::exists(v, acc))
    }

    pub fn le(a: LinearTerm, b: LinearTerm) -> Self {
        Formula::Atom(Atom::Le(a, b))
    }

    pub fn lt(a: LinearTerm, b: LinearTerm) -> Self {
        Formula::Atom(Atom::Lt(a, b))
    }

    pub fn eq(a: LinearTerm, b: LinearTerm) -> Self {
        Formula::Atom(Atom::Eq(a, b))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => vec![],
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => vec![f],
            Formula::And(cs) | Formula::Or(cs) => cs.iter().collect(),
        }
    }

    /// Visits every atom in the formula, left to right.
    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::Atom(a) => f(a),
            _ => {
                for c in self.children() {
                    c.for_each_atom(f);
                }
            }
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.for_each_atom(&mut |a| out.push(a));
        out
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Exists(..) | Formula::Forall(..) => false,
            _ => self.children().into_iter().all(Formula::is_quantifier_free),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => {
                for v in a.vars() {
                    if !bound.contains(&v) {
                        out.insert(v.to_string());
                    }
                }
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                bound.push(v);
                body.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    /// Names bound by some quantifier.
    pub fn quantified_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_quantified(&mut out);
        out
    }

    fn collect_quantified(&self, out: &mut BTreeSet<String>) {
        if let Formula::Exists(v, _) | Formula::Forall(v, _) = self {
            out.insert(v.clone());
        }
        for c in self.children() {
            c.collect_quantified(out);
        }
    }

    /// Every variable name, free or bound.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = self.quantified_vars();
        self.for_each_atom(&mut |a| {
            for v in a.vars() {
                out.insert(v.to_string());
            }
        });
        out
    }

    /// Checks the naming invariants: no quantifier rebinds a name already
    /// bound on its path, and no bound name also occurs free elsewhere.
    pub fn check_binding(&self) -> Result<(), FormulaError> {
        fn walk<'a>(f: &'a Formula, bound: &mut Vec<&'a str>) -> Result<(), FormulaError> {
            match f {
                Formula::Exists(v, body) | Formula::Forall(v, body) => {
                    if bound.contains(&v.as_str()) {
                        return Err(FormulaError::Shadowed(v.clone()));
                    }
                    bound.push(v);
                    walk(body, bound)?;
                    bound.pop();
                    Ok(())
                }
                _ => f.children().into_iter().try_for_each(|c| walk(c, bound)),
            }
        }
        walk(self, &mut Vec::new())?;
        let free = self.free_vars();
        if let Some(v) = self.quantified_vars().intersection(&free).next() {
            return Err(FormulaError::Shadowed(v.clone()));
        }
        Ok(())
    }

    /// Replaces free variables by integers. Atoms are kept (with their
    /// constants folded) even when they become ground.
    pub fn substitute(&self, bindings: &BTreeMap<String, BigInt>) -> Result<Formula, FormulaError> {
        let quantified = self.quantified_vars();
        if let Some(v) = bindings.keys().find(|v| quantified.contains(*v)) {
            return Err(FormulaError::BindsQuantified(v.clone()));
        }
        Ok(self.map_atoms(&mut |a| {
            a.map_terms(|t| {
                bindings
                    .iter()
                    .fold(t.clone(), |acc, (v, val)| acc.substitute(v, val))
            })
        }))
    }

    /// Replaces a free variable by a linear term. The term must not mention
    /// any quantified name of `self`, so no capture can occur.
    pub fn substitute_term(&self, var: &str, replacement: &LinearTerm) -> Result<Formula, FormulaError> {
        let quantified = self.quantified_vars();
        if quantified.contains(var) {
            return Err(FormulaError::BindsQuantified(var.to_string()));
        }
        if let Some(v) = replacement.vars().find(|v| quantified.contains(*v)) {
            return Err(FormulaError::Capture(v.to_string()));
        }
        Ok(self.map_atoms(&mut |a| a.map_terms(|t| t.substitute_term(var, replacement))))
    }

    pub fn map_atoms(&self, f: &mut impl FnMut(&Atom) -> Atom) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => Formula::Atom(f(a)),
            Formula::Not(g) => Formula::Not(Box::new(g.map_atoms(f))),
            Formula::And(cs) => Formula::And(cs.iter().map(|c| c.map_atoms(f)).collect()),
            Formula::Or(cs) => Formula::Or(cs.iter().map(|c| c.map_atoms(f)).collect()),
            Formula::Exists(v, b) => Formula::Exists(v.clone(), Box::new(b.map_atoms(f))),
            Formula::Forall(v, b) => Formula::Forall(v.clone(), Box::new(b.map_atoms(f))),
        }
    }

    /// Number of atoms.
    pub fn atom_count(&self) -> usize {
        let mut n = 0;
        self.for_each_atom(&mut |_| n += 1);
        n
    }
}

/// A formula whose free variables are split into objects `x` and
/// parameters `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionedFormula {
    formula: Formula,
    object_vars: Vec<String>,
    param_vars: Vec<String>,
}

impl PartitionedFormula {
    pub fn new(
        formula: Formula,
        object_vars: Vec<String>,
        param_vars: Vec<String>,
    ) -> Result<Self, FormulaError> {
        let mut declared = BTreeSet::new();
        for v in object_vars.iter().chain(&param_vars) {
            if !declared.insert(v.clone()) {
                return Err(FormulaError::Partition(format!("variable {v} declared twice")));
            }
        }
        let free = formula.free_vars();
        if let Some(v) = free.difference(&declared).next() {
            return Err(FormulaError::Partition(format!(
                "free variable {v} is neither an object nor a parameter"
            )));
        }
        let quantified = formula.quantified_vars();
        if let Some(v) = declared.intersection(&quantified).next() {
            return Err(FormulaError::Partition(format!("declared variable {v} is quantified")));
        }
        Ok(Self {
            formula,
            object_vars,
            param_vars,
        })
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn object_vars(&self) -> &[String] {
        &self.object_vars
    }

    pub fn param_vars(&self) -> &[String] {
        &self.param_vars
    }

    pub fn into_formula(self) -> Formula {
        self.formula
    }
}
