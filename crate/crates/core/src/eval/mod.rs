//! Truth of formulas: ground evaluation, evaluation with quantifiers
//! ranging over finite hint intervals, and (in [`crate::qe`]) exact
//! decision over ℤ.

mod compiled;
mod scalar;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::formula::{Formula, FormulaError};
use crate::serde_util::bigint_str;
use compiled::{Compiler, Node};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("formula has free variable `{0}` without a value")]
    FreeVariable(String),
    #[error("ground evaluation does not accept quantifiers")]
    Quantifier,
    #[error("no hint interval for quantified variable `{0}`")]
    MissingHint(String),
    #[error("hint interval for `{0}` is empty")]
    EmptyHint(String),
    #[error("bounded enumeration of up to {size} assignments exceeds the cap {cap}")]
    EnumerationCap { size: BigInt, cap: BigInt },
    #[error("more than 64 consecutive quantifiers of one kind")]
    BlockTooLong,
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// Closed intervals `[lo, hi]` for quantified variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundHints(#[serde(with = "hint_map")] BTreeMap<String, (BigInt, BigInt)>);

mod hint_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Iv(#[serde(with = "bigint_str::interval")] (BigInt, BigInt));

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, (BigInt, BigInt)>, s: S) -> Result<S::Ok, S::Error> {
        let view: BTreeMap<&String, Iv> = m.iter().map(|(k, v)| (k, Iv(v.clone()))).collect();
        view.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, (BigInt, BigInt)>, D::Error> {
        let view = BTreeMap::<String, Iv>::deserialize(d)?;
        Ok(view.into_iter().map(|(k, v)| (k, v.0)).collect())
    }
}

impl BoundHints {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: &str, lo: impl Into<BigInt>, hi: impl Into<BigInt>) -> Self {
        self.insert(var, lo.into(), hi.into());
        self
    }

    pub fn insert(&mut self, var: &str, lo: BigInt, hi: BigInt) {
        self.0.insert(var.to_string(), (lo, hi));
    }

    pub fn get(&self, var: &str) -> Option<&(BigInt, BigInt)> {
        self.0.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &(BigInt, BigInt))> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    /// Refuse formulas whose worst-case enumeration (product of hint
    /// interval sizes along nested quantifiers) exceeds this.
    pub max_enumeration: BigInt,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            max_enumeration: BigInt::from(10u64).pow(18),
        }
    }
}

/// Truth value of a quantifier-free formula without free variables.
pub fn eval_ground(f: &Formula) -> Result<bool, EvalError> {
    if !f.is_quantifier_free() {
        return Err(EvalError::Quantifier);
    }
    if let Some(v) = f.free_vars().into_iter().next() {
        return Err(EvalError::FreeVariable(v));
    }
    eval_qf(f, &BTreeMap::new())
}

/// Evaluates a quantifier-free formula at a point.
pub(crate) fn eval_qf(f: &Formula, point: &BTreeMap<String, BigInt>) -> Result<bool, EvalError> {
    let lookup = |f: &Formula| -> Result<bool, EvalError> { eval_qf(f, point) };
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => match a.eval(|v| point.get(v)) {
            Some(b) => b,
            None => {
                let missing = a.vars().into_iter().find(|v| !point.contains_key(*v)).unwrap();
                return Err(EvalError::FreeVariable(missing.to_string()));
            }
        },
        Formula::Not(g) => !lookup(g)?,
        Formula::And(cs) => {
            for c in cs {
                if !lookup(c)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(cs) => {
            for c in cs {
                if lookup(c)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Exists(..) | Formula::Forall(..) => return Err(EvalError::Quantifier),
    })
}

/// A formula prepared for repeated evaluation at points of its free
/// variables, with every quantifier ranging over its hint interval.
///
/// Under these finite semantics `∃v` and `∀v` range over the hint interval
/// of `v` only; the result agrees with truth over ℤ whenever the hints
/// contain all decisive values.
pub struct BoundedEvaluator {
    free: Vec<String>,
    slots: usize,
    big: Node<BigInt>,
    fast: Option<Node<i128>>,
}

impl BoundedEvaluator {
    pub fn new(f: &Formula, hints: &BoundHints, config: &EvalConfig) -> Result<Self, EvalError> {
        f.check_binding()?;
        let quantified = f.quantified_vars();
        for (v, (lo, hi)) in hints.iter() {
            // hints for names the formula does not quantify are ignored
            if quantified.contains(v) && lo > hi {
                return Err(EvalError::EmptyHint(v.to_string()));
            }
        }
        let free: Vec<String> = f.free_vars().into_iter().collect();
        let mut compiler = Compiler {
            slots: free.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect(),
            next_slot: free.len(),
            hints: &hints.0,
        };
        let big = compiler.compile(f, false)?;
        let size = big.enumeration_size();
        if size > config.max_enumeration {
            return Err(EvalError::EnumerationCap {
                size,
                cap: config.max_enumeration.clone(),
            });
        }
        let fast = big.convert::<i128>();
        Ok(Self {
            free,
            slots: compiler.next_slot,
            big,
            fast,
        })
    }

    /// Free variables in the order [`eval`](Self::eval) expects values.
    pub fn free_vars(&self) -> &[String] {
        &self.free
    }

    pub fn eval(&self, point: &[BigInt]) -> bool {
        assert_eq!(point.len(), self.free.len(), "point has wrong dimension");
        if let Some(fast) = &self.fast {
            let values: Option<Vec<i128>> = point.iter().map(<i128 as scalar::Scalar>::from_big).collect();
            if let Some(values) = values {
                let mut env = vec![0i128; self.slots];
                env[..values.len()].copy_from_slice(&values);
                if let Ok(b) = fast.eval(&mut env) {
                    return b;
                }
            }
        }
        let mut env = vec![BigInt::from(0); self.slots];
        env[..point.len()].clone_from_slice(point);
        self.big.eval(&mut env).expect("big-integer evaluation cannot overflow")
    }

    pub fn eval_map(&self, point: &BTreeMap<String, BigInt>) -> Result<bool, EvalError> {
        let values = self
            .free
            .iter()
            .map(|v| point.get(v).cloned().ok_or_else(|| EvalError::FreeVariable(v.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.eval(&values))
    }
}

/// Evaluates `f` at `point` with quantifiers ranging over `hints`.
pub fn eval_bounded(
    f: &Formula,
    point: &BTreeMap<String, BigInt>,
    hints: &BoundHints,
) -> Result<bool, EvalError> {
    BoundedEvaluator::new(f, hints, &EvalConfig::default())?.eval_map(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, parse_with, ParseOptions};

    fn p(s: &str) -> Formula {
        parse_with(
            s,
            &ParseOptions {
                allow_div: true,
                ..Default::default()
            },
        )
        .unwrap()
    }

    fn point(vals: &[(&str, i64)]) -> BTreeMap<String, BigInt> {
        vals.iter().map(|(k, v)| (k.to_string(), BigInt::from(*v))).collect()
    }

    #[test]
    fn ground_examples() {
        assert!(eval_ground(&p("(<= 3 5)")).unwrap());
        assert!(!eval_ground(&p("(div 2 7)")).unwrap());
        assert!(eval_ground(&p("(div 2 -8)")).unwrap());
        assert!(!eval_ground(&p("(and (< 1 2) (not (= 4 4)))")).unwrap());
        assert_eq!(eval_ground(&p("(<= x 5)")), Err(EvalError::FreeVariable("x".into())));
        assert_eq!(eval_ground(&p("(exists t (<= t 5))")), Err(EvalError::Quantifier));
    }

    #[test]
    fn bounded_examples() {
        let f = parse("(exists t (= t x))").unwrap();
        let h = BoundHints::new().with("t", 0, 10);
        assert!(eval_bounded(&f, &point(&[("x", 7)]), &h).unwrap());
        assert!(!eval_bounded(&f, &point(&[("x", 11)]), &h).unwrap());
        // finite semantics: ∀ ranges over the hint only
        let g = parse("(forall v (<= v 5))").unwrap();
        assert!(eval_bounded(&g, &BTreeMap::new(), &BoundHints::new().with("v", 0, 3)).unwrap());
        assert!(!eval_bounded(&g, &BTreeMap::new(), &BoundHints::new().with("v", 0, 6)).unwrap());
    }

    #[test]
    fn hint_errors() {
        let f = parse("(exists t (= t x))").unwrap();
        assert_eq!(
            eval_bounded(&f, &point(&[("x", 1)]), &BoundHints::new()),
            Err(EvalError::MissingHint("t".into()))
        );
        assert_eq!(
            eval_bounded(&f, &point(&[("x", 1)]), &BoundHints::new().with("t", 0, 1).with("q", 0, 1)),
            Ok(true)
        );
        assert_eq!(
            eval_bounded(&f, &point(&[("x", 1)]), &BoundHints::new().with("t", 2, 1)),
            Err(EvalError::EmptyHint("t".into()))
        );
        assert_eq!(
            eval_bounded(&f, &BTreeMap::new(), &BoundHints::new().with("t", 0, 1)),
            Err(EvalError::FreeVariable("x".into()))
        );
        let g = parse("(exists a (exists b (= a b)))").unwrap();
        let h = BoundHints::new().with("a", 0, 1_000_000_000).with("b", 0, 1_000_000_000);
        let cfg = EvalConfig {
            max_enumeration: BigInt::from(1_000_000u64),
        };
        assert!(matches!(
            BoundedEvaluator::new(&g, &h, &cfg),
            Err(EvalError::EnumerationCap { .. })
        ));
    }

    /// Plain nested enumeration, no narrowing.
    fn naive(f: &Formula, env: &mut BTreeMap<String, BigInt>, hints: &BoundHints) -> bool {
        match f {
            Formula::Exists(v, b) | Formula::Forall(v, b) => {
                let (lo, hi) = hints.get(v).unwrap().clone();
                let exists = matches!(f, Formula::Exists(..));
                let mut x = lo;
                while x <= hi {
                    env.insert(v.clone(), x.clone());
                    let r = naive(b, env, hints);
                    env.remove(v);
                    if r == exists {
                        return exists;
                    }
                    x += 1;
                }
                !exists
            }
            Formula::Not(g) => !naive(g, env, hints),
            Formula::And(cs) => cs.iter().all(|c| naive(c, env, hints)),
            Formula::Or(cs) => cs.iter().any(|c| naive(c, env, hints)),
            _ => eval_qf(f, env).unwrap(),
        }
    }

    #[test]
    fn narrowing_matches_plain_enumeration() {
        let cases = [
            "(exists a (exists b (and (= (+ a (* 3 b)) x) (<= 0 a) (< a 3) (<= b y))))",
            "(forall a (or (< a x) (exists b (and (= (* 2 b) a) (<= b y)))))",
            "(not (forall a (forall b (or (< (+ a b) x) (not (= (* 2 a) (+ b y)))))))",
            "(exists a (and (div 3 (+ a x)) (<= (* -2 a) y) (not (<= a 1))))",
            "(forall a (exists b (or (= b (+ a x)) (and (< b a) (<= y b)))))",
        ];
        let hints = BoundHints::new().with("a", -6, 6).with("b", -5, 7);
        for text in cases {
            let f = p(text);
            let ev = BoundedEvaluator::new(&f, &hints, &EvalConfig::default()).unwrap();
            for x in -8..=8 {
                for y in -8..=8 {
                    let mut env = point(&[("x", x), ("y", y)]);
                    let expected = naive(&f, &mut env, &hints);
                    assert_eq!(ev.eval_map(&env).unwrap(), expected, "{text} at x={x} y={y}");
                }
            }
        }
    }

    #[test]
    fn big_values_fall_back() {
        let f = parse("(exists t (and (= t (+ x 1)) (<= t 100000000000000000000000000000)))").unwrap();
        let h = BoundHints::new().with(
            "t",
            BigInt::from(0),
            "100000000000000000000000000000".parse::<BigInt>().unwrap(),
        );
        let cfg = EvalConfig {
            max_enumeration: BigInt::from(10u64).pow(40),
        };
        let ev = BoundedEvaluator::new(&f, &h, &cfg).unwrap();
        assert!(ev.eval(&["99999999999999999999999999999".parse().unwrap()]));
        assert!(!ev.eval(&["100000000000000000000000000000".parse().unwrap()]));
        assert!(ev.eval(&[BigInt::from(5)]));
    }
}
