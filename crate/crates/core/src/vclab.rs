//! Shattering, VC-dimension and shatter functions of finite set families,
//! including the families `{S_b}` cut out by a partitioned formula on
//! finite windows.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::eval::{BoundHints, BoundedEvaluator, EvalConfig, EvalError};
use crate::formula::PartitionedFormula;
use crate::qe::{eliminate_quantifiers_with, QeConfig, QeError};

/// A point of `ℤ^m`; one-dimensional windows use length-1 points.
pub type Point = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VcError {
    #[error("{what}: {size} exceeds the cap {cap}")]
    Cap { what: &'static str, size: u128, cap: u128 },
    #[error("point {0:?} is not in the ground set")]
    NotInGround(Point),
    #[error("window has {got} intervals but {want} variables")]
    WindowDimension { want: usize, got: usize },
    #[error("empty interval {0}")]
    EmptyInterval(Interval),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Qe(#[from] QeError),
}

/// Inclusive integer interval, written `lo..hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi }
    }

    pub fn len(&self) -> u128 {
        if self.hi < self.lo {
            0
        } else {
            (self.hi as i128 - self.lo as i128 + 1) as u128
        }
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| format!("expected lo..hi, got {s:?}"))?;
        let p = |t: &str| {
            t.trim()
                .parse::<i64>()
                .map_err(|e| format!("bad bound {t:?} in {s:?}: {e}"))
        };
        let iv = Interval::new(p(a)?, p(b)?);
        if iv.is_empty() {
            return Err(format!("empty interval {s:?}"));
        }
        Ok(iv)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(s)
    }
}

/// All points of a box, in lexicographic order.
pub fn box_points(window: &[Interval]) -> Result<Vec<Point>, VcError> {
    if let Some(iv) = window.iter().find(|iv| iv.is_empty()) {
        return Err(VcError::EmptyInterval(*iv));
    }
    Ok(window
        .iter()
        .map(|iv| iv.lo..=iv.hi)
        .multi_cartesian_product()
        .collect())
}

fn box_size(window: &[Interval]) -> u128 {
    window.iter().map(Interval::len).fold(1u128, |a, b| a.saturating_mul(b))
}

#[derive(Debug, Clone)]
pub struct VcConfig {
    /// Largest set whose shattering is checked.
    pub max_shatter_size: usize,
    /// Largest number of candidate subsets examined for one size.
    pub max_candidates: u128,
    /// Largest number of ground points or parameter points in a window.
    pub max_window: u128,
}

impl Default for VcConfig {
    fn default() -> Self {
        Self {
            max_shatter_size: 20,
            max_candidates: 50_000_000,
            max_window: 1 << 22,
        }
    }
}

/// A finite family of subsets of a finite ground set.
#[derive(Debug, Clone)]
pub struct SetFamily {
    ground: Vec<Point>,
    index: HashMap<Point, usize>,
    labels: Vec<Point>,
    sets: Vec<FixedBitSet>,
    ground_window: Option<Vec<Interval>>,
    param_window: Option<Vec<Interval>>,
}

impl SetFamily {
    /// `members` pairs a parameter label with the subset of `ground` it
    /// selects. The ground set is sorted and deduplicated.
    pub fn new(mut ground: Vec<Point>, members: Vec<(Point, Vec<Point>)>) -> Result<Self, VcError> {
        ground.sort();
        ground.dedup();
        let index: HashMap<Point, usize> = ground.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let mut labels = Vec::with_capacity(members.len());
        let mut sets = Vec::with_capacity(members.len());
        for (label, pts) in members {
            let mut s = FixedBitSet::with_capacity(ground.len());
            for p in pts {
                let &i = index.get(&p).ok_or(VcError::NotInGround(p))?;
                s.insert(i);
            }
            labels.push(label);
            sets.push(s);
        }
        Ok(Self {
            ground,
            index,
            labels,
            sets,
            ground_window: None,
            param_window: None,
        })
    }

    /// One-dimensional family; member `j` is labelled `[j]`.
    pub fn from_subsets(ground: Vec<i64>, subsets: Vec<Vec<i64>>) -> Result<Self, VcError> {
        let ground = ground.into_iter().map(|g| vec![g]).collect();
        let members = subsets
            .into_iter()
            .enumerate()
            .map(|(j, s)| (vec![j as i64], s.into_iter().map(|g| vec![g]).collect()))
            .collect();
        Self::new(ground, members)
    }

    /// Ground `{0, …, n−1}` with members given as bit masks.
    pub fn from_masks(n: usize, masks: &[u64]) -> Self {
        assert!(n <= 64);
        let ground: Vec<Point> = (0..n as i64).map(|g| vec![g]).collect();
        let index = ground.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let sets = masks
            .iter()
            .map(|m| {
                let mut s = FixedBitSet::with_capacity(n);
                for i in 0..n {
                    if m >> i & 1 == 1 {
                        s.insert(i);
                    }
                }
                s
            })
            .collect();
        Self {
            ground,
            index,
            labels: (0..masks.len() as i64).map(|j| vec![j]).collect(),
            sets,
            ground_window: None,
            param_window: None,
        }
    }

    pub fn ground(&self) -> &[Point] {
        &self.ground
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn label(&self, i: usize) -> &Point {
        &self.labels[i]
    }

    pub fn member(&self, i: usize) -> Vec<Point> {
        self.sets[i].ones().map(|g| self.ground[g].clone()).collect()
    }

    /// Members as sets of ground points, in input order.
    pub fn members(&self) -> impl Iterator<Item = (&Point, Vec<Point>)> + '_ {
        (0..self.len()).map(|i| (&self.labels[i], self.member(i)))
    }

    /// Distinct members, each with the first label that produced it.
    pub fn distinct(&self) -> Vec<(Point, Vec<Point>)> {
        self.distinct_indices()
            .into_iter()
            .map(|i| (self.labels[i].clone(), self.member(i)))
            .collect()
    }

    pub fn distinct_count(&self) -> usize {
        self.distinct_indices().len()
    }

    fn distinct_indices(&self) -> Vec<usize> {
        let mut seen = HashMap::new();
        for (i, s) in self.sets.iter().enumerate() {
            seen.entry(s.clone()).or_insert(i);
        }
        let mut idx: Vec<usize> = seen.into_values().collect();
        idx.sort_unstable();
        idx
    }

    fn indices_of(&self, a: &[Point]) -> Result<Vec<usize>, VcError> {
        a.iter()
            .map(|p| self.index.get(p).copied().ok_or_else(|| VcError::NotInGround(p.clone())))
            .collect()
    }
}

/// Distinct members as rows over the ground indices.
struct Traces<'a> {
    sets: Vec<&'a FixedBitSet>,
    labels: Vec<&'a Point>,
}

impl<'a> Traces<'a> {
    fn new(fam: &'a SetFamily) -> Self {
        let idx = fam.distinct_indices();
        Self {
            sets: idx.iter().map(|&i| &fam.sets[i]).collect(),
            labels: idx.iter().map(|&i| &fam.labels[i]).collect(),
        }
    }

    fn trace(&self, m: usize, a: &[usize]) -> usize {
        a.iter()
            .enumerate()
            .filter(|(_, &g)| self.sets[m].contains(g))
            .fold(0, |acc, (bit, _)| acc | 1 << bit)
    }

    /// Number of distinct traces on `a`, stopping once `stop` is reached.
    fn count(&self, a: &[usize], stop: usize) -> usize {
        let mut seen = FixedBitSet::with_capacity(1 << a.len());
        let mut n = 0;
        for m in 0..self.sets.len() {
            let t = self.trace(m, a);
            if !seen.put(t) {
                n += 1;
                if n >= stop {
                    break;
                }
            }
        }
        n
    }

    fn shatters(&self, a: &[usize]) -> bool {
        let full = 1usize << a.len();
        self.sets.len() >= full && self.count(a, full) == full
    }

    /// For each trace (as a bit mask over `a`) the first member realizing it.
    fn realizers(&self, a: &[usize]) -> Vec<Option<usize>> {
        let mut by_trace = vec![None; 1 << a.len()];
        for m in 0..self.sets.len() {
            let t = self.trace(m, a);
            by_trace[t].get_or_insert(m);
        }
        by_trace
    }
}

/// A subset of the tested set and a parameter label realizing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceWitness {
    pub subset: Vec<Point>,
    pub label: Point,
}

/// Whether `a` is shattered; when it is, one witness per subset of `a`
/// (ordered by the bit mask of the subset over `a`).
pub fn is_shattered(
    fam: &SetFamily,
    a: &[Point],
    config: &VcConfig,
) -> Result<Option<Vec<TraceWitness>>, VcError> {
    if a.len() > config.max_shatter_size {
        return Err(VcError::Cap {
            what: "shattered-set size",
            size: a.len() as u128,
            cap: config.max_shatter_size as u128,
        });
    }
    let mut pts = a.to_vec();
    pts.sort();
    pts.dedup();
    let idx = fam.indices_of(&pts)?;
    let tr = Traces::new(fam);
    if !tr.shatters(&idx) {
        return Ok(None);
    }
    let witnesses = tr
        .realizers(&idx)
        .into_iter()
        .enumerate()
        .map(|(mask, m)| TraceWitness {
            subset: pts
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, p)| p.clone())
                .collect(),
            label: tr.labels[m.expect("shattered")].clone(),
        })
        .collect();
    Ok(Some(witnesses))
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if r == u128::MAX {
            break;
        }
    }
    r
}

fn check_candidates(n: usize, k: usize, config: &VcConfig) -> Result<(), VcError> {
    let size = binomial(n, k);
    if size > config.max_candidates {
        return Err(VcError::Cap {
            what: "candidate subsets",
            size,
            cap: config.max_candidates,
        });
    }
    Ok(())
}

/// Lexicographically first `k`-subset of the ground indices satisfying
/// `pred`, searched in parallel.
fn first_combination(n: usize, k: usize, pred: impl Fn(&[usize]) -> bool + Sync) -> Option<Vec<usize>> {
    const BATCH: usize = 1 << 14;
    let mut combos = (0..n).combinations(k);
    loop {
        let batch: Vec<Vec<usize>> = combos.by_ref().take(BATCH).collect();
        if batch.is_empty() {
            return None;
        }
        if let Some(hit) = batch.into_par_iter().find_first(|c| pred(c)) {
            return Some(hit);
        }
    }
}

/// `π(n)`: the largest number of traces on an `n`-point subset of the ground.
pub fn shatter_function(fam: &SetFamily, n: usize, config: &VcConfig) -> Result<u64, VcError> {
    let g = fam.ground.len();
    if n > g {
        return Err(VcError::Cap {
            what: "shatter-function argument vs ground size",
            size: n as u128,
            cap: g as u128,
        });
    }
    if n > config.max_shatter_size {
        return Err(VcError::Cap {
            what: "shatter-function argument",
            size: n as u128,
            cap: config.max_shatter_size as u128,
        });
    }
    check_candidates(g, n, config)?;
    let tr = Traces::new(fam);
    let ceiling = tr.sets.len().min(1 << n);
    if ceiling == 0 {
        return Ok(0);
    }
    let mut best = 0;
    let mut combos = (0..g).combinations(n);
    loop {
        let batch: Vec<Vec<usize>> = combos.by_ref().take(1 << 14).collect();
        if batch.is_empty() {
            break;
        }
        let m = batch
            .par_iter()
            .map(|c| tr.count(c, ceiling))
            .max()
            .unwrap_or(0);
        best = best.max(m);
        if best == ceiling {
            break;
        }
    }
    Ok(best as u64)
}

/// `Σ_{i ≤ d} C(n, i)`.
pub fn sauer_shelah_bound(d: u64, n: u64) -> BigUint {
    let mut sum = BigUint::zero();
    let mut c = BigUint::one();
    for i in 0..=d.min(n) {
        sum += &c;
        c = c * (n - i) / (i + 1);
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VcValue {
    Exact(usize),
    /// The search stopped at the cap with a shattered set of that size.
    AtLeast(usize),
}

impl VcValue {
    pub fn lower_bound(&self) -> usize {
        match *self {
            VcValue::Exact(n) | VcValue::AtLeast(n) => n,
        }
    }
}

impl fmt::Display for VcValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VcValue::Exact(n) => write!(f, "{n}"),
            VcValue::AtLeast(n) => write!(f, ">= {n}"),
        }
    }
}

impl Serialize for VcValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            VcValue::Exact(n) => s.serialize_u64(*n as u64),
            VcValue::AtLeast(_) => s.serialize_str(&self.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShatterReport {
    pub vc_dim: VcValue,
    /// Lexicographically first shattered set of the largest size found.
    pub witness: Vec<Point>,
    pub pi_table: Vec<(usize, u64)>,
    /// Number of distinct members.
    pub family_size: usize,
    pub ground_window: Option<Vec<Interval>>,
    pub param_window: Option<Vec<Interval>>,
}

/// Exact VC-dimension of the finite family when it is below `cap`.
///
/// Sizes are tried in ascending order; the cost is exponential in the
/// answer and polynomial of degree answer in the ground size.
pub fn vc_dimension(fam: &SetFamily, cap: usize, config: &VcConfig) -> Result<ShatterReport, VcError> {
    let tr = Traces::new(fam);
    let g = fam.ground.len();
    let mut witness: Vec<usize> = Vec::new();
    let mut vc = if tr.sets.is_empty() {
        // nothing is shattered, not even ∅
        VcValue::Exact(0)
    } else {
        let mut found = 0;
        let mut value = None;
        for k in 1..=g.min(cap) {
            if k > config.max_shatter_size {
                return Err(VcError::Cap {
                    what: "shattered-set size",
                    size: k as u128,
                    cap: config.max_shatter_size as u128,
                });
            }
            if tr.sets.len() < 1 << k {
                break;
            }
            check_candidates(g, k, config)?;
            match first_combination(g, k, |c| tr.shatters(c)) {
                Some(c) => {
                    witness = c;
                    found = k;
                }
                None => break,
            }
            if k == cap {
                value = Some(VcValue::AtLeast(cap));
            }
        }
        value.unwrap_or(VcValue::Exact(found))
    };
    if cap == 0 && !tr.sets.is_empty() {
        vc = VcValue::AtLeast(0);
    }
    let top = (vc.lower_bound() + 2).min(g).min(config.max_shatter_size);
    let mut pi_table = Vec::new();
    for n in 0..=top {
        if binomial(g, n) > config.max_candidates {
            break;
        }
        pi_table.push((n, shatter_function(fam, n, config)?));
    }
    Ok(ShatterReport {
        vc_dim: vc,
        witness: witness.into_iter().map(|i| fam.ground[i].clone()).collect(),
        pi_table,
        family_size: tr.sets.len(),
        ground_window: fam.ground_window.clone(),
        param_window: fam.param_window.clone(),
    })
}

/// How formula truth is computed at window points.
#[derive(Debug, Clone)]
pub enum FamilyMode {
    /// Eliminate quantifiers once, then evaluate the quantifier-free result.
    Qe(QeConfig),
    /// Enumerate quantifiers over the hint intervals.
    Bounded(BoundHints),
}

/// `{ S_b : b ∈ param_window }` with `S_b = {x ∈ ground_window : F(x; b)}`.
pub fn family_from_formula(
    f: &PartitionedFormula,
    ground_window: &[Interval],
    param_window: &[Interval],
    mode: &FamilyMode,
    config: &VcConfig,
) -> Result<SetFamily, VcError> {
    for (vars, window) in [(f.object_vars(), ground_window), (f.param_vars(), param_window)] {
        if vars.len() != window.len() {
            return Err(VcError::WindowDimension {
                want: vars.len(),
                got: window.len(),
            });
        }
        let size = box_size(window);
        if size > config.max_window {
            return Err(VcError::Cap {
                what: "window points",
                size,
                cap: config.max_window,
            });
        }
    }
    let ev = match mode {
        FamilyMode::Qe(qc) => {
            let qf = eliminate_quantifiers_with(f.formula(), qc)?.formula.into_formula();
            BoundedEvaluator::new(&qf, &BoundHints::new(), &EvalConfig::default())?
        }
        FamilyMode::Bounded(h) => BoundedEvaluator::new(f.formula(), h, &EvalConfig::default())?,
    };
    let ground = box_points(ground_window)?;
    let params = box_points(param_window)?;
    // positions of the evaluator's free variables among (x, y)
    let slots: Vec<(bool, usize)> = ev
        .free_vars()
        .iter()
        .map(|v| match f.object_vars().iter().position(|o| o == v) {
            Some(i) => (true, i),
            None => (false, f.param_vars().iter().position(|p| p == v).expect("declared")),
        })
        .collect();
    let sets: Vec<FixedBitSet> = params
        .par_iter()
        .map(|b| {
            let mut s = FixedBitSet::with_capacity(ground.len());
            let mut point = vec![BigInt::zero(); slots.len()];
            for (gi, x) in ground.iter().enumerate() {
                for (k, &(obj, i)) in slots.iter().enumerate() {
                    point[k] = BigInt::from(if obj { x[i] } else { b[i] });
                }
                if ev.eval(&point) {
                    s.insert(gi);
                }
            }
            s
        })
        .collect();
    let index = ground.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    Ok(SetFamily {
        ground,
        index,
        labels: params,
        sets,
        ground_window: Some(ground_window.to_vec()),
        param_window: Some(param_window.to_vec()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_partitioned, ParseOptions};
    use proptest::prelude::*;

    fn pf(text: &str) -> PartitionedFormula {
        parse_partitioned(text, &ParseOptions::default()).unwrap()
    }

    fn one_d(fam: &SetFamily) -> Vec<Vec<i64>> {
        let mut v: Vec<Vec<i64>> = fam
            .distinct()
            .into_iter()
            .map(|(_, s)| s.into_iter().map(|p| p[0]).collect())
            .collect();
        v.sort();
        v
    }

    fn iv(lo: i64, hi: i64) -> Interval {
        Interval::new(lo, hi)
    }

    fn cfg() -> VcConfig {
        VcConfig::default()
    }

    #[test]
    fn interval_syntax() {
        assert_eq!("0..10".parse::<Interval>().unwrap(), iv(0, 10));
        assert_eq!("-3..-1".parse::<Interval>().unwrap(), iv(-3, -1));
        assert!("3..1".parse::<Interval>().is_err());
        assert!("3".parse::<Interval>().is_err());
        assert_eq!(iv(-3, -1).to_string(), "-3..-1");
    }

    #[test]
    fn threshold_family() {
        let f = pf("#objects: x\n#params: y\n(<= x y)");
        let fam = family_from_formula(&f, &[iv(0, 2)], &[iv(0, 2)], &FamilyMode::Qe(QeConfig::default()), &cfg())
            .unwrap();
        assert_eq!(one_d(&fam), vec![vec![0], vec![0, 1], vec![0, 1, 2]]);
        assert_eq!(is_shattered(&fam, &[vec![0], vec![1]], &cfg()).unwrap(), None);
        let r = vc_dimension(&fam, 10, &cfg()).unwrap();
        assert_eq!(r.vc_dim, VcValue::Exact(1));
        // 0 lies in every member, so the first shattered point is 1
        assert_eq!(r.witness, vec![vec![1]]);
    }

    #[test]
    fn threshold_shatter_function() {
        // prefixes of a 3-point set plus ∅
        let f = pf("#objects: x\n#params: y\n(<= x y)");
        let fam = family_from_formula(&f, &[iv(0, 5)], &[iv(-1, 5)], &FamilyMode::Qe(QeConfig::default()), &cfg())
            .unwrap();
        assert_eq!(shatter_function(&fam, 3, &cfg()).unwrap(), 4);
        assert_eq!(shatter_function(&fam, 0, &cfg()).unwrap(), 1);
        let r = vc_dimension(&fam, 10, &cfg()).unwrap();
        assert_eq!(r.pi_table, vec![(0, 1), (1, 2), (2, 3), (3, 4)]);
    }

    #[test]
    fn constant_formula_gives_one_member() {
        let f = pf("#objects: x\n#params: y\n(= x x)");
        let fam = family_from_formula(&f, &[iv(1, 4)], &[iv(0, 5)], &FamilyMode::Qe(QeConfig::default()), &cfg())
            .unwrap();
        assert_eq!(one_d(&fam), vec![vec![1, 2, 3, 4]]);
        assert_eq!(fam.len(), 6);
        assert_eq!(fam.distinct_count(), 1);
        assert_eq!(vc_dimension(&fam, 5, &cfg()).unwrap().vc_dim, VcValue::Exact(0));
    }

    #[test]
    fn power_set() {
        let d = 4;
        let fam = SetFamily::from_masks(d, &(0..1u64 << d).collect::<Vec<_>>());
        let r = vc_dimension(&fam, 10, &cfg()).unwrap();
        assert_eq!(r.vc_dim, VcValue::Exact(d));
        assert_eq!(shatter_function(&fam, 2, &cfg()).unwrap(), 4);
        let capped = vc_dimension(&fam, 3, &cfg()).unwrap();
        assert_eq!(capped.vc_dim, VcValue::AtLeast(3));
        assert_eq!(serde_json::to_value(capped.vc_dim).unwrap(), serde_json::json!(">= 3"));
    }

    #[test]
    fn empty_set_always_shattered() {
        let fam = SetFamily::from_subsets(vec![1, 2], vec![vec![1]]).unwrap();
        let w = is_shattered(&fam, &[], &cfg()).unwrap().unwrap();
        assert_eq!(w, vec![TraceWitness { subset: vec![], label: vec![0] }]);
    }

    #[test]
    fn witnesses_name_realizing_labels() {
        let fam = SetFamily::from_subsets(vec![1, 2], vec![vec![1, 2], vec![2], vec![1], vec![]]).unwrap();
        let w = is_shattered(&fam, &[vec![1], vec![2]], &cfg()).unwrap().unwrap();
        let labels: Vec<i64> = w.iter().map(|t| t.label[0]).collect();
        // traces ∅, {1}, {2}, {1,2}
        assert_eq!(labels, vec![3, 2, 1, 0]);
        assert!(matches!(
            is_shattered(&fam, &[vec![7]], &cfg()),
            Err(VcError::NotInGround(_))
        ));
    }

    #[test]
    fn half_plane_family() {
        let f = pf("#objects: x1 x2\n#params: b\n(<= (+ (* 2 x1) (* -3 x2)) b)");
        let fam = family_from_formula(
            &f,
            &[iv(-2, 2), iv(-2, 2)],
            &[iv(-15, 15)],
            &FamilyMode::Qe(QeConfig::default()),
            &cfg(),
        )
        .unwrap();
        assert_eq!(vc_dimension(&fam, 5, &cfg()).unwrap().vc_dim, VcValue::Exact(1));
    }

    #[test]
    fn bounded_mode_needs_hints_for_quantifiers() {
        let f = pf("#objects: x\n#params: y\n(exists z (and (= x (* 2 z)) (<= x y)))");
        let err = family_from_formula(&f, &[iv(0, 4)], &[iv(0, 4)], &FamilyMode::Bounded(BoundHints::new()), &cfg());
        assert!(matches!(err, Err(VcError::Eval(EvalError::MissingHint(_)))));
        let h = BoundHints::new().with("z", 0, 2);
        let a = family_from_formula(&f, &[iv(0, 4)], &[iv(0, 4)], &FamilyMode::Bounded(h), &cfg()).unwrap();
        let b = family_from_formula(&f, &[iv(0, 4)], &[iv(0, 4)], &FamilyMode::Qe(QeConfig::default()), &cfg()).unwrap();
        assert_eq!(one_d(&a), one_d(&b));
        assert_eq!(one_d(&a), vec![vec![0], vec![0, 2], vec![0, 2, 4]]);
    }

    #[test]
    fn window_dimension_checked() {
        let f = pf("#objects: x\n#params: y\n(<= x y)");
        assert!(matches!(
            family_from_formula(&f, &[iv(0, 1), iv(0, 1)], &[iv(0, 1)], &FamilyMode::Qe(QeConfig::default()), &cfg()),
            Err(VcError::WindowDimension { want: 1, got: 2 })
        ));
    }

    #[test]
    fn sauer_shelah_values() {
        assert_eq!(sauer_shelah_bound(1, 3), BigUint::from(4u32));
        for n in 0..12u64 {
            assert_eq!(sauer_shelah_bound(n, n), BigUint::one() << n);
            assert_eq!(sauer_shelah_bound(n + 3, n), BigUint::one() << n);
        }
        assert_eq!(sauer_shelah_bound(0, 9), BigUint::one());
        assert_eq!(sauer_shelah_bound(2, 5), BigUint::from(16u32));
    }

    #[test]
    fn caps_are_reported() {
        let fam = SetFamily::from_masks(30, &[0, 1]);
        let tight = VcConfig {
            max_candidates: 10,
            ..VcConfig::default()
        };
        assert!(matches!(shatter_function(&fam, 3, &tight), Err(VcError::Cap { .. })));
        let a: Vec<Point> = (0..21).map(|i| vec![i]).collect();
        assert!(matches!(is_shattered(&fam, &a, &cfg()), Err(VcError::Cap { .. })));
    }

    /// Independent trace count by brute force over all subsets.
    fn naive_pi(n: usize, masks: &[u64], k: usize) -> u64 {
        let mut best = 0;
        for a in 0u64..1 << n {
            if a.count_ones() as usize != k {
                continue;
            }
            let mut traces: Vec<u64> = masks.iter().map(|m| m & a).collect();
            traces.sort();
            traces.dedup();
            best = best.max(traces.len() as u64);
        }
        best
    }

    fn family() -> impl Strategy<Value = (usize, Vec<u64>)> {
        (1usize..=7).prop_flat_map(|n| (Just(n), prop::collection::vec(0u64..1 << n, 1..40)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn shatter_function_laws((n, masks) in family()) {
            let fam = SetFamily::from_masks(n, &masks);
            let r = vc_dimension(&fam, 64, &cfg()).unwrap();
            let VcValue::Exact(vc) = r.vc_dim else { panic!() };
            let mut prev = 0;
            let mut max_full = 0;
            for k in 0..=n {
                let pi = shatter_function(&fam, k, &cfg()).unwrap();
                prop_assert_eq!(pi, naive_pi(n, &masks, k));
                prop_assert!(BigUint::from(pi) <= sauer_shelah_bound(vc as u64, k as u64));
                prop_assert!(pi >= prev);
                prev = pi;
                if pi == 1 << k {
                    max_full = k;
                }
            }
            prop_assert_eq!(vc, max_full);
            if !r.witness.is_empty() {
                prop_assert!(is_shattered(&fam, &r.witness, &cfg()).unwrap().is_some());
            }
        }

        #[test]
        fn shattering_is_hereditary((n, masks) in family(), sub in any::<u64>()) {
            let fam = SetFamily::from_masks(n, &masks);
            let r = vc_dimension(&fam, 64, &cfg()).unwrap();
            let part: Vec<Point> = r
                .witness
                .iter()
                .enumerate()
                .filter(|(i, _)| sub >> i & 1 == 1)
                .map(|(_, p)| p.clone())
                .collect();
            prop_assert!(is_shattered(&fam, &part, &cfg()).unwrap().is_some());
        }

        #[test]
        fn invariant_under_relabelling_and_duplicates(
            (n, masks) in family(),
            shift in -100i64..100,
            dup in 0usize..40,
        ) {
            let fam = SetFamily::from_masks(n, &masks);
            let vc = vc_dimension(&fam, 64, &cfg()).unwrap().vc_dim;
            // reverse and shift the ground, duplicate one member
            let relabel = |m: u64| -> Vec<i64> {
                (0..n).filter(|i| m >> i & 1 == 1).map(|i| shift - i as i64).collect()
            };
            let ground: Vec<i64> = (0..n).map(|i| shift - i as i64).collect();
            let mut subsets: Vec<Vec<i64>> = masks.iter().map(|&m| relabel(m)).collect();
            subsets.push(relabel(masks[dup % masks.len()]));
            let other = SetFamily::from_subsets(ground, subsets).unwrap();
            prop_assert_eq!(vc_dimension(&other, 64, &cfg()).unwrap().vc_dim, vc);
        }
    }
}
