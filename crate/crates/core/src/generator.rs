//! Formulas `F_T(x; y) = G_T(x + d·y)` whose families on `{1..d}` are all
//! `2^d` subsets, the sets `T`, `J_i`, `J'_i`, `T'` behind them, and modulus
//! selection for the continued-fraction route.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::eval::BoundHints;
use crate::formula::{bitlen, Formula, LinearTerm, PartitionedFormula};
use crate::serde_util::bigint_str;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("d must be at least 1")]
    ZeroD,
    #[error("d = {d} is above the cap {cap} for explicit materialization")]
    OverCap { d: u32, cap: u32 },
    #[error("index {j} is outside 0..2^{d}")]
    IndexRange { d: u32, j: BigInt },
    #[error("i = {i} is outside 1..={d}")]
    PositionRange { i: u32, d: u32 },
    #[error(
        "the cf-short encoder is not built: its 10-inequality ∃z∀v gadget for unions of \
         arithmetic progressions is not reconstructed here"
    )]
    GadgetUnavailable,
    #[error("no prime found within {gap} of {n}")]
    PrimeGap { n: BigInt, gap: BigInt },
}

/// Default cap on `d` for anything that lists `T` or the parameter window.
pub const DEFAULT_CAP: u32 = 16;

fn pow2(e: u32) -> BigInt {
    BigInt::one() << e
}

fn check_d(d: u32, cap: u32) -> Result<(), GenError> {
    if d == 0 {
        return Err(GenError::ZeroD);
    }
    if d > cap {
        return Err(GenError::OverCap { d, cap });
    }
    Ok(())
}

/// `S_j`: the `j`-th subset of `{1..d}` when subsets are sorted by
/// decreasing `Σ_{i∈S} 2^i`. `i ∈ S_j` iff bit `i−1` of `2^d − 1 − j` is set.
pub fn lex_subset(d: u32, j: &BigInt) -> Result<Vec<u32>, GenError> {
    if j.is_negative() || *j >= pow2(d) {
        return Err(GenError::IndexRange { d, j: j.clone() });
    }
    let code: BigInt = pow2(d) - BigInt::one() - j;
    Ok((1..=d).filter(|&i| code.bit((i - 1) as u64)).collect())
}

/// Whether `t ∈ T = ⊔_j {i + d·j : i ∈ S_j}`.
pub fn t_contains(d: u32, t: &BigInt) -> bool {
    if d == 0 || !t.is_positive() {
        return false;
    }
    // t = i + d·j with 1 ≤ i ≤ d
    let (j, mut i) = (t - BigInt::one()).div_mod_floor(&BigInt::from(d));
    i += 1;
    if j >= pow2(d) {
        return false;
    }
    let i = i.to_u32().unwrap();
    // i ∈ S_j iff bit i−1 of j is clear
    !j.bit((i - 1) as u64)
}

/// `T` as a sorted list.
pub fn build_t(d: u32, cap: u32) -> Result<Vec<BigInt>, GenError> {
    check_d(d, cap)?;
    let mut out = Vec::new();
    for j in 0..1u64 << d {
        let j = BigInt::from(j);
        for i in lex_subset(d, &j)? {
            out.push(BigInt::from(i) + BigInt::from(d) * &j);
        }
    }
    out.sort();
    Ok(out)
}

/// `J_i = {x + 2^i·y : 0 ≤ x < 2^{i−1}, 0 ≤ y < 2^{d−i}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinkowskiSum {
    pub i: u32,
    pub d: u32,
}

impl MinkowskiSum {
    pub fn contains(&self, j: &BigInt) -> bool {
        !j.is_negative() && *j < pow2(self.d) && !j.bit((self.i - 1) as u64)
    }

    pub fn elements(&self) -> Vec<BigInt> {
        let mut out = Vec::new();
        for y in 0..1u64 << (self.d - self.i) {
            for x in 0..1u64 << (self.i - 1) {
                out.push(BigInt::from(x) + (BigInt::from(y) << self.i));
            }
        }
        out.sort();
        out
    }
}

pub fn build_j(i: u32, d: u32) -> Result<MinkowskiSum, GenError> {
    if i == 0 || i > d {
        return Err(GenError::PositionRange { i, d });
    }
    Ok(MinkowskiSum { i, d })
}

/// Arithmetic progression `start, start + step, …` with `count` terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ap {
    #[serde(with = "bigint_str")]
    pub start: BigInt,
    #[serde(with = "bigint_str")]
    pub step: BigInt,
    #[serde(with = "bigint_str")]
    pub count: BigInt,
}

impl Ap {
    pub fn last(&self) -> BigInt {
        &self.start + &self.step * (&self.count - 1)
    }

    pub fn contains(&self, t: &BigInt) -> bool {
        let off = t - &self.start;
        !off.is_negative() && off.is_multiple_of(&self.step) && off / &self.step < self.count
    }

    pub fn elements(&self) -> Vec<BigInt> {
        let n = self.count.to_u64().expect("small progression");
        (0..n).map(|k| &self.start + &self.step * k).collect()
    }
}

/// `J'_i = {2^d·x + 2^i·y : 0 ≤ x < 2^{i−1}, 0 ≤ y < 2^{d−i}}`, which is the
/// progression from 0 with step `2^i` and `2^{d−1}` terms.
pub fn build_jprime(i: u32, d: u32) -> Result<Ap, GenError> {
    if i == 0 || i > d {
        return Err(GenError::PositionRange { i, d });
    }
    Ok(Ap {
        start: BigInt::zero(),
        step: pow2(i),
        count: pow2(d - 1),
    })
}

/// `T' = ⊔_i (i + d·J'_i)`: progression `i` starts at `i` with step `d·2^i`.
pub fn build_tprime(d: u32) -> Result<Vec<Ap>, GenError> {
    check_d(d, u32::MAX)?;
    (1..=d)
        .map(|i| {
            let j = build_jprime(i, d)?;
            Ok(Ap {
                start: BigInt::from(i) + BigInt::from(d) * j.start,
                step: BigInt::from(d) * j.step,
                count: j.count,
            })
        })
        .collect()
}

/// `m_i = i + d(2^{i+d−1} − 2^i)`, the largest element of `i + d·J'_i`.
pub fn m_values(d: u32) -> Vec<BigInt> {
    (1..=d)
        .map(|i| BigInt::from(i) + BigInt::from(d) * (pow2(i + d - 1) - pow2(i)))
        .collect()
}

/// Bridging values `(t', r, r', s)` for `t ∈ T`:
/// `t' = r + d(2^d·s + r')`, `t = r + d(s + r')`, `t' ∈ T'`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(with = "bigint_str")]
    pub t: BigInt,
    #[serde(with = "bigint_str")]
    pub tprime: BigInt,
    #[serde(with = "bigint_str")]
    pub r: BigInt,
    #[serde(with = "bigint_str")]
    pub rprime: BigInt,
    #[serde(with = "bigint_str")]
    pub s: BigInt,
    /// Values of the emitted formula's own quantified variables.
    #[serde(with = "string_map")]
    pub quantifiers: BTreeMap<String, BigInt>,
}

mod string_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, BigInt>, s: S) -> Result<S::Ok, S::Error> {
        let view: BTreeMap<&String, String> = m.iter().map(|(k, v)| (k, v.to_string())).collect();
        view.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, BigInt>, D::Error> {
        use serde::de::Error;
        BTreeMap::<String, String>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| {
                let n = v.parse().map_err(|_| D::Error::custom(format!("invalid integer {v:?}")))?;
                Ok((k, n))
            })
            .collect()
    }
}

/// Decomposes `t ∈ T` as `t = i + d(x + 2^i·y)` and returns the bridging
/// values, or `None` when `t ∉ T`.
pub fn bridge_witness(d: u32, t: &BigInt) -> Option<Witness> {
    if !t_contains(d, t) {
        return None;
    }
    let (j, i0) = (t - BigInt::one()).div_mod_floor(&BigInt::from(d));
    let i = i0.to_u32().unwrap() + 1;
    let x = &j % pow2(i - 1);
    let y = &j >> i;
    let s = x.clone();
    let rprime = &y << i;
    let r = BigInt::from(i);
    let tprime = &r + BigInt::from(d) * ((&s << d) + &rprime);
    Some(Witness {
        t: t.clone(),
        tprime,
        r,
        rprime,
        s,
        quantifiers: BTreeMap::from([("xh".to_string(), x), ("yh".to_string(), y)]),
    })
}

/// Whether `w` satisfies the bridging system with `t' ∈ T'`.
pub fn witness_holds(d: u32, w: &Witness) -> bool {
    let dd = BigInt::from(d);
    let ranges = w.r >= BigInt::one() && w.r <= dd && !w.rprime.is_negative() && w.rprime < pow2(d);
    ranges
        && w.tprime == &w.r + &dd * ((&w.s << d) + &w.rprime)
        && w.t == &w.r + &dd * (&w.s + &w.rprime)
        && build_tprime(d).is_ok_and(|aps| aps.iter().any(|a| a.contains(&w.tprime)))
}

fn v(name: &str) -> LinearTerm {
    LinearTerm::var(name)
}

fn k(n: impl Into<BigInt>) -> LinearTerm {
    LinearTerm::constant(n)
}

fn cv(c: impl Into<BigInt>, name: &str) -> LinearTerm {
    LinearTerm::scaled_var(c, name)
}

/// `lo ≤ name < hi`.
fn range(name: &str, lo: impl Into<BigInt>, hi: impl Into<BigInt>) -> Vec<Formula> {
    vec![Formula::le(k(lo), v(name)), Formula::lt(v(name), k(hi))]
}

/// `∨_i ∃z (tp = i + d·2^i·z ∧ 0 ≤ z < 2^{d−1})`, defining `T'`.
pub fn tprime_formula(d: u32, tp: &str) -> Formula {
    let dd = BigInt::from(d);
    Formula::or(
        (1..=d)
            .map(|i| {
                let rhs = &k(i) + &cv(&dd * pow2(i), "z");
                let mut parts = vec![Formula::eq(v(tp), rhs)];
                parts.extend(range("z", 0, pow2(d - 1)));
                Formula::exists("z", Formula::and(parts))
            })
            .collect(),
    )
}

/// `∃tp ∃r ∃rp ∃s (T'(tp) ∧ 1 ≤ r ≤ d ∧ 0 ≤ rp < 2^d ∧
/// tp = r + d(2^d·s + rp) ∧ t = r + d(s + rp))`, where `tprime` defines `T'`
/// with free variable `tp`.
pub fn bridge(d: u32, tprime: Formula, t: &LinearTerm) -> Formula {
    let dd = BigInt::from(d);
    let mut parts = vec![tprime];
    parts.push(Formula::le(k(1), v("r")));
    parts.push(Formula::le(v("r"), k(d)));
    parts.extend(range("rp", 0, pow2(d)));
    let tp_rhs = &(&v("r") + &cv(&dd * pow2(d), "s")) + &cv(dd.clone(), "rp");
    parts.push(Formula::eq(v("tp"), tp_rhs));
    let t_rhs = &(&v("r") + &cv(dd.clone(), "s")) + &cv(dd, "rp");
    parts.push(Formula::eq(t.clone(), t_rhs));
    Formula::exists_many(&["tp", "r", "rp", "s"], Formula::and(parts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoder {
    /// `∨_i ∃xh ∃yh (x + d·y = i + d(xh + 2^i·yh) ∧ ranges)`.
    Naive,
    /// The bridging system around a progression-union formula for `T'`.
    NaiveBridged,
    CfShort,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulusMode {
    /// Smallest prime above `max m_i`.
    Prime,
    /// `1 + ∏ m_i`.
    Product,
}

/// Certificate written next to a generated formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorMeta {
    pub d: u32,
    pub encoder: Encoder,
    #[serde(with = "bigint_str::interval")]
    pub ground_window: (BigInt, BigInt),
    #[serde(with = "bigint_str::interval")]
    pub param_window: (BigInt, BigInt),
    #[serde(with = "bigint_str::interval")]
    pub t_window: (BigInt, BigInt),
    pub hints: BoundHints,
    #[serde(with = "bigint_str::opt", default)]
    pub modulus: Option<BigInt>,
    pub ap_list: Vec<Ap>,
    pub witnesses: Vec<Witness>,
}

fn meta(d: u32, encoder: Encoder, hints: BoundHints, witnesses: Vec<Witness>) -> Result<GeneratorMeta, GenError> {
    Ok(GeneratorMeta {
        d,
        encoder,
        ground_window: (BigInt::one(), BigInt::from(d)),
        param_window: (BigInt::zero(), pow2(d) - 1),
        t_window: (BigInt::one(), BigInt::from(d) * pow2(d)),
        hints,
        modulus: None,
        ap_list: build_tprime(d)?,
        witnesses,
    })
}

fn partition(f: Formula) -> PartitionedFormula {
    PartitionedFormula::new(f, vec!["x".into()], vec!["y".into()]).expect("x and y are the free variables")
}

/// `F(x; y) = ∨_{i=1}^{d} ∃xh ∃yh (x + d·y = i + d(xh + 2^i·yh) ∧ 0 ≤ xh < 2^{i−1} ∧ 0 ≤ yh < 2^{d−i})`.
pub fn encode_naive(d: u32, cap: u32) -> Result<(PartitionedFormula, GeneratorMeta), GenError> {
    check_d(d, cap)?;
    let dd = BigInt::from(d);
    let lhs = &v("x") + &cv(dd.clone(), "y");
    let f = Formula::or(
        (1..=d)
            .map(|i| {
                let rhs = &(&k(i) + &cv(dd.clone(), "xh")) + &cv(&dd * pow2(i), "yh");
                let mut parts = vec![Formula::eq(lhs.clone(), rhs)];
                parts.extend(range("xh", 0, pow2(i - 1)));
                parts.extend(range("yh", 0, pow2(d - i)));
                Formula::exists_many(&["xh", "yh"], Formula::and(parts))
            })
            .collect(),
    );
    let top: BigInt = pow2(d - 1) - BigInt::one();
    let hints = BoundHints::new().with("xh", 0, top.clone()).with("yh", 0, top);
    let witnesses = build_t(d, cap)?
        .iter()
        .map(|t| bridge_witness(d, t).expect("t ∈ T"))
        .collect();
    Ok((partition(f), meta(d, Encoder::Naive, hints, witnesses)?))
}

/// `F(x; y) = G_T(x + d·y)` with `G_T` the bridging system around
/// [`tprime_formula`].
pub fn encode_bridged(d: u32, cap: u32) -> Result<(PartitionedFormula, GeneratorMeta), GenError> {
    check_d(d, cap)?;
    let t = &v("x") + &cv(d, "y");
    let f = bridge(d, tprime_formula(d, "tp"), &t);
    let m_max = m_values(d).into_iter().max().unwrap();
    let hints = BoundHints::new()
        .with("tp", 1, m_max)
        .with("r", 1, d)
        .with("rp", 0, pow2(d) - 1)
        .with("s", 0, pow2(d - 1) - 1)
        .with("z", 0, pow2(d - 1) - 1);
    let witnesses = build_t(d, cap)?
        .iter()
        .map(|t| {
            let mut w = bridge_witness(d, t).expect("t ∈ T");
            // tp = i + d·2^i·z
            let i = w.r.to_u32().unwrap();
            let z = (&w.tprime - &w.r) / (BigInt::from(d) << i);
            w.quantifiers = BTreeMap::from([
                ("tp".to_string(), w.tprime.clone()),
                ("r".to_string(), w.r.clone()),
                ("rp".to_string(), w.rprime.clone()),
                ("s".to_string(), w.s.clone()),
                ("z".to_string(), z),
            ]);
            w
        })
        .collect();
    Ok((partition(f), meta(d, Encoder::NaiveBridged, hints, witnesses)?))
}

/// The continued-fraction encoder with at most 10 variables and 18
/// inequalities. Not built: always fails after validating its inputs.
pub fn encode_cf_short(
    d: u32,
    _mode: ModulusMode,
    cap: u32,
) -> Result<(PartitionedFormula, GeneratorMeta), GenError> {
    check_d(d, cap)?;
    Err(GenError::GadgetUnavailable)
}

pub fn encode(d: u32, encoder: Encoder, mode: ModulusMode, cap: u32) -> Result<(PartitionedFormula, GeneratorMeta), GenError> {
    match encoder {
        Encoder::Naive => encode_naive(d, cap),
        Encoder::NaiveBridged => encode_bridged(d, cap),
        Encoder::CfShort => encode_cf_short(d, mode, cap),
    }
}

/// `1 + ∏ m_i`.
pub fn product_modulus(d: u32) -> BigInt {
    m_values(d).iter().product::<BigInt>() + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimeTest {
    /// Miller–Rabin with 40 random bases drawn from a seeded generator;
    /// a composite passes with probability below `2^-80`.
    Probabilistic { seed: u64 },
    /// Trial division; exponential in the bit length.
    DeterministicTrial,
}

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

fn miller_rabin(n: &BigUint, rng: &mut ChaCha20Rng, rounds: usize) -> bool {
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for p in SMALL_PRIMES {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap();
    let dpart = &n1 >> s;
    'round: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n1);
        let mut x = a.modpow(&dpart, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n1 {
                continue 'round;
            }
        }
        return false;
    }
    true
}

/// Trial division by 2, 3, 5 and then by candidates coprime to 30.
fn trial_division(n: &BigUint) -> bool {
    if *n < BigUint::from(2u32) {
        return false;
    }
    for p in [2u32, 3, 5] {
        if *n == BigUint::from(p) {
            return true;
        }
        if (n % p).is_zero() {
            return false;
        }
    }
    let digits = n.to_u64_digits();
    // n mod p for p < 2^32 from the base-2^64 digits
    let rem = |p: u64| -> u64 {
        let base = ((1u128 << 64) % p as u128) as u64;
        digits
            .iter()
            .rev()
            .fold(0u64, |acc, &dg| ((acc as u128 * base as u128 + (dg % p) as u128) % p as u128) as u64)
    };
    let limit = n.sqrt();
    if limit.bits() > 64 {
        panic!("trial division is only for numbers below 2^128");
    }
    let limit = limit.to_u64().unwrap();
    const WHEEL: [u64; 8] = [1, 7, 11, 13, 17, 19, 23, 29];
    let mut base = 0u64;
    loop {
        for w in WHEEL {
            let p = base + w;
            if p < 7 {
                continue;
            }
            if p > limit {
                return true;
            }
            let r = if digits.len() <= 1 {
                digits.first().copied().unwrap_or(0) % p
            } else {
                rem(p)
            };
            if r == 0 {
                return false;
            }
        }
        base += 30;
    }
}

pub fn is_prime(n: &BigInt, test: PrimeTest) -> bool {
    let Some(n) = n.to_biguint() else { return false };
    match test {
        PrimeTest::DeterministicTrial => trial_division(&n),
        PrimeTest::Probabilistic { seed } => {
            // each candidate gets its own stream so results do not depend on search order
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(n.iter_u64_digits().fold(0u64, |a, dg| a.rotate_left(7) ^ dg));
            miller_rabin(&n, &mut rng, 40)
        }
    }
}

/// Smallest `p > n` passing the test. Gives up after `10^4·bitlen(n)`
/// candidates.
pub fn next_prime_above(n: &BigInt, test: PrimeTest) -> Result<BigInt, GenError> {
    let gap = BigInt::from(10_000u64) * BigInt::from(bitlen(n));
    let mut c = n + 1;
    let end = n + &gap;
    while c <= end {
        if is_prime(&c, test) {
            return Ok(c);
        }
        c += 1;
    }
    Err(GenError::PrimeGap { n: n.clone(), gap })
}

/// The modulus of the continued-fraction encoding: the smallest prime
/// above `max m_i`, or `1 + ∏ m_i`.
pub fn select_modulus(d: u32, mode: ModulusMode, seed: u64) -> Result<BigInt, GenError> {
    check_d(d, u32::MAX)?;
    match mode {
        ModulusMode::Product => Ok(product_modulus(d)),
        ModulusMode::Prime => {
            let m = m_values(d).into_iter().max().unwrap();
            next_prime_above(&m, PrimeTest::Probabilistic { seed })
        }
    }
}
