//! VC upper-bound certificates for quantifier-free formulas.
//!
//! Each atom induces a family of small VC-dimension: half-spaces with a fixed
//! normal are nested and hyperplane fibers partition space, so both score 1;
//! `c | t` has at most `c` fibers and scores `max(1, ⌊log₂ c⌋)`. A Boolean
//! combination of atoms with scores summing to `ℓ` has shatter function at
//! most `(n+1)^ℓ`, so no set larger than `max{n : 2^n ≤ (n+1)^ℓ}` is
//! shattered.
//!
//! Formulas with quantifiers go through quantifier elimination first, which
//! preserves the induced family but can blow up the atom count. The
//! resulting bounds may be exponentially loose in the formula length.

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::formula::{print, Atom, Formula, PartitionedFormula};
use crate::qe::{eliminate_quantifiers_with, QeConfig, QeError, QeStats};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UpperBoundError {
    #[error("formula has a quantifier over {0}; eliminate quantifiers first")]
    Quantifier(String),
    #[error("certificate unavailable")]
    Qe(#[from] QeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomKind {
    Le,
    Lt,
    Eq,
    Div,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AtomBound {
    pub atom: String,
    pub kind: AtomKind,
    pub bound: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AtomInventory {
    pub atoms: Vec<AtomBound>,
    /// Congruence atoms.
    pub congruences: usize,
    /// Inequality and equality atoms.
    pub inequalities: usize,
}

impl AtomInventory {
    pub fn ell(&self) -> u64 {
        self.atoms.iter().map(|a| a.bound).sum()
    }

    pub fn push(&mut self, a: &Atom) {
        let (kind, bound) = match a {
            Atom::Le(..) => (AtomKind::Le, 1),
            Atom::Lt(..) => (AtomKind::Lt, 1),
            Atom::Eq(..) => (AtomKind::Eq, 1),
            Atom::Div { modulus, .. } => {
                let c = modulus.magnitude();
                (AtomKind::Div, (c.bits().saturating_sub(1)).max(1))
            }
        };
        if kind == AtomKind::Div {
            self.congruences += 1;
        } else {
            self.inequalities += 1;
        }
        self.atoms.push(AtomBound {
            atom: print(&Formula::atom(a.clone())),
            kind,
            bound,
        });
    }
}

/// One entry per atom occurrence.
pub fn inventory(f: &Formula) -> Result<AtomInventory, UpperBoundError> {
    if let Some(v) = f.quantified_vars().into_iter().next() {
        return Err(UpperBoundError::Quantifier(v));
    }
    let mut inv = AtomInventory::default();
    f.for_each_atom(&mut |a| inv.push(a));
    Ok(inv)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UpperBoundCertificate {
    pub ell: u64,
    pub bound: u64,
    pub inventory: AtomInventory,
}

/// Whether `2^n ≤ (n+1)^ell`.
fn fits(n: u64, ell: u64) -> bool {
    let lhs = n as f64;
    let rhs = ell as f64 * ((n + 1) as f64).log2();
    if (lhs - rhs).abs() > 1e-6 * lhs.max(1.0) {
        return lhs < rhs;
    }
    let ell = u32::try_from(ell).expect("close call with huge ell");
    BigUint::one() << n <= BigUint::from(n + 1).pow(ell)
}

/// `max{n : 2^n ≤ (n+1)^ell}` by ascending scan.
pub fn composition_bound(ell: u64) -> u64 {
    let mut n = 0;
    while fits(n + 1, ell) {
        n += 1;
    }
    n
}

pub fn certificate(inv: AtomInventory) -> UpperBoundCertificate {
    let ell = inv.ell();
    UpperBoundCertificate {
        ell,
        bound: composition_bound(ell),
        inventory: inv,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UpperBoundReport {
    pub ell: u64,
    pub bound: u64,
    pub atom_breakdown: Vec<AtomBound>,
    pub congruences: usize,
    pub inequalities: usize,
    pub qe_stats: QeStats,
    pub note: &'static str,
}

pub const LOOSENESS_NOTE: &str = "bound derived after quantifier elimination; it can be exponentially \
     larger than the formula length and no polynomial dependence on it is claimed";

impl UpperBoundReport {
    pub fn new(cert: UpperBoundCertificate, qe_stats: QeStats) -> Self {
        UpperBoundReport {
            ell: cert.ell,
            bound: cert.bound,
            atom_breakdown: cert.inventory.atoms,
            congruences: cert.inventory.congruences,
            inequalities: cert.inventory.inequalities,
            qe_stats,
            note: LOOSENESS_NOTE,
        }
    }
}

/// Certificate for the quantifier-free equivalent of `f`.
pub fn upper_bound_via_qe(f: &PartitionedFormula, config: &QeConfig) -> Result<UpperBoundReport, UpperBoundError> {
    let out = eliminate_quantifiers_with(f.formula(), config)?;
    let cert = certificate(inventory(out.formula.formula())?);
    Ok(UpperBoundReport::new(cert, out.stats))
}
