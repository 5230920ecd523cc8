//! Presburger arithmetic workbench: formulas, decision procedures, and
//! VC-dimension measurement and certificates for formula-defined set
//! families.

pub mod formula;
pub mod contfrac;
mod serde_util;
pub mod eval;
pub mod qe;
pub mod vclab;
pub mod generator;
pub mod upperbound;
