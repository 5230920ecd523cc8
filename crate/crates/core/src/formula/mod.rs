//! The Presburger formula language: linear terms, atoms, formulas with
//! Boolean connectives and integer quantifiers, the s-expression syntax,
//! and size measurements.

mod ast;
mod parse;
mod print;
mod shape;
mod term;

pub use ast::{Atom, Formula, PartitionedFormula};
pub use parse::{
    parse, parse_partitioned, parse_with, print_partitioned, read_headers, ParseError,
    ParseOptions,
};
pub use print::print;
pub use shape::{phi_bits, shape, term_bits, ShapeReport};
pub use term::{bitlen, is_valid_var, LinearTerm};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error("variable `{0}` is bound more than once on a path or also occurs free")]
    Shadowed(String),
    #[error("cannot substitute for quantified variable `{0}`")]
    BindsQuantified(String),
    #[error("substituted term mentions quantified variable `{0}`")]
    Capture(String),
    #[error("invalid partition: {0}")]
    Partition(String),
}
