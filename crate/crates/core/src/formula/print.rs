use std::fmt;

use super::ast::{Atom, Formula};

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Le(a, b) => write!(f, "(<= {a} {b})"),
            Atom::Lt(a, b) => write!(f, "(< {a} {b})"),
            Atom::Eq(a, b) => write!(f, "(= {a} {b})"),
            Atom::Div { modulus, term } => write!(f, "(div {modulus} {term})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("T"),
            Formula::False => f.write_str("F"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(cs) | Formula::Or(cs) => {
                f.write_str(if matches!(self, Formula::And(_)) { "(and" } else { "(or" })?;
                for c in cs {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
            Formula::Exists(v, b) => write!(f, "(exists {v} {b})"),
            Formula::Forall(v, b) => write!(f, "(forall {v} {b})"),
        }
    }
}

/// Canonical text of a formula; `parse(&print(f)) == f`.
pub fn print(f: &Formula) -> String {
    f.to_string()
}

#[cfg(test)]
mod tests {
    use super::super::parse::{parse, parse_with, ParseOptions};
    use super::*;
    use crate::formula::LinearTerm;

    #[test]
    fn atom_round_trip() {
        let f = Formula::le(LinearTerm::var("x"), LinearTerm::constant(5));
        let s = print(&f);
        assert_eq!(s, "(<= x 5)");
        assert_eq!(parse(&s).unwrap(), f);
        assert_eq!(print(&parse(&s).unwrap()), s);
    }

    #[test]
    fn nested_round_trip() {
        let text = "(forall v (or (not (exists t (= (+ t (* -3 v)) 7))) (< x (* 2 v))))";
        let f = parse(text).unwrap();
        assert_eq!(print(&f), text);
        let opts = ParseOptions {
            allow_div: true,
            ..Default::default()
        };
        let g = parse_with("(and (div 6 (+ x 1)) F T)", &opts).unwrap();
        assert_eq!(parse_with(&print(&g), &opts).unwrap(), g);
    }
}
