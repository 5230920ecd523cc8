use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::One;

use super::ast::{Atom, Formula, PartitionedFormula};
use super::term::{is_valid_var, LinearTerm};
use super::FormulaError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: variable `{name}` is already bound")]
    Shadowed {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("{line}:{column}: variable `{name}` is not declared")]
    Unbound {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("{line}:{column}: divisibility atoms are not allowed in input")]
    DivNotAllowed { line: usize, column: usize },
    #[error("partition header: {0}")]
    Partition(String),
}

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Accept `(div m t)` atoms.
    pub allow_div: bool,
    /// When set, every free variable must be listed here.
    pub free_vars: Option<BTreeSet<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Word(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut chars = text.chars().peekable();
    let mut at_line_start = true;
    while let Some(&c) = chars.peek() {
        if at_line_start && c == '#' {
            // header or comment line
            for c in chars.by_ref() {
                if c == '\n' {
                    break;
                }
            }
            line += 1;
            column = 1;
            continue;
        }
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
                at_line_start = true;
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            '(' | ')' => {
                chars.next();
                out.push(Token {
                    tok: if c == '(' { Tok::Open } else { Tok::Close },
                    line,
                    column,
                });
                column += 1;
                at_line_start = false;
            }
            _ => {
                let (l, col) = (line, column);
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' {
                        break;
                    }
                    word.push(c);
                    chars.next();
                    column += 1;
                }
                out.push(Token {
                    tok: Tok::Word(word),
                    line: l,
                    column: col,
                });
                at_line_start = false;
            }
        }
    }
    out
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    opts: &'a ParseOptions,
    bound: Vec<String>,
    // every name bound anywhere so far, with position, for the free/bound clash check
    ever_bound: Vec<(String, usize, usize)>,
    free_seen: Vec<(String, usize, usize)>,
    end: (usize, usize),
}

impl<'a> Parser<'a> {
    fn err<T>(&self, at: (usize, usize), message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            line: at.0,
            column: at.1,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.column)).unwrap_or(self.end)
    }

    fn next(&mut self) -> Result<Token, ParseError> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => self.err(self.end, "unexpected end of input"),
        }
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        let at = self.here();
        match self.next()?.tok {
            Tok::Close => Ok(()),
            other => self.err(at, format!("expected `)`, found {}", describe(&other))),
        }
    }

    fn word(&mut self) -> Result<(String, (usize, usize)), ParseError> {
        let at = self.here();
        match self.next()?.tok {
            Tok::Word(w) => Ok((w, at)),
            other => self.err(at, format!("expected a symbol, found {}", describe(&other))),
        }
    }

    fn at_close(&self) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Close, .. }))
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let at = self.here();
        let tok = self.next()?;
        match tok.tok {
            Tok::Word(w) if w == "T" => Ok(Formula::True),
            Tok::Word(w) if w == "F" => Ok(Formula::False),
            Tok::Word(w) => self.err(at, format!("expected a formula, found `{w}`")),
            Tok::Close => self.err(at, "expected a formula, found `)`"),
            Tok::Open => {
                let (head, head_at) = self.word()?;
                match head.as_str() {
                    "not" => {
                        let f = self.formula()?;
                        self.expect_close()?;
                        Ok(Formula::not(f))
                    }
                    "and" | "or" => {
                        let mut children = Vec::new();
                        while !self.at_close() {
                            children.push(self.formula()?);
                        }
                        if children.is_empty() {
                            return self.err(head_at, format!("`{head}` needs at least one operand"));
                        }
                        self.expect_close()?;
                        Ok(if head == "and" {
                            Formula::and(children)
                        } else {
                            Formula::or(children)
                        })
                    }
                    "exists" | "forall" => {
                        let (var, var_at) = self.word()?;
                        if !is_valid_var(&var) {
                            return self.err(var_at, format!("invalid variable name `{var}`"));
                        }
                        if self.bound.contains(&var) {
                            return Err(ParseError::Shadowed {
                                name: var,
                                line: var_at.0,
                                column: var_at.1,
                            });
                        }
                        self.bound.push(var.clone());
                        self.ever_bound.push((var.clone(), var_at.0, var_at.1));
                        let body = self.formula()?;
                        self.bound.pop();
                        self.expect_close()?;
                        Ok(if head == "exists" {
                            Formula::exists(&var, body)
                        } else {
                            Formula::forall(&var, body)
                        })
                    }
                    "<=" | "<" | "=" => {
                        let a = self.term()?;
                        let b = self.term()?;
                        self.expect_close()?;
                        Ok(Formula::Atom(match head.as_str() {
                            "<=" => Atom::Le(a, b),
                            "<" => Atom::Lt(a, b),
                            _ => Atom::Eq(a, b),
                        }))
                    }
                    "div" => {
                        if !self.opts.allow_div {
                            return Err(ParseError::DivNotAllowed {
                                line: at.0,
                                column: at.1,
                            });
                        }
                        let (m, m_at) = self.word()?;
                        let modulus = parse_int(&m)
                            .filter(|m| *m >= BigInt::one())
                            .map_or_else(|| self.err(m_at, "modulus must be a positive integer"), Ok)?;
                        let term = self.term()?;
                        self.expect_close()?;
                        Ok(Formula::Atom(Atom::Div { modulus, term }))
                    }
                    other => self.err(head_at, format!("unknown operator `{other}`")),
                }
            }
        }
    }

    fn term(&mut self) -> Result<LinearTerm, ParseError> {
        let at = self.here();
        match self.next()?.tok {
            Tok::Word(w) => {
                if let Some(n) = parse_int(&w) {
                    Ok(LinearTerm::constant(n))
                } else if is_valid_var(&w) {
                    self.note_var(&w, at);
                    Ok(LinearTerm::var(&w))
                } else {
                    self.err(at, format!("expected a term, found `{w}`"))
                }
            }
            Tok::Close => self.err(at, "expected a term, found `)`"),
            Tok::Open => {
                let (head, head_at) = self.word()?;
                match head.as_str() {
                    "+" => {
                        let mut acc = LinearTerm::zero();
                        let mut n = 0;
                        while !self.at_close() {
                            acc = &acc + &self.term()?;
                            n += 1;
                        }
                        if n == 0 {
                            return self.err(head_at, "`+` needs at least one operand");
                        }
                        self.expect_close()?;
                        Ok(acc)
                    }
                    "*" => {
                        let (c, c_at) = self.word()?;
                        let Some(c) = parse_int(&c) else {
                            return self.err(c_at, "the first operand of `*` must be an integer");
                        };
                        let (v, v_at) = self.word()?;
                        if !is_valid_var(&v) {
                            return self.err(v_at, "the second operand of `*` must be a variable");
                        }
                        self.note_var(&v, v_at);
                        self.expect_close()?;
                        Ok(LinearTerm::scaled_var(c, &v))
                    }
                    other => self.err(head_at, format!("unknown term operator `{other}`")),
                }
            }
        }
    }

    fn note_var(&mut self, name: &str, at: (usize, usize)) {
        if !self.bound.iter().any(|b| b == name) {
            self.free_seen.push((name.to_string(), at.0, at.1));
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Open => "`(`".into(),
        Tok::Close => "`)`".into(),
        Tok::Word(w) => format!("`{w}`"),
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Parses a formula with default options (no `div` atoms, free variables
/// unrestricted).
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    parse_with(text, &ParseOptions::default())
}

pub fn parse_with(text: &str, opts: &ParseOptions) -> Result<Formula, ParseError> {
    let tokens = tokenize(text);
    let end = text
        .lines()
        .enumerate()
        .last()
        .map(|(i, l)| (i + 1, l.chars().count() + 1))
        .unwrap_or((1, 1));
    let mut p = Parser {
        tokens,
        pos: 0,
        opts,
        bound: Vec::new(),
        ever_bound: Vec::new(),
        free_seen: Vec::new(),
        end,
    };
    let f = p.formula()?;
    if let Some(t) = p.peek() {
        return p.err((t.line, t.column), "trailing input after formula");
    }
    // a name may not be both bound somewhere and free somewhere else
    for (name, line, column) in &p.free_seen {
        if p.ever_bound.iter().any(|(b, ..)| b == name) {
            return Err(ParseError::Shadowed {
                name: name.clone(),
                line: *line,
                column: *column,
            });
        }
    }
    if let Some(decl) = &opts.free_vars {
        for (name, line, column) in &p.free_seen {
            if !decl.contains(name) {
                return Err(ParseError::Unbound {
                    name: name.clone(),
                    line: *line,
                    column: *column,
                });
            }
        }
    }
    Ok(f)
}

/// Parses a formula file with `#objects:` / `#params:` header lines.
pub fn parse_partitioned(text: &str, opts: &ParseOptions) -> Result<PartitionedFormula, ParseError> {
    let (objects, params) = read_headers(text)?;
    let (objects, params) = match (objects, params) {
        (Some(o), Some(p)) => (o, p),
        _ => {
            return Err(ParseError::Partition(
                "missing `#objects:` or `#params:` header".into(),
            ))
        }
    };
    let mut opts = opts.clone();
    opts.free_vars = Some(objects.iter().chain(&params).cloned().collect());
    let f = parse_with(text, &opts)?;
    PartitionedFormula::new(f, objects, params).map_err(|e| match e {
        FormulaError::Partition(m) => ParseError::Partition(m),
        other => ParseError::Partition(other.to_string()),
    })
}

/// Reads the optional `#objects:` and `#params:` header lines.
pub fn read_headers(text: &str) -> Result<(Option<Vec<String>>, Option<Vec<String>>), ParseError> {
    let mut objects = None;
    let mut params = None;
    for line in text.lines() {
        let line = line.trim_start();
        let (slot, rest) = if let Some(rest) = line.strip_prefix("#objects:") {
            (&mut objects, rest)
        } else if let Some(rest) = line.strip_prefix("#params:") {
            (&mut params, rest)
        } else {
            continue;
        };
        let names: Vec<String> = rest
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        if let Some(bad) = names.iter().find(|n| !is_valid_var(n)) {
            return Err(ParseError::Partition(format!("invalid variable name `{bad}`")));
        }
        *slot = Some(names);
    }
    Ok((objects, params))
}

/// Renders a partitioned formula in the file format read by
/// [`parse_partitioned`].
pub fn print_partitioned(f: &PartitionedFormula) -> String {
    format!(
        "#objects: {}\n#params: {}\n{}\n",
        f.object_vars().join(", "),
        f.param_vars().join(", "),
        f.formula()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_le_5() -> Formula {
        Formula::le(LinearTerm::var("x"), LinearTerm::constant(5))
    }

    #[test]
    fn reads_atom_with_zero_coefficients() {
        let f = parse("(<= (+ (* 1 x) 0) (+ (* 0 x) 5))").unwrap();
        assert_eq!(f, x_le_5());
    }

    #[test]
    fn reads_exists() {
        let f = parse("(exists t (= t (+ x y)))").unwrap();
        let expected = Formula::exists(
            "t",
            Formula::eq(
                LinearTerm::var("t"),
                &LinearTerm::var("x") + &LinearTerm::var("y"),
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn rejects_shadowing() {
        let err = parse("(exists x (exists x T))").unwrap_err();
        assert!(matches!(err, ParseError::Shadowed { ref name, line: 1, column: 19 } if name == "x"));
    }

    #[test]
    fn rejects_bound_name_reused_free() {
        let err = parse("(and (exists x (<= x 1)) (<= x 2))").unwrap_err();
        assert!(matches!(err, ParseError::Shadowed { .. }));
    }

    #[test]
    fn sibling_quantifiers_may_share_names() {
        let f = parse("(or (exists u (= u x)) (exists u (< u x)))").unwrap();
        assert_eq!(f.quantified_vars().len(), 1);
    }

    #[test]
    fn unbound_with_declarations() {
        let opts = ParseOptions {
            free_vars: Some(["x".to_string()].into_iter().collect()),
            ..Default::default()
        };
        assert!(parse_with("(<= x 1)", &opts).is_ok());
        let err = parse_with("(<= x\n  y)", &opts).unwrap_err();
        assert_eq!(
            err,
            ParseError::Unbound {
                name: "y".into(),
                line: 2,
                column: 3
            }
        );
    }

    #[test]
    fn div_gated_by_option() {
        assert!(matches!(
            parse("(div 2 x)"),
            Err(ParseError::DivNotAllowed { .. })
        ));
        let opts = ParseOptions {
            allow_div: true,
            ..Default::default()
        };
        let f = parse_with("(div 2 x)", &opts).unwrap();
        assert_eq!(f, Formula::Atom(Atom::divides(2, LinearTerm::var("x"))));
        assert!(parse_with("(div 0 x)", &opts).is_err());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("(and\n  (<= x 1)\n  (foo))").unwrap_err();
        assert_eq!(
            err,
            ParseError::Syntax {
                line: 3,
                column: 4,
                message: "unknown operator `foo`".into()
            }
        );
        assert!(matches!(parse("(<= x 1"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("(<= x 1) T"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("(and)"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("(* x 2)"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("(<= (* x 2) 1)"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn singleton_connectives_collapse() {
        assert_eq!(parse("(and (<= x 5))").unwrap(), x_le_5());
    }

    #[test]
    fn big_integers() {
        let f = parse("(<= x 123456789012345678901234567890)").unwrap();
        let Formula::Atom(Atom::Le(_, b)) = f else { panic!() };
        assert_eq!(
            b.constant_part().to_string(),
            "123456789012345678901234567890"
        );
    }

    #[test]
    fn partitioned_file() {
        let text = "#objects: x\n#params: y\n(<= x y)\n";
        let pf = parse_partitioned(text, &ParseOptions::default()).unwrap();
        assert_eq!(pf.object_vars(), ["x"]);
        assert_eq!(pf.param_vars(), ["y"]);
        assert_eq!(print_partitioned(&pf), text);
        let bad = "#objects: x\n#params: y\n(<= x z)\n";
        assert!(matches!(
            parse_partitioned(bad, &ParseOptions::default()),
            Err(ParseError::Unbound { line: 3, .. })
        ));
    }
}
