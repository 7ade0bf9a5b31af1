//! Recursive-descent parser for the ASCII expression grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' exponent)?
//! base   := number | identifier | identifier '(' expr ')' | '(' expr ')'
//! number := integer ('/' positive-integer)?
//! ```
//!
//! Exponents are integers, optionally signed and optionally parenthesized
//! (`u^-1`, `u^(-1)`), so the printer's output for negative powers
//! re-parses.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::atom::atom_by_name;
use super::coord::Coord;
use super::expr::Expr;
use super::{Chart, Rational};
use crate::error::{Error, Result};

/// Parses `text`, accepting only coordinates of `chart` and registered atoms.
pub fn parse(text: &str, chart: &Chart) -> Result<Expr> {
    parse_with(text, chart, &BTreeMap::new())
}

/// Like [`parse`], additionally resolving the named definitions in `defs`
/// (for example `R` for `sigma*f_sigma - f`).
pub fn parse_with(text: &str, chart: &Chart, defs: &BTreeMap<String, Expr>) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        chart: Some(chart),
        defs,
    };
    p.parse_all()
}

/// Parses an atom derivative rule written in the placeholder `arg`.
pub(crate) fn parse_template(text: &str) -> Result<Expr> {
    let defs = BTreeMap::new();
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        chart: None,
        defs: &defs,
    };
    p.parse_all()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    /// `None` in template mode, where the only coordinate is `arg`.
    chart: Option<&'a Chart>,
    defs: &'a BTreeMap<String, Expr>,
}

impl Parser<'_> {
    fn err<T>(&self, at: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: at,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_all(&mut self) -> Result<Expr> {
        if self.peek().is_none() {
            return self.err(self.pos, "empty expression");
        }
        let e = self.expr()?;
        if let Some(c) = self.peek() {
            return self.err(self.pos, format!("unexpected `{}`", c as char));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(-self.term()?);
            } else {
                break;
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.factor()?];
        loop {
            if self.eat(b'*') {
                factors.push(self.factor()?);
            } else if self.eat(b'/') {
                factors.push(self.factor()?.powi(-1));
            } else {
                break;
            }
        }
        Ok(Expr::product(factors))
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(-self.factor()?);
        }
        let base = self.base()?;
        if self.eat(b'^') {
            let n = self.exponent()?;
            return Ok(base.powi(n));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i64> {
        let paren = self.eat(b'(');
        let neg = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        let digits = self.digits();
        if digits.is_empty() {
            return self.err(start, "expected integer exponent");
        }
        let n: i64 = match digits.parse() {
            Ok(n) => n,
            Err(_) => return self.err(start, "exponent out of range"),
        };
        if paren && !self.eat(b')') {
            return self.err(self.pos, "expected `)`");
        }
        Ok(if neg { -n } else { n })
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn base(&mut self) -> Result<Expr> {
        let Some(c) = self.peek() else {
            return self.err(self.pos, "unexpected end of input");
        };
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            if !self.eat(b')') {
                return self.err(self.pos, "expected `)`");
            }
            return Ok(e);
        }
        if c.is_ascii_digit() {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            return self.identifier();
        }
        self.err(self.pos, format!("unexpected `{}`", c as char))
    }

    fn number(&mut self) -> Result<Expr> {
        let num: BigInt = self.digits().parse().expect("digits");
        // `p/q` is a single literal only when the slash is directly followed
        // by digits
        let save = self.pos;
        if self.src.get(self.pos) == Some(&b'/')
            && self
                .src
                .get(self.pos + 1)
                .is_some_and(|c| c.is_ascii_digit())
        {
            self.pos += 1;
            let at = self.pos;
            let den: BigInt = self.digits().parse().expect("digits");
            if den.is_zero() {
                return self.err(at, "zero denominator in literal");
            }
            return Ok(Expr::constant(Rational::new(num, den)));
        }
        self.pos = save;
        Ok(Expr::constant(Rational::from_integer(num)))
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii")
            .to_string();
        if self.peek() == Some(b'(') {
            let Some(id) = atom_by_name(&name) else {
                return Err(Error::UnknownIdentifier(name));
            };
            self.pos += 1;
            let arg = self.expr()?;
            if !self.eat(b')') {
                return self.err(self.pos, "expected `)`");
            }
            return Ok(Expr::atom(id, arg));
        }
        match self.chart {
            None => {
                if name == "arg" {
                    Ok(Expr::coord(Coord::Slot))
                } else {
                    Err(Error::UnknownIdentifier(name))
                }
            }
            Some(chart) => {
                if let Some(e) = self.defs.get(&name) {
                    return Ok(e.clone());
                }
                match Coord::from_name(&name) {
                    Some(c) if c != Coord::Slot && chart.contains(c) => Ok(Expr::coord(c)),
                    _ => Err(Error::UnknownIdentifier(name)),
                }
            }
        }
    }
}
