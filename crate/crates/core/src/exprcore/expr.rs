use std::collections::BTreeMap;
use std::fmt;
use std::ops;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::atom::{atom_name, AtomId};
use super::coord::{AtomApp, Coord, Var};
use super::poly::Poly;
use super::ratfunc::CanonicalForm;
use super::Rational;
use crate::error::{Error, Result};

/// Immutable expression tree. Division is a power with exponent `-1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Node>);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Const(Rational),
    Coord(Coord),
    Atom(AtomId, Expr),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, i64),
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: Rational) -> Self {
        Expr(Arc::new(Node::Const(c)))
    }

    pub fn integer(n: i64) -> Self {
        Expr::constant(Rational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Expr::integer(0)
    }

    pub fn one() -> Self {
        Expr::integer(1)
    }

    pub fn coord(c: Coord) -> Self {
        Expr(Arc::new(Node::Coord(c)))
    }

    pub fn atom(id: AtomId, arg: Expr) -> Self {
        Expr(Arc::new(Node::Atom(id, arg)))
    }

    /// Sum with trivial flattening of constant zeros.
    pub fn sum(terms: Vec<Expr>) -> Self {
        let terms: Vec<Expr> = terms.into_iter().filter(|t| !t.is_const_zero()).collect();
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr(Arc::new(Node::Add(terms))),
        }
    }

    /// Product with trivial flattening of constant ones.
    pub fn product(factors: Vec<Expr>) -> Self {
        if factors.iter().any(|f| f.is_const_zero()) {
            return Expr::zero();
        }
        let factors: Vec<Expr> = factors
            .into_iter()
            .filter(|f| !matches!(f.node(), Node::Const(c) if c.is_one()))
            .collect();
        match factors.len() {
            0 => Expr::one(),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr(Arc::new(Node::Mul(factors))),
        }
    }

    pub fn powi(&self, n: i64) -> Self {
        match n {
            0 => Expr::one(),
            1 => self.clone(),
            _ => Expr(Arc::new(Node::Pow(self.clone(), n))),
        }
    }

    fn is_const_zero(&self) -> bool {
        matches!(self.node(), Node::Const(c) if c.is_zero())
    }

    /// Reduced rational normal form.
    pub fn canonicalize(&self) -> Result<CanonicalForm> {
        match self.node() {
            Node::Const(c) => Ok(CanonicalForm::constant(c.clone())),
            Node::Coord(c) => Ok(CanonicalForm::coord(*c)),
            Node::Atom(id, arg) => {
                let arg = arg.canonicalize()?;
                Ok(CanonicalForm::from_poly(Poly::var(Var::Atom(
                    AtomApp::new(*id, arg),
                ))))
            }
            Node::Add(ts) => {
                let mut acc = CanonicalForm::zero();
                for t in ts {
                    acc = acc.add(&t.canonicalize()?);
                }
                Ok(acc)
            }
            Node::Mul(fs) => {
                let mut acc = CanonicalForm::one();
                for f in fs {
                    acc = acc.mul(&f.canonicalize()?);
                    if acc.is_zero() {
                        // remaining factors still have to be well-defined
                        for g in fs {
                            g.canonicalize()?;
                        }
                        return Ok(acc);
                    }
                }
                Ok(acc)
            }
            Node::Pow(b, n) => b.canonicalize()?.pow(*n),
        }
    }

    /// Algebraic equality, deciding via `canonicalize(a - b) == 0`.
    pub fn equals(&self, other: &Expr) -> Result<bool> {
        Ok((self.clone() - other.clone()).canonicalize()?.is_zero())
    }

    /// Partial derivative with respect to a chart coordinate.
    pub fn diff_partial(&self, v: Coord) -> Result<Expr> {
        Ok(self.canonicalize()?.partial(v).to_expr())
    }

    /// Simultaneous substitution of coordinates.
    pub fn substitute(&self, bindings: &BTreeMap<Coord, Expr>) -> Expr {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Coord(c) => bindings.get(c).cloned().unwrap_or_else(|| self.clone()),
            Node::Atom(id, arg) => Expr::atom(*id, arg.substitute(bindings)),
            Node::Add(ts) => Expr(Arc::new(Node::Add(
                ts.iter().map(|t| t.substitute(bindings)).collect(),
            ))),
            Node::Mul(fs) => Expr(Arc::new(Node::Mul(
                fs.iter().map(|f| f.substitute(bindings)).collect(),
            ))),
            Node::Pow(b, n) => Expr(Arc::new(Node::Pow(b.substitute(bindings), *n))),
        }
    }

    /// Exact value at a point. Atom values are keyed by atom name and apply
    /// to every application of that atom.
    pub fn eval_at(
        &self,
        point: &BTreeMap<Coord, Rational>,
        atom_values: &BTreeMap<String, Rational>,
    ) -> Result<Rational> {
        match self.node() {
            Node::Const(c) => Ok(c.clone()),
            Node::Coord(c) => point
                .get(c)
                .cloned()
                .ok_or_else(|| Error::Unbound(c.name())),
            Node::Atom(id, arg) => {
                arg.eval_at(point, atom_values)?;
                let name = atom_name(*id);
                atom_values.get(&name).cloned().ok_or(Error::Unbound(name))
            }
            Node::Add(ts) => ts.iter().try_fold(Rational::zero(), |acc, t| {
                Ok(acc + t.eval_at(point, atom_values)?)
            }),
            Node::Mul(fs) => fs.iter().try_fold(Rational::one(), |acc, f| {
                Ok(acc * f.eval_at(point, atom_values)?)
            }),
            Node::Pow(b, n) => {
                let v = b.eval_at(point, atom_values)?;
                if *n < 0 {
                    if v.is_zero() {
                        return Err(Error::ZeroDenominatorAtPoint);
                    }
                    Ok(num_traits::pow(v.recip(), n.unsigned_abs() as usize))
                } else {
                    Ok(num_traits::pow(v, *n as usize))
                }
            }
        }
    }

    /// Every coordinate referenced anywhere in the tree.
    pub fn coords(&self) -> std::collections::BTreeSet<Coord> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_coords(&mut out);
        out
    }

    fn collect_coords(&self, out: &mut std::collections::BTreeSet<Coord>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Coord(c) => {
                out.insert(*c);
            }
            Node::Atom(_, a) => a.collect_coords(out),
            Node::Add(xs) | Node::Mul(xs) => xs.iter().for_each(|x| x.collect_coords(out)),
            Node::Pow(b, _) => b.collect_coords(out),
        }
    }

    fn precedence(&self) -> u8 {
        match self.node() {
            Node::Add(_) => 1,
            Node::Mul(_) => 2,
            Node::Const(c) if c.is_negative() || !c.is_integer() => 2,
            Node::Pow(..) => 3,
            _ => 4,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => {
                if c.is_integer() {
                    write!(f, "{}", c.numer())
                } else {
                    write!(f, "{}/{}", c.numer(), c.denom())
                }
            }
            Node::Coord(c) => write!(f, "{c}"),
            Node::Atom(id, arg) => write!(f, "{}({arg})", atom_name(*id)),
            Node::Add(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    let s = if t.precedence() < 2 {
                        format!("({t})")
                    } else {
                        t.to_string()
                    };
                    match (i, s.strip_prefix('-')) {
                        (0, _) => f.write_str(&s)?,
                        (_, Some(rest)) => write!(f, " - {rest}")?,
                        (_, None) => write!(f, " + {s}")?,
                    }
                }
                Ok(())
            }
            Node::Mul(fs) => {
                for (i, x) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    // a negative constant after the first factor needs parens
                    if matches!(x.node(), Node::Const(c) if c.is_negative()) {
                        if i == 0 {
                            write!(f, "{x}")?;
                        } else {
                            write!(f, "({x})")?;
                        }
                    } else {
                        x.fmt_child(f, 3)?;
                    }
                }
                Ok(())
            }
            Node::Pow(b, n) => {
                b.fmt_child(f, 4)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
        }
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, -rhs])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, rhs])
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, rhs.powi(-1)])
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(-c.clone()),
            _ => Expr::product(vec![Expr::integer(-1), self]),
        }
    }
}
