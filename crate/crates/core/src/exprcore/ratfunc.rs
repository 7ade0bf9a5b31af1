use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use super::atom::atom_rule;
use super::coord::{AtomApp, Coord, Var};
use super::expr::Expr;
use super::poly::{gcd, Poly};
use super::Rational;
use crate::error::{Error, Result};

/// Reduced quotient of two polynomials.
///
/// The numerator and denominator are coprime, the denominator has leading
/// coefficient one, and zero is `0/1`. Two canonical forms are equal exactly
/// when the rational functions they denote are equal, treating atom
/// applications as independent indeterminates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalForm {
    num: Poly,
    den: Poly,
}

impl Default for CanonicalForm {
    fn default() -> Self {
        CanonicalForm::zero()
    }
}

impl CanonicalForm {
    pub fn zero() -> Self {
        CanonicalForm {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        CanonicalForm::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        CanonicalForm {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn integer(n: i64) -> Self {
        CanonicalForm::constant(Rational::from_integer(n.into()))
    }

    pub fn coord(c: Coord) -> Self {
        CanonicalForm::from_poly(Poly::var(Var::Coord(c)))
    }

    pub fn from_poly(p: Poly) -> Self {
        CanonicalForm {
            num: p,
            den: Poly::one(),
        }
    }

    /// Builds `num/den`, reducing by the gcd.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return CanonicalForm::zero();
        }
        if let Some(c) = den.constant_value() {
            return CanonicalForm::from_poly(num.scale(&c.recip()));
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.exact_div(&g).unwrap(), den.exact_div(&g).unwrap())
        };
        Self::normalize(num, den)
    }

    fn normalize(num: Poly, den: Poly) -> Self {
        let lc = den.leading_coeff();
        if lc.is_one() {
            CanonicalForm { num, den }
        } else {
            let inv = lc.recip();
            CanonicalForm {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v
    }

    /// Chart coordinates this form depends on, including those inside atom
    /// arguments.
    pub fn coords(&self) -> BTreeSet<Coord> {
        let mut out = BTreeSet::new();
        for v in self.vars() {
            match v {
                Var::Coord(c) => {
                    out.insert(c);
                }
                Var::Atom(a) => out.extend(a.arg.coords()),
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            let num = self.num.add(&other.num);
            if self.den.is_one() {
                return CanonicalForm::from_poly(num);
            }
            return Self::reduce(num, self.den.clone());
        }
        if self.den.is_one() {
            return Self::from_parts_unchecked(
                self.num.mul(&other.den).add(&other.num),
                other.den.clone(),
            );
        }
        if other.den.is_one() {
            return Self::from_parts_unchecked(
                self.num.add(&other.num.mul(&self.den)),
                self.den.clone(),
            );
        }
        let g = gcd(&self.den, &other.den);
        let b = self.den.exact_div(&g).unwrap();
        let d = other.den.exact_div(&g).unwrap();
        let num = self.num.mul(&d).add(&other.num.mul(&b));
        let den = self.den.mul(&d);
        Self::reduce(num, den)
    }

    // num/den where den is already coprime to the non-polynomial part
    fn from_parts_unchecked(num: Poly, den: Poly) -> Self {
        // p + a/b with gcd(a, b) = 1 stays reduced
        CanonicalForm { num, den }.renormalized()
    }

    fn renormalized(self) -> Self {
        if self.num.is_zero() {
            return CanonicalForm::zero();
        }
        Self::normalize(self.num, self.den)
    }

    pub fn neg(&self) -> Self {
        CanonicalForm {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return CanonicalForm::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return CanonicalForm::from_poly(self.num.mul(&other.num));
        }
        let g1 = gcd(&self.num, &other.den);
        let g2 = gcd(&other.num, &self.den);
        let a = self.num.exact_div(&g1).unwrap();
        let d = other.den.exact_div(&g1).unwrap();
        let c = other.num.exact_div(&g2).unwrap();
        let b = self.den.exact_div(&g2).unwrap();
        Self::normalize(a.mul(&c), b.mul(&d))
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return CanonicalForm::zero();
        }
        CanonicalForm {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalize(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn pow(&self, n: i64) -> Result<Self> {
        if n < 0 {
            return self.recip()?.pow(-n);
        }
        let n =
            u32::try_from(n).map_err(|_| Error::InvalidArgument("exponent too large".into()))?;
        if n == 0 {
            return Ok(CanonicalForm::one());
        }
        Ok(Self::normalize(self.num.pow(n), self.den.pow(n)))
    }

    /// Exact polynomial quotient `self / other` when it has no denominator.
    pub fn polynomial_quotient(&self, other: &Self) -> Result<Option<Self>> {
        let q = self.div(other)?;
        Ok(if q.is_polynomial() { Some(q) } else { None })
    }

    /// Partial derivative with respect to a coordinate.
    ///
    /// Coordinates are independent except that `phi_{u^n}` depends on `u`
    /// (its `u`-derivative is `phi_{u^(n+1)}`); atoms differentiate through
    /// their registered rule and the chain rule.
    pub fn partial(&self, v: Coord) -> Self {
        let dn = poly_partial(&self.num, v);
        if self.den.is_one() {
            return dn;
        }
        let dd = poly_partial(&self.den, v);
        if dd.is_zero() {
            return dn.mul(&CanonicalForm::from_parts_unchecked(
                Poly::one(),
                self.den.clone(),
            ));
        }
        // (n'd - n d') / d^2
        let den = CanonicalForm::from_parts_unchecked(Poly::one(), self.den.clone());
        let own = CanonicalForm {
            num: self.num.clone(),
            den: self.den.clone(),
        };
        dn.mul(&den).sub(&own.mul(&dd).mul(&den))
    }

    /// Simultaneous substitution of coordinates.
    pub fn substitute(&self, bindings: &BTreeMap<Coord, CanonicalForm>) -> Result<Self> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        let mut cache = HashMap::new();
        let n = subst_poly(&self.num, bindings, &mut cache)?;
        if self.den.is_one() {
            return Ok(n);
        }
        let d = subst_poly(&self.den, bindings, &mut cache)?;
        n.div(&d)
    }

    /// Exact value at a point. Atom applications are looked up by their
    /// printed form, e.g. `exp(u)`.
    pub fn eval(
        &self,
        point: &BTreeMap<Coord, Rational>,
        atoms: &BTreeMap<String, Rational>,
    ) -> Result<Rational> {
        let mut missing = None;
        let mut lookup = |v: &Var| -> Option<Rational> {
            let r = match v {
                Var::Coord(c) => point.get(c).cloned(),
                Var::Atom(a) => atoms.get(&a.to_string()).cloned(),
            };
            if r.is_none() {
                missing = Some(v.to_string());
            }
            r
        };
        let n = self.num.eval(&mut lookup);
        let d = if n.is_some() {
            self.den.eval(&mut lookup)
        } else {
            None
        };
        match (n, d) {
            (Some(n), Some(d)) => {
                if d.is_zero() {
                    Err(Error::ZeroDenominatorAtPoint)
                } else {
                    Ok(n / d)
                }
            }
            _ => Err(Error::Unbound(missing.unwrap_or_default())),
        }
    }

    pub fn to_expr(&self) -> Expr {
        let n = poly_to_expr(&self.num);
        if self.den.is_one() {
            n
        } else {
            n * poly_to_expr(&self.den).powi(-1)
        }
    }
}

fn poly_to_expr(p: &Poly) -> Expr {
    let terms: Vec<Expr> = p
        .terms()
        .rev()
        .map(|(m, c)| {
            let mut factors = vec![Expr::constant(c.clone())];
            for (v, e) in m.factors() {
                let base = match v {
                    Var::Coord(c) => Expr::coord(*c),
                    Var::Atom(a) => Expr::atom(a.id, a.arg.to_expr()),
                };
                factors.push(if *e == 1 { base } else { base.powi(*e as i64) });
            }
            Expr::product(factors)
        })
        .collect();
    Expr::sum(terms)
}

/// Derivative of an indeterminate with respect to a chart coordinate.
fn var_partial(var: &Var, v: Coord) -> Option<CanonicalForm> {
    match var {
        Var::Coord(c) if *c == v => Some(CanonicalForm::one()),
        Var::Coord(Coord::Phi(n)) if v == Coord::U => Some(CanonicalForm::coord(Coord::Phi(n + 1))),
        Var::Coord(_) => None,
        Var::Atom(app) => {
            let inner = app.arg.partial(v);
            if inner.is_zero() {
                return None;
            }
            let rule = atom_rule(app.id)
                .canonicalize()
                .expect("atom rules are well-formed");
            let mut b = BTreeMap::new();
            b.insert(Coord::Slot, (*app.arg).clone());
            let outer = rule
                .substitute(&b)
                .expect("atom rule has no pole at a generic argument");
            Some(outer.mul(&inner))
        }
    }
}

fn poly_partial(p: &Poly, v: Coord) -> CanonicalForm {
    let mut poly_part = Poly::zero();
    let mut other = CanonicalForm::zero();
    for var in p.vars() {
        let Some(dv) = var_partial(&var, v) else {
            continue;
        };
        let fd = p.formal_derivative(&var);
        if dv.is_polynomial() {
            poly_part = poly_part.add(&fd.mul(dv.numerator()));
        } else {
            other = other.add(&CanonicalForm::from_poly(fd).mul(&dv));
        }
    }
    CanonicalForm::from_poly(poly_part).add(&other)
}

fn subst_poly(
    p: &Poly,
    bindings: &BTreeMap<Coord, CanonicalForm>,
    cache: &mut HashMap<Var, CanonicalForm>,
) -> Result<CanonicalForm> {
    // Fast path: all images polynomial and no atoms to rebuild.
    let mut acc_poly = Poly::zero();
    let mut acc = CanonicalForm::zero();
    for (m, c) in p.terms() {
        let mut term = CanonicalForm::constant(c.clone());
        for (v, e) in m.factors() {
            let image = match cache.get(v) {
                Some(x) => x.clone(),
                None => {
                    let x = match v {
                        Var::Coord(co) => bindings
                            .get(co)
                            .cloned()
                            .unwrap_or_else(|| CanonicalForm::coord(*co)),
                        Var::Atom(app) => {
                            let arg = app.arg.substitute(bindings)?;
                            CanonicalForm::from_poly(Poly::var(Var::Atom(AtomApp::new(
                                app.id, arg,
                            ))))
                        }
                    };
                    cache.insert(v.clone(), x.clone());
                    x
                }
            };
            term = term.mul(&image.pow(*e as i64)?);
        }
        if term.is_polynomial() {
            acc_poly = acc_poly.add(term.numerator());
        } else {
            acc = acc.add(&term);
        }
    }
    Ok(CanonicalForm::from_poly(acc_poly).add(&acc))
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        let simple_num = self.num.len() == 1;
        let simple_den = self.den.len() == 1
            && self
                .den
                .leading()
                .is_some_and(|(m, _)| m.factors().len() <= 1);
        match (simple_num, simple_den) {
            (true, true) => write!(f, "{}/{}", self.num, self.den),
            (true, false) => write!(f, "{}/({})", self.num, self.den),
            (false, true) => write!(f, "({})/{}", self.num, self.den),
            (false, false) => write!(f, "({})/({})", self.num, self.den),
        }
    }
}
