//! First-order differential operators on the jet chart: application, Lie
//! bracket, prolongation, and induction from point actions on `(t, x, u)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::exprcore::{CanonicalForm, Coord, Expr, Poly, Rational, Var};
use crate::jetspace::{total_derivative, BaseVar};

/// A vector field `sum_v c_v d_v`.
///
/// Coefficients on `f`-jets of order at most `explicit_order` are taken as
/// given (absent means zero); [`VectorField::prolong`] fills in higher orders
/// by the standard recursion.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VectorField {
    coeffs: BTreeMap<Coord, CanonicalForm>,
    explicit_order: u32,
}

impl VectorField {
    pub fn new(
        coeffs: impl IntoIterator<Item = (Coord, CanonicalForm)>,
        explicit_order: u32,
    ) -> Self {
        VectorField {
            coeffs: coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
            explicit_order,
        }
    }

    /// Builds a field from `(coordinate, expression)` pairs.
    pub fn from_exprs(pairs: &[(Coord, Expr)], explicit_order: u32) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(pairs.len());
        for (c, e) in pairs {
            coeffs.push((*c, e.canonicalize()?));
        }
        Ok(VectorField::new(coeffs, explicit_order))
    }

    pub fn zero() -> Self {
        VectorField::default()
    }

    pub fn explicit_order(&self) -> u32 {
        self.explicit_order
    }

    pub fn coeff(&self, c: Coord) -> CanonicalForm {
        self.coeffs
            .get(&c)
            .cloned()
            .unwrap_or_else(CanonicalForm::zero)
    }

    pub fn coefficients(&self) -> &BTreeMap<Coord, CanonicalForm> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `X(F) = sum_v c_v dF/dv`.
    pub fn apply(&self, f: &CanonicalForm) -> CanonicalForm {
        let deps = f.coords();
        let mut acc_poly = Poly::zero();
        let mut acc = CanonicalForm::zero();
        for (v, c) in &self.coeffs {
            // phi depends on u through the chain rule in `partial`
            let touches = deps.contains(v)
                || (*v == Coord::U && deps.iter().any(|d| matches!(d, Coord::Phi(_))));
            if !touches {
                continue;
            }
            let term = c.mul(&f.partial(*v));
            if term.is_polynomial() {
                acc_poly = acc_poly.add(term.numerator());
            } else {
                acc = acc.add(&term);
            }
        }
        CanonicalForm::from_poly(acc_poly).add(&acc)
    }

    pub fn apply_expr(&self, f: &Expr) -> Result<Expr> {
        Ok(self.apply(&f.canonicalize()?).to_expr())
    }

    /// `[X, Y]` with coefficients `X(Y_v) - Y(X_v)`.
    pub fn bracket(&self, other: &VectorField) -> VectorField {
        let keys: BTreeSet<Coord> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .copied()
            .collect();
        let coeffs = keys.into_iter().map(|v| {
            let c = self
                .apply(&other.coeff(v))
                .sub(&other.apply(&self.coeff(v)));
            (v, c)
        });
        VectorField::new(coeffs, self.explicit_order.max(other.explicit_order))
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        self.combine(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.combine(other, |a, b| a.sub(b))
    }

    fn combine(
        &self,
        other: &VectorField,
        op: impl Fn(&CanonicalForm, &CanonicalForm) -> CanonicalForm,
    ) -> VectorField {
        let keys: BTreeSet<Coord> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .copied()
            .collect();
        VectorField::new(
            keys.into_iter()
                .map(|v| (v, op(&self.coeff(v), &other.coeff(v)))),
            self.explicit_order.max(other.explicit_order),
        )
    }

    pub fn scale(&self, k: &Rational) -> VectorField {
        VectorField::new(
            self.coeffs.iter().map(|(v, c)| (*v, c.scale(k))),
            self.explicit_order,
        )
    }

    /// Extends the field to all `f`-jets of order up to `order` by
    /// `zeta_{J+i} = D_i(zeta_J) - sum_j f_{J+j} D_i(xi^j)` with
    /// `zeta_0 = eta` (the `f`-coefficient) and `j` ranging over `u, sigma`.
    /// Mixed jets are reached from their `u`-parent.
    pub fn prolong(&self, order: u32) -> VectorField {
        if order <= self.explicit_order {
            return self.truncate(order);
        }
        let xi_u = self.coeff(Coord::U);
        let xi_s = self.coeff(Coord::Sigma);
        let d_xi: BTreeMap<BaseVar, (CanonicalForm, CanonicalForm)> = [BaseVar::U, BaseVar::Sigma]
            .into_iter()
            .map(|i| (i, (total_derivative(&xi_u, i), total_derivative(&xi_s, i))))
            .collect();
        let mut coeffs = self.coeffs.clone();
        for n in (self.explicit_order + 1)..=order {
            for a in (0..=n).rev() {
                let b = n - a;
                let (parent, i) = if a > 0 {
                    ((a as u8 - 1, b as u8), BaseVar::U)
                } else {
                    ((0u8, b as u8 - 1), BaseVar::Sigma)
                };
                let zeta_parent = coeffs
                    .get(&Coord::Jet(parent.0, parent.1))
                    .cloned()
                    .unwrap_or_default();
                let (dxu, dxs) = &d_xi[&i];
                let mut z = total_derivative(&zeta_parent, i);
                if !dxu.is_zero() {
                    z = z.sub(&CanonicalForm::coord(BaseVar::U.raise(parent)).mul(dxu));
                }
                if !dxs.is_zero() {
                    z = z.sub(&CanonicalForm::coord(BaseVar::Sigma.raise(parent)).mul(dxs));
                }
                if !z.is_zero() {
                    coeffs.insert(Coord::Jet(a as u8, b as u8), z);
                }
            }
        }
        VectorField {
            coeffs,
            explicit_order: order,
        }
    }

    /// Drops coefficients on jets above `order`.
    pub fn truncate(&self, order: u32) -> VectorField {
        VectorField {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(c, _)| c.jet_order().is_none_or(|o| o <= order))
                .map(|(c, v)| (*c, v.clone()))
                .collect(),
            explicit_order: self.explicit_order.min(order),
        }
    }

    /// Coefficients as canonical strings, keyed by coordinate name.
    pub fn to_string_map(&self) -> BTreeMap<String, String> {
        self.coeffs
            .iter()
            .map(|(c, v)| (c.name(), v.to_string()))
            .collect()
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (i, (c, v)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if v.is_one() {
                write!(f, "d_{c}")?;
            } else {
                write!(f, "({v})*d_{c}")?;
            }
        }
        Ok(())
    }
}

/// Infinitesimal point transformation on `(t, x, u)`, optionally with an
/// explicit first prolongation on `(u_t, u_x)`.
#[derive(Clone, Debug)]
pub struct PointAction {
    pub xi_t: Expr,
    pub xi_x: Expr,
    pub eta_u: Expr,
    pub first_prolongation: Option<(Expr, Expr)>,
}

impl PointAction {
    pub fn new(xi_t: Expr, xi_x: Expr, eta_u: Expr) -> Self {
        PointAction {
            xi_t,
            xi_x,
            eta_u,
            first_prolongation: None,
        }
    }
}

fn check_support(e: &CanonicalForm, allowed: &[Coord], what: &str) -> Result<()> {
    for c in e.coords() {
        if !(allowed.contains(&c) || matches!(c, Coord::Phi(_))) {
            return Err(Error::InvalidArgument(format!("{what} depends on `{c}`")));
        }
    }
    Ok(())
}

fn d_t(g: &CanonicalForm) -> CanonicalForm {
    total_t_or_x(g, Coord::T, Coord::Ut, Coord::Utt, Coord::Utx)
}

fn d_x(g: &CanonicalForm) -> CanonicalForm {
    total_t_or_x(g, Coord::X, Coord::Ux, Coord::Utx, Coord::Uxx)
}

// Total derivative in the (t, x, u)-jet for expressions of order <= 1.
fn total_t_or_x(
    g: &CanonicalForm,
    base: Coord,
    u_base: Coord,
    from_ut: Coord,
    from_ux: Coord,
) -> CanonicalForm {
    g.partial(base)
        .add(&CanonicalForm::coord(u_base).mul(&g.partial(Coord::U)))
        .add(&CanonicalForm::coord(from_ut).mul(&g.partial(Coord::Ut)))
        .add(&CanonicalForm::coord(from_ux).mul(&g.partial(Coord::Ux)))
}

/// Replaces `u_t^2` by `sigma + u_x^2` until `u_t` appears at most linearly.
fn reduce_ut_square(p: &Poly) -> Poly {
    let ut = Var::Coord(Coord::Ut);
    let rel = Poly::var(Var::Coord(Coord::Sigma)).add(&Poly::var(Var::Coord(Coord::Ux)).pow(2));
    let mut out = Poly::zero();
    for (e, c) in p.coefficients_in(&ut) {
        let term = c
            .mul(&rel.pow(e / 2))
            .mul(&Poly::var(ut.clone()).pow(e % 2));
        out = out.add(&term);
    }
    out
}

/// Derives the generator induced on `(t, x, u, sigma, f)` by a point action.
///
/// The second prolongation on `(u_t, u_x, u_tt, u_xx)` gives
/// `d sigma = 2 u_t zeta^t - 2 u_x zeta^x` and `d f = zeta^tt - zeta^xx`;
/// `u_tt` is eliminated first through the equation (`u_tt = f + u_xx`) and
/// then `u_t^2 = sigma + u_x^2`. The result must not depend on any `u`-jet
/// coordinate, otherwise the action does not project to the class.
pub fn induce_from_point_action(a: &PointAction) -> Result<VectorField> {
    let base = [Coord::T, Coord::X, Coord::U];
    let xi_t = a.xi_t.canonicalize()?;
    let xi_x = a.xi_x.canonicalize()?;
    let eta = a.eta_u.canonicalize()?;
    for (e, what) in [(&xi_t, "xi_t"), (&xi_x, "xi_x"), (&eta, "eta_u")] {
        check_support(e, &base, what)?;
    }
    let ut = CanonicalForm::coord(Coord::Ut);
    let ux = CanonicalForm::coord(Coord::Ux);

    let (zeta_t, zeta_x) = match &a.first_prolongation {
        Some((zt, zx)) => {
            let (zt, zx) = (zt.canonicalize()?, zx.canonicalize()?);
            let first = [Coord::T, Coord::X, Coord::U, Coord::Ut, Coord::Ux];
            check_support(&zt, &first, "zeta_t")?;
            check_support(&zx, &first, "zeta_x")?;
            (zt, zx)
        }
        None => (
            d_t(&eta)
                .sub(&ut.mul(&d_t(&xi_t)))
                .sub(&ux.mul(&d_t(&xi_x))),
            d_x(&eta)
                .sub(&ut.mul(&d_x(&xi_t)))
                .sub(&ux.mul(&d_x(&xi_x))),
        ),
    };
    let utt = CanonicalForm::coord(Coord::Utt);
    let utx = CanonicalForm::coord(Coord::Utx);
    let uxx = CanonicalForm::coord(Coord::Uxx);
    let zeta_tt = d_t(&zeta_t)
        .sub(&utt.mul(&d_t(&xi_t)))
        .sub(&utx.mul(&d_t(&xi_x)));
    let zeta_xx = d_x(&zeta_x)
        .sub(&utx.mul(&d_x(&xi_t)))
        .sub(&uxx.mul(&d_x(&xi_x)));

    let two = CanonicalForm::integer(2);
    let d_sigma = two.mul(&ut.mul(&zeta_t).sub(&ux.mul(&zeta_x)));
    let d_f = zeta_tt.sub(&zeta_xx);

    let eliminate = |e: &CanonicalForm| -> Result<CanonicalForm> {
        let mut b = BTreeMap::new();
        b.insert(
            Coord::Utt,
            CanonicalForm::coord(Coord::F).add(&CanonicalForm::coord(Coord::Uxx)),
        );
        let e = e.substitute(&b)?;
        CanonicalForm::from_parts(
            reduce_ut_square(e.numerator()),
            reduce_ut_square(e.denominator()),
        )
    };
    let d_sigma = eliminate(&d_sigma)?;
    let d_f = eliminate(&d_f)?;
    for e in [&d_sigma, &d_f] {
        for c in [Coord::Ut, Coord::Ux, Coord::Utt, Coord::Utx, Coord::Uxx] {
            if !e.partial(c).is_zero() {
                return Err(Error::NotProjectable(c.name()));
            }
        }
    }
    Ok(VectorField::new(
        [
            (Coord::T, xi_t),
            (Coord::X, xi_x),
            (Coord::U, eta),
            (Coord::Sigma, d_sigma),
            (Coord::F, d_f),
        ],
        0,
    ))
}
