//! Jet space of `f` over the base `(u, sigma)` with passengers `(t, x)`.

use crate::error::{Error, Result};
use crate::exprcore::{CanonicalForm, Chart, Coord, Expr};

/// Base variable of a total derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseVar {
    U,
    Sigma,
}

impl BaseVar {
    pub fn coord(self) -> Coord {
        match self {
            BaseVar::U => Coord::U,
            BaseVar::Sigma => Coord::Sigma,
        }
    }

    /// The jet coordinate `f_{J+self}`.
    pub fn raise(self, jet: (u8, u8)) -> Coord {
        match self {
            BaseVar::U => Coord::Jet(jet.0 + 1, jet.1),
            BaseVar::Sigma => Coord::Jet(jet.0, jet.1 + 1),
        }
    }
}

/// Chart of order `L`: `t, x, u, sigma, f` and all `f_J` with `|J| <= L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct JetSpace {
    order: u32,
}

impl JetSpace {
    pub fn new(order: u32) -> Self {
        JetSpace { order }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coordinates(&self) -> Vec<Coord> {
        enumerate_coordinates(self.order)
    }

    /// `4 + (L+1)(L+2)/2`.
    pub fn coordinate_count(&self) -> usize {
        let l = self.order as usize;
        4 + (l + 1) * (l + 2) / 2
    }

    pub fn chart(&self) -> Chart {
        Chart::jet(self.order)
    }

    /// Jet coordinates `f_J` with `|J| <= order`, in chart order.
    pub fn jets(&self) -> Vec<Coord> {
        self.coordinates()
            .into_iter()
            .filter(|c| c.jet_order().is_some())
            .collect()
    }

    /// `D_v e`, rejecting expressions whose derivative would leave the chart.
    pub fn total_derivative(&self, e: &Expr, base: BaseVar) -> Result<Expr> {
        let c = e.canonicalize()?;
        if let Some(top) = c
            .coords()
            .into_iter()
            .find(|c| c.jet_order().is_some_and(|o| o >= self.order))
        {
            return Err(Error::OrderOverflow(top.name()));
        }
        Ok(total_derivative(&c, base).to_expr())
    }
}

/// Ordered coordinates of the order-`L` chart.
pub fn enumerate_coordinates(order: u32) -> Vec<Coord> {
    Chart::jet(order).coords().collect()
}

/// `D_v e = d_v e + sum_J f_{J+v} d_{f_J} e`, summing over the jets present
/// in `e`. Passengers `t, x` have zero total derivative.
pub fn total_derivative(e: &CanonicalForm, base: BaseVar) -> CanonicalForm {
    let mut out = e.partial(base.coord());
    for c in e.coords() {
        if let Coord::Jet(a, b) = c {
            let d = e.partial(c);
            if !d.is_zero() {
                out = out.add(&d.mul(&CanonicalForm::coord(base.raise((a, b)))));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprcore::parse;

    fn p(s: &str) -> Expr {
        parse(s, &Chart::jet(3)).unwrap()
    }

    #[test]
    fn enumerate_examples() {
        let names =
            |l| -> Vec<String> { enumerate_coordinates(l).iter().map(|c| c.name()).collect() };
        assert_eq!(names(1), ["t", "x", "u", "sigma", "f", "f_u", "f_sigma"]);
        let two = names(2);
        assert_eq!(two.len(), 10);
        assert_eq!(&two[7..], ["f_uu", "f_usigma", "f_sigmasigma"]);
        assert_eq!(names(0), ["t", "x", "u", "sigma", "f"]);
        for l in 0..6 {
            assert_eq!(
                JetSpace::new(l).coordinates().len(),
                JetSpace::new(l).coordinate_count()
            );
        }
    }

    #[test]
    fn total_derivative_examples() {
        let s = JetSpace::new(2);
        let d = |e: &str, v| s.total_derivative(&p(e), v).unwrap();
        assert!(d("f", BaseVar::Sigma).equals(&p("f_sigma")).unwrap());
        assert!(d("sigma*f", BaseVar::U).equals(&p("sigma*f_u")).unwrap());
        assert!(d("u*f_sigma", BaseVar::Sigma)
            .equals(&p("u*f_sigmasigma"))
            .unwrap());
        assert!(d("t*x", BaseVar::U).equals(&p("0")).unwrap());
        assert!(d("exp(u)*f", BaseVar::U)
            .equals(&p("exp(u)*f + exp(u)*f_u"))
            .unwrap());
    }

    #[test]
    fn order_overflow() {
        let s = JetSpace::new(1);
        assert_eq!(
            s.total_derivative(&p("f_sigma"), BaseVar::U),
            Err(Error::OrderOverflow("f_sigma".into()))
        );
        assert!(s.total_derivative(&p("f*u"), BaseVar::U).is_ok());
    }

    #[test]
    fn total_derivatives_commute() {
        for e in [
            "f*f_u",
            "sigma^2*f/(u + f)",
            "exp(sigma)*f_sigma - u*f",
            "f_u*f_sigma/(sigma*f_sigma - f)",
        ] {
            let c = p(e).canonicalize().unwrap();
            let us = total_derivative(&total_derivative(&c, BaseVar::U), BaseVar::Sigma);
            let su = total_derivative(&total_derivative(&c, BaseVar::Sigma), BaseVar::U);
            assert_eq!(us, su, "{e}");
        }
    }

    #[test]
    fn total_derivative_is_derivation() {
        let a = p("f*u + f_sigma").canonicalize().unwrap();
        let b = p("sigma/(f - u)").canonicalize().unwrap();
        for v in [BaseVar::U, BaseVar::Sigma] {
            let lhs = total_derivative(&a.mul(&b), v);
            let rhs = total_derivative(&a, v)
                .mul(&b)
                .add(&a.mul(&total_derivative(&b, v)));
            assert_eq!(lhs, rhs);
        }
    }
}
