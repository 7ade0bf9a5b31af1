//! Invariant signatures of concrete equations `u_tt - u_xx = f(u, sigma)`
//! and the equivalence criterion built on them.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exprcore::{parse, ratio, CanonicalForm, Chart, Coord, Expr, Rational};
use crate::invariants::{R, R1_CORRECTED, R2};

fn equation_chart() -> Chart {
    Chart::new([Coord::U, Coord::Sigma])
}

fn u_chart() -> Chart {
    Chart::new([Coord::U])
}

/// An equation of the class, given by its right-hand side `f(u, sigma)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquationInstance {
    f: CanonicalForm,
}

impl EquationInstance {
    pub fn new(f: &Expr) -> Result<Self> {
        let c = f.canonicalize()?;
        if let Some(bad) = c
            .coords()
            .into_iter()
            .find(|v| !matches!(v, Coord::U | Coord::Sigma))
        {
            return Err(Error::InvalidArgument(format!(
                "right-hand side may depend on u and sigma only, found {bad}"
            )));
        }
        Ok(EquationInstance { f: c })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(&parse(text, &equation_chart())?)
    }

    pub fn from_form(f: CanonicalForm) -> Result<Self> {
        Self::new(&f.to_expr())
    }

    pub fn f(&self) -> &CanonicalForm {
        &self.f
    }

    /// Bindings of `f` and its jets up to order 2 for this right-hand side.
    fn jet_bindings(&self) -> BTreeMap<Coord, CanonicalForm> {
        let mut out = BTreeMap::new();
        for order in 0..=2u8 {
            for a in (0..=order).rev() {
                let b = order - a;
                let mut d = self.f.clone();
                for _ in 0..a {
                    d = d.partial(Coord::U);
                }
                for _ in 0..b {
                    d = d.partial(Coord::Sigma);
                }
                out.insert(Coord::Jet(a, b), d);
            }
        }
        out
    }

    /// Value of a jet-space expression on this equation.
    pub fn evaluate(&self, e: &str) -> Result<CanonicalForm> {
        parse(e, &Chart::jet(2))?
            .canonicalize()?
            .substitute(&self.jet_bindings())
    }
}

impl std::fmt::Display for EquationInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.f.fmt(f)
    }
}

/// `(rho1, rho2)`, the values of the corrected `R1` and of `R2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub rho: Option<(CanonicalForm, CanonicalForm)>,
}

impl Signature {
    pub fn degenerate(&self) -> bool {
        self.rho.is_none()
    }

    pub fn rho1(&self) -> Option<&CanonicalForm> {
        self.rho.as_ref().map(|r| &r.0)
    }

    pub fn rho2(&self) -> Option<&CanonicalForm> {
        self.rho.as_ref().map(|r| &r.1)
    }

    /// Short stable hash of the canonical signature strings.
    pub fn class_id(&self) -> Option<String> {
        let (a, b) = self.rho.as_ref()?;
        let digest = Sha256::digest(format!("{a};{b}").as_bytes());
        Some(digest.iter().take(6).map(|x| format!("{x:02x}")).collect())
    }
}

pub fn signature_of(eq: &EquationInstance) -> Result<Signature> {
    if eq.evaluate(R)?.is_zero() {
        return Ok(Signature { rho: None });
    }
    Ok(Signature {
        rho: Some((eq.evaluate(R1_CORRECTED)?, eq.evaluate(R2)?)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    EquivalentPerCriterion,
    NotEquivalent,
    BothDegenerate,
    MixedDegenerate,
}

/// Literal criterion: equal signatures at identical `(u, sigma)`.
pub fn check_equivalence(a: &EquationInstance, b: &EquationInstance) -> Result<Verdict> {
    let (sa, sb) = (signature_of(a)?, signature_of(b)?);
    Ok(match (&sa.rho, &sb.rho) {
        (None, None) => Verdict::BothDegenerate,
        (None, _) | (_, None) => Verdict::MixedDegenerate,
        (Some(x), Some(y)) if x == y => Verdict::EquivalentPerCriterion,
        _ => Verdict::NotEquivalent,
    })
}

/// `u' = Phi(u)` composed with the dilation `(t, x) -> (t, x)/sqrt(c)`,
/// which scales `sigma` by `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteTransformation {
    phi: CanonicalForm,
    phi_inverse: CanonicalForm,
    dilation: Rational,
}

impl FiniteTransformation {
    /// Verifies that the two maps are mutually inverse and `c > 0`.
    pub fn new(phi: &Expr, phi_inverse: &Expr, dilation: Rational) -> Result<Self> {
        let phi = phi.canonicalize()?;
        let phi_inverse = phi_inverse.canonicalize()?;
        for (name, e) in [("phi", &phi), ("phi_inverse", &phi_inverse)] {
            if e.coords().into_iter().any(|v| v != Coord::U) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must depend on u only"
                )));
            }
        }
        if !dilation.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "dilation must be positive, got {dilation}"
            )));
        }
        let u = CanonicalForm::coord(Coord::U);
        let compose = |outer: &CanonicalForm, inner: &CanonicalForm| {
            outer.substitute(&BTreeMap::from([(Coord::U, inner.clone())]))
        };
        if compose(&phi, &phi_inverse)? != u || compose(&phi_inverse, &phi)? != u {
            return Err(Error::NonInvertible(format!(
                "{phi_inverse} is not the inverse of {phi}"
            )));
        }
        Ok(FiniteTransformation {
            phi,
            phi_inverse,
            dilation,
        })
    }

    pub fn parse(phi: &str, phi_inverse: &str, dilation: Rational) -> Result<Self> {
        Self::new(
            &parse(phi, &u_chart())?,
            &parse(phi_inverse, &u_chart())?,
            dilation,
        )
    }

    /// `Phi(u) = a u + b`.
    pub fn affine(a: Rational, b: Rational, dilation: Rational) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::NonInvertible("a*u + b with a = 0".into()));
        }
        let u = CanonicalForm::coord(Coord::U);
        let phi = u.scale(&a).add(&CanonicalForm::constant(b.clone()));
        let inv = u.sub(&CanonicalForm::constant(b)).scale(&a.recip());
        Self::new(&phi.to_expr(), &inv.to_expr(), dilation)
    }

    pub fn phi(&self) -> &CanonicalForm {
        &self.phi
    }

    pub fn phi_inverse(&self) -> &CanonicalForm {
        &self.phi_inverse
    }

    pub fn dilation(&self) -> &Rational {
        &self.dilation
    }

    /// `(u, sigma) -> (Phi^{-1}(u), sigma/(c Phi'(Phi^{-1}(u))^2))`: the point
    /// of the original equation that lands on `(u, sigma)`.
    pub fn pullback_point(&self) -> Result<BTreeMap<Coord, CanonicalForm>> {
        let at_w = BTreeMap::from([(Coord::U, self.phi_inverse.clone())]);
        let d1 = self.phi.partial(Coord::U).substitute(&at_w)?;
        if d1.is_zero() {
            return Err(Error::NonInvertible(format!(
                "derivative of {} vanishes",
                self.phi
            )));
        }
        let s = CanonicalForm::coord(Coord::Sigma).div(&d1.mul(&d1).scale(&self.dilation))?;
        Ok(BTreeMap::from([
            (Coord::U, self.phi_inverse.clone()),
            (Coord::Sigma, s),
        ]))
    }
}

/// Right-hand side of the transformed equation:
/// `c [Phi'(w) f(w, s) + Phi''(w) s]` with `w = Phi^{-1}(u)` and
/// `s = sigma/(c Phi'(w)^2)`.
pub fn apply_finite_transformation(
    eq: &EquationInstance,
    t: &FiniteTransformation,
) -> Result<EquationInstance> {
    let at = t.pullback_point()?;
    let at_w = BTreeMap::from([(Coord::U, t.phi_inverse.clone())]);
    let d1 = t.phi.partial(Coord::U);
    let d2 = d1.partial(Coord::U).substitute(&at_w)?;
    let d1 = d1.substitute(&at_w)?;
    let s = &at[&Coord::Sigma];
    let f = eq.f.substitute(&at)?;
    let out = d1.mul(&f).add(&d2.mul(s)).scale(&t.dilation);
    EquationInstance::from_form(out)
}

/// `(R1(f) - rho1, R2(f) - rho2)` for the corrected `R1`.
pub fn pde_residual(
    eq: &EquationInstance,
    rho1: &Expr,
    rho2: &Expr,
) -> Result<(CanonicalForm, CanonicalForm)> {
    let sig = signature_of(eq)?;
    let (r1, r2) = sig.rho.ok_or(Error::Degenerate)?;
    Ok((r1.sub(&rho1.canonicalize()?), r2.sub(&rho2.canonicalize()?)))
}

/// The transformations tried by [`orbit_search`]: affine `Phi` and rational
/// dilations on a small fixed grid.
pub fn orbit_grid() -> Vec<FiniteTransformation> {
    let scales: Vec<Rational> = [
        (1, 1),
        (-1, 1),
        (2, 1),
        (-2, 1),
        (1, 2),
        (-1, 2),
        (3, 1),
        (-3, 1),
        (1, 3),
        (-1, 3),
    ]
    .iter()
    .map(|&(p, q)| ratio(p, q))
    .collect();
    let shifts: Vec<Rational> = (-2..=2).map(|b| ratio(b, 1)).collect();
    let dilations: Vec<Rational> = [(1, 1), (2, 1), (1, 2), (3, 1), (1, 3), (4, 1), (1, 4)]
        .iter()
        .map(|&(p, q)| ratio(p, q))
        .collect();
    let mut out = Vec::new();
    for a in &scales {
        for b in &shifts {
            for c in &dilations {
                out.push(
                    FiniteTransformation::affine(a.clone(), b.clone(), c.clone())
                        .expect("grid entries are invertible"),
                );
            }
        }
    }
    out
}

/// Heuristic orbit-aware check: the first grid transformation taking `a` to
/// an equation with the same signature as `b`. A miss is inconclusive.
pub fn orbit_search(
    a: &EquationInstance,
    b: &EquationInstance,
) -> Result<Option<FiniteTransformation>> {
    let target = signature_of(b)?;
    if target.degenerate() {
        return Ok(None);
    }
    for t in orbit_grid() {
        if signature_of(&apply_finite_transformation(a, &t)?)? == target {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassifiedEquation {
    pub input: String,
    pub degenerate: bool,
    pub rho1: Option<String>,
    pub rho2: Option<String>,
    pub class_id: Option<String>,
}

/// Signatures of a corpus with one right-hand side per line. Blank lines and
/// lines starting with `#` are skipped.
pub fn classify_corpus(text: &str) -> Result<Vec<ClassifiedEquation>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let eq = EquationInstance::parse(line)
            .map_err(|e| Error::InvalidArgument(format!("line {}: {e}", i + 1)))?;
        let sig = signature_of(&eq)?;
        out.push(ClassifiedEquation {
            input: line.to_string(),
            degenerate: sig.degenerate(),
            rho1: sig.rho1().map(|r| r.to_string()),
            rho2: sig.rho2().map(|r| r.to_string()),
            class_id: sig.class_id(),
        });
    }
    Ok(out)
}
