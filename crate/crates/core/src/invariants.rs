//! Relative and absolute differential invariants of the equivalence algebra.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;

use crate::eqalgebra::{
    build_generators, coefficient_rows, sample_form_matrices, Generator, GeneratorSet,
    SamplingConfig, Source,
};
use crate::error::{Error, Result};
use crate::exprcore::{parse, parse_with, CanonicalForm, Chart, Coord, Expr, Rational};
use crate::linalg;
use crate::vfields::VectorField;

/// `R = sigma f_sigma - f`.
pub const R: &str = "sigma*f_sigma - f";
/// First second-order invariant as printed.
pub const R1_PRINTED: &str = "sigma*f_sigmasigma/(sigma*f_sigma - f)";
/// First second-order invariant with the `sigma^2` factor that makes it absolute.
pub const R1_CORRECTED: &str = "sigma^2*f_sigmasigma/(sigma*f_sigma - f)";
/// Second second-order invariant as printed.
pub const R2: &str =
    "(-2*sigma^2*f*f_sigmasigma + sigma*(f_u - sigma*f_usigma) + f*(sigma*f_sigma - f))/(sigma*f_sigma - f)^2";

/// Named invariants usable as macros in user expressions:
/// `R`, `R1_printed`, `R1_corrected`, `R2`.
pub fn standard_definitions() -> BTreeMap<String, Expr> {
    let chart = Chart::jet(2);
    [
        ("R", R),
        ("R1_printed", R1_PRINTED),
        ("R1_corrected", R1_CORRECTED),
        ("R2", R2),
    ]
    .into_iter()
    .map(|(k, v)| {
        (
            k.to_string(),
            parse(v, &chart).expect("built-in invariant parses"),
        )
    })
    .collect()
}

/// Parses an expression over the order-`order` chart with the standard
/// invariant names available.
pub fn parse_candidate(text: &str, order: u32) -> Result<Expr> {
    parse_with(text, &Chart::jet(order), &standard_definitions())
}

fn jet_order_of(c: &CanonicalForm) -> u32 {
    c.coords()
        .iter()
        .filter_map(|c| c.jet_order())
        .max()
        .unwrap_or(0)
}

/// `lambda` with `X(F) = lambda F` if `X(F)/F` is a polynomial after
/// cancellation. `X` is prolonged as far as `F` needs.
pub fn relative_weight(f: &Expr, x: &VectorField) -> Result<Option<CanonicalForm>> {
    let c = f.canonicalize()?;
    weight_of_form(&c, x)
}

fn weight_of_form(c: &CanonicalForm, x: &VectorField) -> Result<Option<CanonicalForm>> {
    if c.is_zero() {
        return Err(Error::ZeroCandidate);
    }
    let xp = x.prolong(jet_order_of(c).max(x.explicit_order()));
    let q = xp.apply(c).div(c)?;
    Ok(q.is_polynomial().then_some(q))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Overall {
    Absolute,
    Relative,
    Neither,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorVerdict {
    pub generator: String,
    /// `absolute`, `relative` or `neither`.
    pub verdict: Overall,
    /// The weight `lambda` when relative.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantReport {
    pub candidate: String,
    pub verdicts: Vec<GeneratorVerdict>,
    pub overall: Overall,
}

impl InvariantReport {
    pub fn weight_for(&self, generator: &str) -> Option<&str> {
        self.verdicts
            .iter()
            .find(|v| v.generator == generator)
            .and_then(|v| v.weight.as_deref())
    }

    pub fn verdict_for(&self, generator: &str) -> Option<&Overall> {
        self.verdicts
            .iter()
            .find(|v| v.generator == generator)
            .map(|v| &v.verdict)
    }
}

/// Applies every generator, prolonged to `order`, to `f`.
pub fn is_absolute(f: &Expr, g: &GeneratorSet, order: u32) -> Result<InvariantReport> {
    classify_candidate(f, &g.generators, order)
}

/// Per-generator verdicts of `f` under `gens`.
pub fn classify_candidate(f: &Expr, gens: &[Generator], order: u32) -> Result<InvariantReport> {
    let c = f.canonicalize()?;
    if let Some(top) = c
        .coords()
        .into_iter()
        .find(|v| v.jet_order().is_some_and(|o| o > order))
    {
        return Err(Error::OrderOverflow(top.name()));
    }
    let mut verdicts = Vec::with_capacity(gens.len());
    for g in gens {
        let xp = g.field.prolong(order.max(g.field.explicit_order()));
        let image = xp.apply(&c);
        let (verdict, weight) = if image.is_zero() {
            (Overall::Absolute, None)
        } else if c.is_zero() {
            (Overall::Neither, None)
        } else {
            let q = image.div(&c)?;
            if q.is_polynomial() {
                (Overall::Relative, Some(q.to_string()))
            } else {
                (Overall::Neither, None)
            }
        };
        verdicts.push(GeneratorVerdict {
            generator: g.name(),
            verdict,
            weight,
        });
    }
    let overall = if verdicts.iter().all(|v| v.verdict == Overall::Absolute) {
        Overall::Absolute
    } else if verdicts.iter().all(|v| v.verdict != Overall::Neither) {
        Overall::Relative
    } else {
        Overall::Neither
    };
    Ok(InvariantReport {
        candidate: c.to_string(),
        verdicts,
        overall,
    })
}

/// Generic rank of the Jacobian `dF_i/dv` over `chart` equals the number of
/// functions.
pub fn functional_independence(fs: &[Expr], chart: &[Coord], cfg: &SamplingConfig) -> Result<bool> {
    if fs.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one function is required".into(),
        ));
    }
    let mut rows = Vec::with_capacity(fs.len());
    for f in fs {
        let c = f.canonicalize()?;
        rows.push(chart.iter().map(|v| c.partial(*v)).collect::<Vec<_>>());
    }
    let sampled = sample_form_matrices(&rows, chart, cfg, None)?;
    Ok(sampled.rank() == fs.len())
}

/// An expression together with its verified weights, keyed by generator name.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedBlock {
    pub expr: Expr,
    pub weights: BTreeMap<String, CanonicalForm>,
}

impl WeightedBlock {
    /// Computes the weight of `expr` under each generator; fails if `expr`
    /// is not relative under one of them.
    pub fn new(expr: Expr, gens: &[Generator]) -> Result<Self> {
        let c = expr.canonicalize()?;
        let mut weights = BTreeMap::new();
        for g in gens {
            match weight_of_form(&c, &g.field)? {
                Some(w) => {
                    weights.insert(g.name(), w);
                }
                None => {
                    return Err(Error::NotRelative {
                        block: c.to_string(),
                        generator: g.name(),
                    })
                }
            }
        }
        Ok(WeightedBlock { expr, weights })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelVector {
    pub exponents: Vec<String>,
    pub candidate: String,
    /// Annihilated by every scaling generator used in the search.
    pub absolute_under_scaling: bool,
}

/// Integer basis of `{e : sum_i e_i lambda_i(X) = 0 for all X}`. Each vector
/// is primitive with its last nonzero entry positive.
pub fn weight_kernel_search(
    blocks: &[WeightedBlock],
    scaling_gens: &[Generator],
) -> Result<Vec<Vec<BigInt>>> {
    let n = blocks.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for g in scaling_gens {
        let name = g.name();
        let forms = blocks
            .iter()
            .map(|b| match b.weights.get(&name) {
                Some(w) => Ok(w.clone()),
                None => {
                    let w = weight_of_form(&b.expr.canonicalize()?, &g.field)?;
                    w.ok_or_else(|| Error::NotRelative {
                        block: b.expr.to_string(),
                        generator: name.clone(),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.extend(coefficient_rows(&forms));
    }
    Ok(linalg::nullspace(&rows, n)
        .iter()
        .map(|v| linalg::to_primitive_integers(v))
        .collect())
}

/// `prod blocks_i^{e_i}`.
pub fn monomial_candidate(blocks: &[WeightedBlock], exponents: &[BigInt]) -> Result<Expr> {
    let mut factors = Vec::new();
    for (b, e) in blocks.iter().zip(exponents) {
        let e = i64::try_from(e.clone())
            .map_err(|_| Error::InvalidArgument(format!("exponent {e} is out of range")))?;
        if e != 0 {
            factors.push(b.expr.powi(e));
        }
    }
    Ok(Expr::product(factors))
}

/// Runs the kernel search and re-verifies each candidate under the scaling
/// generators.
pub fn search_report(
    blocks: &[WeightedBlock],
    scaling_gens: &[Generator],
    order: u32,
) -> Result<Vec<KernelVector>> {
    let mut out = Vec::new();
    for e in weight_kernel_search(blocks, scaling_gens)? {
        let candidate = monomial_candidate(blocks, &e)?;
        let report = classify_candidate(&candidate, scaling_gens, order)?;
        out.push(KernelVector {
            exponents: e.iter().map(|x| x.to_string()).collect(),
            candidate: candidate.canonicalize()?.to_string(),
            absolute_under_scaling: report.overall == Overall::Absolute,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantBundle {
    pub source: Source,
    pub truncation: u32,
    pub order: u32,
    pub r: InvariantReport,
    pub r1_printed: InvariantReport,
    pub r1_corrected: InvariantReport,
    pub r2: InvariantReport,
}

impl InvariantBundle {
    /// Statements about the printed formulas that do not hold under this
    /// source's generators.
    pub fn discrepancies(&self) -> Vec<String> {
        let mut out = Vec::new();
        let src = match self.source {
            Source::PaperPrinted => "printed",
            Source::Derived => "derived",
        };
        if self.r.overall != Overall::Relative {
            let bad: Vec<&str> = self
                .r
                .verdicts
                .iter()
                .filter(|v| v.verdict == Overall::Neither)
                .map(|v| v.generator.as_str())
                .collect();
            out.push(format!(
                "R = sigma*f_sigma - f is not a relative invariant under the {src} generators (fails for {})",
                bad.join(", ")
            ));
        }
        for (label, rep) in [
            ("printed R1", &self.r1_printed),
            ("corrected R1", &self.r1_corrected),
            ("R2", &self.r2),
        ] {
            match rep.overall {
                Overall::Absolute => {}
                Overall::Relative => {
                    let weights: Vec<String> = rep
                        .verdicts
                        .iter()
                        .filter_map(|v| v.weight.as_ref().map(|w| format!("{}: {w}", v.generator)))
                        .collect();
                    out.push(format!(
                        "{label} is relative, not absolute, under the {src} generators (weights {})",
                        weights.join("; ")
                    ));
                }
                Overall::Neither => {
                    let bad: Vec<&str> = rep
                        .verdicts
                        .iter()
                        .filter(|v| v.verdict != Overall::Absolute)
                        .map(|v| v.generator.as_str())
                        .collect();
                    out.push(format!(
                        "{label} is not invariant under the {src} generators (fails for {})",
                        bad.join(", ")
                    ));
                }
            }
        }
        out
    }
}

/// Checks `R`, printed and corrected `R1`, and `R2` at order 2.
pub fn verify_printed_invariants(source: Source, truncation: u32) -> Result<InvariantBundle> {
    let g = build_generators(source, truncation)?;
    let chart = Chart::jet(2);
    let check = |s: &str| is_absolute(&parse(s, &chart)?, &g, 2);
    Ok(InvariantBundle {
        source,
        truncation,
        order: 2,
        r: check(R)?,
        r1_printed: check(R1_PRINTED)?,
        r1_corrected: check(R1_CORRECTED)?,
        r2: check(R2)?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscrepancyReport {
    pub derived: InvariantBundle,
    pub printed: InvariantBundle,
    pub derived_discrepancies: Vec<String>,
    pub printed_discrepancies: Vec<String>,
}

/// Runs [`verify_printed_invariants`] under both coefficient sources.
pub fn discrepancy_report(truncation: u32) -> Result<DiscrepancyReport> {
    let derived = verify_printed_invariants(Source::Derived, truncation)?;
    let printed = verify_printed_invariants(Source::PaperPrinted, truncation)?;
    Ok(DiscrepancyReport {
        derived_discrepancies: derived.discrepancies(),
        printed_discrepancies: printed.discrepancies(),
        derived,
        printed,
    })
}
