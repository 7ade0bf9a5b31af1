//! The discretized equivalence algebra `{Y0, Y1, Y2, Y3, Y^0, ..., Y^K}`:
//! construction from either coefficient source, structure constants,
//! closure, and sampled generic ranks of its prolongations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exprcore::{parse, rat, CanonicalForm, Chart, Coord, Expr, Poly, Rational};
use crate::jetspace::JetSpace;
use crate::linalg;
use crate::vfields::{induce_from_point_action, PointAction, VectorField};

/// Where the generator coefficients come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// Coefficients exactly as printed for the discretized algebra.
    #[serde(rename = "paper")]
    PaperPrinted,
    /// Coefficients induced from point actions on `(t, x, u)`.
    Derived,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::PaperPrinted => "paper",
            Source::Derived => "derived",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenKind {
    Y0,
    Y1,
    Y2,
    Y3,
    /// `Y^k`, the family member with `phi = u^k`.
    Family(u32),
}

impl GenKind {
    pub fn name(self) -> String {
        match self {
            GenKind::Y0 => "Y0".into(),
            GenKind::Y1 => "Y1".into(),
            GenKind::Y2 => "Y2".into(),
            GenKind::Y3 => "Y3".into(),
            GenKind::Family(k) => format!("Y^{k}"),
        }
    }

    pub fn from_name(s: &str) -> Option<GenKind> {
        match s {
            "Y0" => Some(GenKind::Y0),
            "Y1" => Some(GenKind::Y1),
            "Y2" => Some(GenKind::Y2),
            "Y3" => Some(GenKind::Y3),
            _ => s.strip_prefix("Y^")?.parse().ok().map(GenKind::Family),
        }
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub kind: GenKind,
    pub field: VectorField,
}

impl Generator {
    pub fn name(&self) -> String {
        self.kind.name()
    }
}

#[derive(Clone, Debug)]
pub struct GeneratorSet {
    pub source: Source,
    pub truncation: u32,
    pub generators: Vec<Generator>,
}

impl GeneratorSet {
    pub fn get(&self, kind: GenKind) -> Option<&Generator> {
        self.generators.iter().find(|g| g.kind == kind)
    }

    pub fn fields(&self) -> Vec<VectorField> {
        self.generators.iter().map(|g| g.field.clone()).collect()
    }

    /// The subset `{Y0, Y1, Y2, Y3, Y^0, ..., Y^k}`.
    pub fn truncated(&self, k: u32) -> GeneratorSet {
        GeneratorSet {
            source: self.source,
            truncation: k.min(self.truncation),
            generators: self
                .generators
                .iter()
                .filter(|g| !matches!(g.kind, GenKind::Family(j) if j > k))
                .cloned()
                .collect(),
        }
    }

    pub fn subset(&self, kinds: &[GenKind]) -> GeneratorSet {
        GeneratorSet {
            source: self.source,
            truncation: self.truncation,
            generators: kinds.iter().filter_map(|k| self.get(*k).cloned()).collect(),
        }
    }
}

fn template_chart() -> Chart {
    Chart::jet_with_phi(1, 3)
}

fn texpr(s: &str) -> Expr {
    parse(s, &template_chart()).expect("built-in template parses")
}

/// `Y_phi` with `phi` kept symbolic (`phi`, `phi_u`, ...).
pub fn phi_generator(source: Source) -> Result<VectorField> {
    match source {
        Source::Derived => induce_from_point_action(&PointAction::new(
            Expr::zero(),
            Expr::zero(),
            Expr::coord(Coord::Phi(0)),
        )),
        Source::PaperPrinted => VectorField::from_exprs(
            &[
                (Coord::U, texpr("phi")),
                (Coord::Sigma, texpr("2*phi_u*sigma")),
                (Coord::F, texpr("2*(phi_u*f + phi_uu*sigma)")),
                (
                    Coord::Jet(1, 0),
                    texpr("phi_uu*f + phi_uuu*sigma - 2*sigma*f_sigma*phi_uu"),
                ),
                (Coord::Jet(0, 1), texpr("phi_uu - f_sigma*phi_u")),
            ],
            1,
        ),
    }
}

/// Bindings `phi_{u^n} -> d^n/du^n u^k`.
pub fn monomial_phi_bindings(k: u32, max_derivative: u8) -> BTreeMap<Coord, CanonicalForm> {
    (0..=max_derivative)
        .map(|n| {
            let n32 = n as u32;
            let value = if n32 > k {
                CanonicalForm::zero()
            } else {
                let coeff: i64 = (0..n32).map(|i| (k - i) as i64).product();
                CanonicalForm::from_poly(Poly::var(Coord::U.into()).pow(k - n32).scale(&rat(coeff)))
            };
            (Coord::Phi(n), value)
        })
        .collect()
}

fn substitute_field(
    field: &VectorField,
    b: &BTreeMap<Coord, CanonicalForm>,
) -> Result<VectorField> {
    let mut coeffs = Vec::new();
    for (c, v) in field.coefficients() {
        coeffs.push((*c, v.substitute(b)?));
    }
    Ok(VectorField::new(coeffs, field.explicit_order()))
}

fn point_action(t: &str, x: &str, u: &str) -> PointAction {
    let chart = Chart::point_jet();
    PointAction::new(
        parse(t, &chart).expect("point action parses"),
        parse(x, &chart).expect("point action parses"),
        parse(u, &chart).expect("point action parses"),
    )
}

/// Builds `{Y0, Y1, Y2, Y3, Y^0, ..., Y^K}` from the chosen source.
///
/// Derived generators live on `(t, x, u, sigma, f)` and are prolonged on
/// demand. Printed generators carry their printed first-order coefficients.
pub fn build_generators(source: Source, truncation: u32) -> Result<GeneratorSet> {
    let mut generators = Vec::new();
    match source {
        Source::Derived => {
            for (kind, (t, x)) in [
                (GenKind::Y0, ("x", "t")),
                (GenKind::Y1, ("1", "0")),
                (GenKind::Y2, ("0", "1")),
                (GenKind::Y3, ("t", "x")),
            ] {
                let field = induce_from_point_action(&point_action(t, x, "0"))?;
                generators.push(Generator { kind, field });
            }
            for k in 0..=truncation {
                let field = induce_from_point_action(&point_action("0", "0", &format!("u^{k}")))?;
                generators.push(Generator {
                    kind: GenKind::Family(k),
                    field,
                });
            }
        }
        Source::PaperPrinted => {
            let printed = |pairs: &[(Coord, &str)]| {
                let pairs: Vec<(Coord, Expr)> = pairs.iter().map(|(c, s)| (*c, texpr(s))).collect();
                VectorField::from_exprs(&pairs, 1)
            };
            generators.push(Generator {
                kind: GenKind::Y0,
                field: printed(&[(Coord::T, "x"), (Coord::X, "t")])?,
            });
            generators.push(Generator {
                kind: GenKind::Y1,
                field: printed(&[(Coord::T, "1")])?,
            });
            generators.push(Generator {
                kind: GenKind::Y2,
                field: printed(&[(Coord::X, "1")])?,
            });
            generators.push(Generator {
                kind: GenKind::Y3,
                field: printed(&[
                    (Coord::X, "x"),
                    (Coord::T, "t"),
                    (Coord::F, "-2*f"),
                    (Coord::Sigma, "-sigma"),
                    (Coord::Jet(1, 0), "-2*f_u"),
                ])?,
            });
            let template = phi_generator(Source::PaperPrinted)?;
            for k in 0..=truncation {
                let field = substitute_field(&template, &monomial_phi_bindings(k, 3))?;
                generators.push(Generator {
                    kind: GenKind::Family(k),
                    field,
                });
            }
        }
    }
    Ok(GeneratorSet {
        source,
        truncation,
        generators,
    })
}

/// A bracket expressed in a basis of generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Decomposition {
    Zero,
    InSpan { terms: Vec<(String, String)> },
    OutsideSpan,
}

impl Decomposition {
    pub fn in_span(terms: &[(GenKind, Rational)]) -> Self {
        let terms: Vec<(String, String)> = terms
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k.name(), c.to_string()))
            .collect();
        if terms.is_empty() {
            Decomposition::Zero
        } else {
            Decomposition::InSpan { terms }
        }
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decomposition::Zero => f.write_str("0"),
            Decomposition::OutsideSpan => f.write_str("outside span"),
            Decomposition::InSpan { terms } => {
                for (i, (name, c)) in terms.iter().enumerate() {
                    let neg = c.starts_with('-');
                    let mag = c.trim_start_matches('-');
                    if i == 0 {
                        if neg {
                            f.write_str("-")?;
                        }
                    } else {
                        f.write_str(if neg { " - " } else { " + " })?;
                    }
                    if mag == "1" {
                        write!(f, "{name}")?;
                    } else {
                        write!(f, "{mag}*{name}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// Rows of the linear system `sum_j c_j forms[j] = 0` with constant `c_j`:
/// one row per monomial of the numerators over a common denominator.
pub fn coefficient_rows(forms: &[CanonicalForm]) -> Vec<Vec<Rational>> {
    let mut lcm = Poly::one();
    for f in forms {
        let g = crate::exprcore::gcd(&lcm, f.denominator());
        lcm = lcm.mul(&f.denominator().exact_div(&g).expect("gcd divides"));
    }
    let polys: Vec<BTreeMap<_, Rational>> = forms
        .iter()
        .map(|f| {
            f.numerator()
                .mul(&lcm.exact_div(f.denominator()).expect("lcm is a multiple"))
                .terms()
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect()
        })
        .collect();
    let monomials: BTreeSet<_> = polys.iter().flat_map(|p| p.keys().cloned()).collect();
    monomials
        .iter()
        .map(|m| {
            polys
                .iter()
                .map(|p| p.get(m).cloned().unwrap_or_else(Rational::zero))
                .collect()
        })
        .collect()
}

/// Expresses `field` as a constant-coefficient combination of `basis`.
pub fn decompose(field: &VectorField, basis: &[&Generator]) -> Decomposition {
    if field.is_zero() {
        return Decomposition::Zero;
    }
    let coords: BTreeSet<Coord> = basis
        .iter()
        .flat_map(|g| g.field.coefficients().keys().copied())
        .chain(field.coefficients().keys().copied())
        .collect();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut rhs: Vec<Rational> = Vec::new();
    for v in coords {
        let mut forms: Vec<CanonicalForm> = basis.iter().map(|g| g.field.coeff(v)).collect();
        forms.push(field.coeff(v));
        for mut row in coefficient_rows(&forms) {
            rhs.push(row.pop().expect("row has a right-hand side"));
            rows.push(row);
        }
    }
    match linalg::solve(&rows, &rhs) {
        None => Decomposition::OutsideSpan,
        Some(x) => {
            let terms: Vec<(GenKind, Rational)> = basis.iter().map(|g| g.kind).zip(x).collect();
            Decomposition::in_span(&terms)
        }
    }
}

/// Generators brought to a common explicit order so brackets are taken on
/// the same chart.
fn aligned(g: &GeneratorSet) -> Vec<Generator> {
    let order = g
        .generators
        .iter()
        .map(|x| x.field.explicit_order())
        .max()
        .unwrap_or(0);
    g.generators
        .iter()
        .map(|x| Generator {
            kind: x.kind,
            field: x.field.prolong(order),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BracketEntry {
    pub left: String,
    pub right: String,
    pub result: Decomposition,
}

/// Every bracket `[A, B]` of distinct generators (in list order), expressed
/// in the full generator basis.
pub fn commutator_table(g: &GeneratorSet) -> Vec<BracketEntry> {
    let gens = aligned(g);
    let basis: Vec<&Generator> = gens.iter().collect();
    let mut out = Vec::new();
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let b = gens[i].field.bracket(&gens[j].field);
            out.push(BracketEntry {
                left: gens[i].name(),
                right: gens[j].name(),
                result: decompose(&b, &basis),
            });
        }
    }
    out
}

/// `[A, B] = sum c_i Z_i`, with an empty sum for zero.
pub type Relation = (GenKind, GenKind, Vec<(GenKind, Rational)>);

/// The bracket relations as printed, for generators up to truncation `k`.
/// Brackets whose printed result `Y^{n+m-1}` lies beyond the truncation are
/// omitted.
pub fn printed_relations(k: u32) -> Vec<Relation> {
    use GenKind::*;
    let mut out = vec![
        (Y0, Y1, vec![(Y2, rat(-1))]),
        (Y0, Y2, vec![(Y1, rat(-1))]),
        (Y0, Y3, vec![]),
        (Y1, Y2, vec![]),
        (Y1, Y3, vec![(Y1, rat(1))]),
        (Y2, Y3, vec![(Y2, rat(1))]),
    ];
    for a in [Y0, Y1, Y2, Y3] {
        for n in 0..=k {
            out.push((a, Family(n), vec![]));
        }
    }
    for n in 0..=k {
        for m in n + 1..=k {
            if n + m - 1 <= k {
                out.push((
                    Family(n),
                    Family(m),
                    vec![(Family(n + m - 1), rat(m as i64 - n as i64))],
                ));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationCheck {
    pub left: String,
    pub right: String,
    pub expected: Decomposition,
    pub computed: Decomposition,
    pub matches: bool,
}

/// Compares the computed commutator table with the printed relations.
pub fn check_printed_relations(g: &GeneratorSet) -> Vec<RelationCheck> {
    let table = commutator_table(g);
    printed_relations(g.truncation)
        .into_iter()
        .map(|(a, b, terms)| {
            let expected = Decomposition::in_span(&terms);
            let computed = table
                .iter()
                .find(|e| e.left == a.name() && e.right == b.name())
                .map(|e| e.result.clone())
                .unwrap_or(Decomposition::OutsideSpan);
            RelationCheck {
                left: a.name(),
                right: b.name(),
                matches: expected == computed,
                expected,
                computed,
            }
        })
        .collect()
}

/// `true` if the span of `kinds` is closed under brackets.
pub fn is_closed_subalgebra(g: &GeneratorSet, kinds: &[GenKind]) -> bool {
    let sub = g.subset(kinds);
    let gens = aligned(&sub);
    let basis: Vec<&Generator> = gens.iter().collect();
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let b = gens[i].field.bracket(&gens[j].field);
            if decompose(&b, &basis) == Decomposition::OutsideSpan {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureReport {
    pub max_closing_k: Option<u32>,
    /// `(k, closed)` for every `k <= K`.
    pub sweep: Vec<(u32, bool)>,
}

/// Largest `k` for which `{Y0, Y1, Y2, Y3, Y^0, ..., Y^k}` spans a
/// subalgebra. Needs `K >= 4` so that failure past `k = 2` is observable.
pub fn closure_max_k(g: &GeneratorSet) -> Result<ClosureReport> {
    if g.truncation < 4 {
        return Err(Error::InvalidArgument(format!(
            "closure sweep needs K >= 4, got K = {}",
            g.truncation
        )));
    }
    let mut sweep = Vec::new();
    for k in 0..=g.truncation {
        let sub = g.truncated(k);
        let kinds: Vec<GenKind> = sub.generators.iter().map(|x| x.kind).collect();
        sweep.push((k, is_closed_subalgebra(g, &kinds)));
    }
    let max_closing_k = sweep.iter().filter(|(_, c)| *c).map(|(k, _)| *k).max();
    Ok(ClosureReport {
        max_closing_k,
        sweep,
    })
}

/// Sampling policy for generic ranks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub seed: u64,
    pub samples: usize,
    /// Coordinates are drawn uniformly from `[-coordinate_range, coordinate_range]`.
    pub coordinate_range: i64,
    /// Redraws allowed per sample before giving up.
    pub max_retries: usize,
}

pub const DEFAULT_SEED: u64 = 2008;

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            seed: DEFAULT_SEED,
            samples: 8,
            coordinate_range: 50,
            max_retries: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankReport {
    pub order: u32,
    pub rank: usize,
    pub samples_used: usize,
    pub seed: u64,
    pub variable_count: usize,
    pub invariant_count: usize,
}

/// A coordinate solved from a constraint: `coord = value(other coords)`.
#[derive(Clone, Debug)]
pub struct SolvedConstraint {
    pub coord: Coord,
    pub value: CanonicalForm,
}

/// Isolates a coordinate that the constraint's numerator contains linearly.
/// Coordinates with a constant coefficient are preferred; ties go to chart
/// order. `Ok(None)` means the constraint is identically zero.
pub fn solve_constraint(constraint: &Expr, chart: &[Coord]) -> Result<Option<SolvedConstraint>> {
    let c = constraint.canonicalize()?;
    if c.is_zero() {
        return Ok(None);
    }
    let num = c.numerator();
    let mut fallback = None;
    for &v in chart {
        let var = v.into();
        if num.degree_in(&var) != 1 {
            continue;
        }
        let parts = num.coefficients_in(&var);
        let a = parts.get(&1).cloned().unwrap_or_default();
        let b = parts.get(&0).cloned().unwrap_or_default();
        let value = CanonicalForm::from_parts(b.neg(), a.clone())?;
        let solved = SolvedConstraint { coord: v, value };
        if a.is_constant() {
            return Ok(Some(solved));
        }
        fallback.get_or_insert(solved);
    }
    fallback.map(Some).ok_or(Error::NotSolvable)
}

/// Coefficient matrices of a list of fields evaluated at sampled points.
pub struct SampledMatrices {
    pub points: Vec<linalg::Matrix>,
    pub attempts: usize,
}

impl SampledMatrices {
    pub fn rank_of_rows(&self, rows: &[usize]) -> usize {
        self.points
            .iter()
            .map(|m| {
                let sub: linalg::Matrix = rows.iter().map(|&r| m[r].clone()).collect();
                linalg::rank(&sub)
            })
            .max()
            .unwrap_or(0)
    }

    pub fn rank(&self) -> usize {
        let n = self.points.first().map_or(0, |m| m.len());
        self.rank_of_rows(&(0..n).collect::<Vec<_>>())
    }
}

fn random_point(
    rng: &mut ChaCha8Rng,
    coords: &[Coord],
    range: i64,
    constraint: Option<&SolvedConstraint>,
) -> Option<BTreeMap<Coord, Rational>> {
    let mut point: BTreeMap<Coord, Rational> = coords
        .iter()
        .map(|&c| (c, rat(rng.gen_range(-range..=range))))
        .collect();
    if let Some(s) = constraint {
        let v = s.value.eval(&point, &BTreeMap::new()).ok()?;
        point.insert(s.coord, v);
    }
    Some(point)
}

/// Evaluates the coefficient vectors of `fields` (already on the chart) at
/// sampled points.
pub fn sample_matrices(
    fields: &[VectorField],
    chart: &[Coord],
    cfg: &SamplingConfig,
    constraint: Option<&SolvedConstraint>,
) -> Result<SampledMatrices> {
    let rows: Vec<Vec<CanonicalForm>> = fields
        .iter()
        .map(|f| chart.iter().map(|c| f.coeff(*c)).collect())
        .collect();
    sample_form_matrices(&rows, chart, cfg, constraint)
}

/// Evaluates a matrix of forms at `cfg.samples` random points of `chart`,
/// redrawing points where an entry has a pole. Each sample gets its own seed
/// derived from `cfg.seed`.
pub fn sample_form_matrices(
    forms: &[Vec<CanonicalForm>],
    chart: &[Coord],
    cfg: &SamplingConfig,
    constraint: Option<&SolvedConstraint>,
) -> Result<SampledMatrices> {
    if cfg.samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let mut points = Vec::with_capacity(cfg.samples);
    let mut attempts = 0;
    let atoms = BTreeMap::new();
    for s in 0..cfg.samples {
        let mut rng = ChaCha8Rng::seed_from_u64(
            cfg.seed
                .wrapping_add(s as u64)
                .wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        let mut done = false;
        for _ in 0..cfg.max_retries.max(1) {
            attempts += 1;
            let Some(point) = random_point(&mut rng, chart, cfg.coordinate_range, constraint)
            else {
                continue;
            };
            let rows: Result<Vec<Vec<Rational>>> = forms
                .iter()
                .map(|row| row.iter().map(|e| e.eval(&point, &atoms)).collect())
                .collect();
            match rows {
                Ok(m) => {
                    points.push(m);
                    done = true;
                    break;
                }
                Err(Error::ZeroDenominatorAtPoint) => continue,
                Err(e) => return Err(e),
            }
        }
        if !done {
            return Err(Error::SamplingExhausted(cfg.max_retries));
        }
    }
    Ok(SampledMatrices { points, attempts })
}

fn prolonged_fields(fields: &[VectorField], order: u32) -> Vec<VectorField> {
    fields.iter().map(|f| f.prolong(order)).collect()
}

/// Generic rank of the order-`order` prolongation of `fields`.
pub fn fields_rank(
    fields: &[VectorField],
    order: u32,
    cfg: &SamplingConfig,
    constraint: Option<&SolvedConstraint>,
) -> Result<RankReport> {
    let space = JetSpace::new(order);
    let chart = space.coordinates();
    let prolonged = prolonged_fields(fields, order);
    let sampled = sample_matrices(&prolonged, &chart, cfg, constraint)?;
    let rank = sampled.rank();
    let variable_count = space.coordinate_count();
    Ok(RankReport {
        order,
        rank,
        samples_used: sampled.points.len(),
        seed: cfg.seed,
        variable_count,
        invariant_count: variable_count - rank,
    })
}

pub fn prolonged_rank(g: &GeneratorSet, order: u32, cfg: &SamplingConfig) -> Result<RankReport> {
    fields_rank(&g.fields(), order, cfg, None)
}

/// Generic rank at points of the locus `constraint = 0`.
pub fn rank_on_manifold(
    g: &GeneratorSet,
    constraint: &Expr,
    order: u32,
    cfg: &SamplingConfig,
) -> Result<RankReport> {
    let chart = JetSpace::new(order).coordinates();
    let solved = solve_constraint(constraint, &chart)?;
    fields_rank(&g.fields(), order, cfg, solved.as_ref())
}

/// Number of functionally independent invariants of order `order`:
/// chart size minus generic rank.
pub fn invariant_count(g: &GeneratorSet, order: u32, cfg: &SamplingConfig) -> Result<usize> {
    Ok(prolonged_rank(g, order, cfg)?.invariant_count)
}

/// Drops generators, last first, whenever the generic rank survives.
///
/// The result is minimal with respect to single removals; with
/// `exhaustive` (at most 10 generators) the smallest subset of full rank is
/// searched instead, preferring earlier generators.
pub fn minimal_generating_set(
    gens: &[Generator],
    order: u32,
    cfg: &SamplingConfig,
    exhaustive: bool,
) -> Result<Vec<GenKind>> {
    if gens.is_empty() {
        return Ok(Vec::new());
    }
    let chart = JetSpace::new(order).coordinates();
    let fields: Vec<VectorField> = gens.iter().map(|g| g.field.prolong(order)).collect();
    let sampled = sample_matrices(&fields, &chart, cfg, None)?;
    let full = sampled.rank();
    let n = gens.len();
    if exhaustive {
        if n > 10 {
            return Err(Error::InvalidArgument(format!(
                "exhaustive search is limited to 10 generators, got {n}"
            )));
        }
        for size in 0..=n {
            let mut best: Option<Vec<usize>> = None;
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != size {
                    continue;
                }
                let rows: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                if sampled.rank_of_rows(&rows) == full && best.as_ref().is_none_or(|b| rows < *b) {
                    best = Some(rows);
                }
            }
            if let Some(rows) = best {
                return Ok(rows.into_iter().map(|i| gens[i].kind).collect());
            }
        }
        unreachable!("the full set reaches full rank");
    }
    let mut keep: Vec<usize> = (0..n).collect();
    for i in (0..n).rev() {
        let trial: Vec<usize> = keep.iter().copied().filter(|&j| j != i).collect();
        if sampled.rank_of_rows(&trial) == full {
            keep = trial;
        }
    }
    Ok(keep.into_iter().map(|i| gens[i].kind).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilizationReport {
    pub order: u32,
    pub k_star: u32,
    pub rank: usize,
    /// `(K, rank)` for every truncation examined.
    pub sweep: Vec<(u32, usize)>,
}

/// Smallest `K` whose rank at `order` is repeated for `K, K+1, K+2, K+3`.
pub fn stabilized_truncation(
    source: Source,
    order: u32,
    cfg: &SamplingConfig,
    k_max: u32,
) -> Result<StabilizationReport> {
    let g = build_generators(source, k_max)?;
    let chart = JetSpace::new(order).coordinates();
    let fields = prolonged_fields(&g.fields(), order);
    let sampled = sample_matrices(&fields, &chart, cfg, None)?;
    let mut sweep = Vec::new();
    for k in 0..=k_max {
        let rows: Vec<usize> = g
            .generators
            .iter()
            .enumerate()
            .filter(|(_, x)| !matches!(x.kind, GenKind::Family(j) if j > k))
            .map(|(i, _)| i)
            .collect();
        sweep.push((k, sampled.rank_of_rows(&rows)));
    }
    for k in 0..=k_max.saturating_sub(3) {
        let r = sweep[k as usize].1;
        if k + 3 <= k_max && (k..=k + 3).all(|j| sweep[j as usize].1 == r) {
            return Ok(StabilizationReport {
                order,
                k_star: k,
                rank: r,
                sweep,
            });
        }
    }
    Err(Error::CapExceeded(k_max as usize))
}

#[cfg(test)]
mod tests;
