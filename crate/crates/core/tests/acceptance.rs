//! Acceptance suite: one pass/fail line per criterion.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use eqalg_core::eqalgebra::{
    build_generators, check_printed_relations, closure_max_k, prolonged_rank, rank_on_manifold,
    GenKind, GeneratorSet, SamplingConfig, Source,
};
use eqalg_core::equivalence::{
    apply_finite_transformation, check_equivalence, pde_residual, signature_of, EquationInstance,
    FiniteTransformation, Verdict,
};
use eqalg_core::exprcore::{parse, rat, ratio, CanonicalForm, Chart, Coord, Expr};
use eqalg_core::invariants::{
    discrepancy_report, functional_independence, is_absolute, parse_candidate, relative_weight,
    Overall,
};
use eqalg_core::vfields::VectorField;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn derived(k: u32) -> GeneratorSet {
    build_generators(Source::Derived, k).expect("derived generators build")
}

fn cfg() -> SamplingConfig {
    SamplingConfig::default()
}

fn commutator_table() -> Result<String, String> {
    let checks = check_printed_relations(&derived(6));
    let bad: Vec<String> = checks
        .iter()
        .filter(|c| !c.matches)
        .map(|c| {
            format!(
                "[{}, {}]: expected {}, got {}",
                c.left, c.right, c.expected, c.computed
            )
        })
        .collect();
    ensure(bad.is_empty(), bad.join("; "))?;
    let family = checks
        .iter()
        .filter(|c| c.left.starts_with("Y^") && c.right.starts_with("Y^"))
        .count();
    ensure(
        family == 15,
        format!("expected 15 family relations, checked {family}"),
    )?;
    Ok(format!("{} relations reproduced", checks.len()))
}

fn closure() -> Result<String, String> {
    let r = closure_max_k(&derived(6)).map_err(|e| e.to_string())?;
    ensure(
        r.max_closing_k == Some(2),
        format!("max closing k = {:?}", r.max_closing_k),
    )?;
    Ok("max closing k = 2".into())
}

fn first_order() -> Result<String, String> {
    let g = derived(6);
    let r = prolonged_rank(&g, 1, &cfg()).map_err(|e| e.to_string())?;
    ensure(
        (r.variable_count, r.rank, r.invariant_count) == (7, 7, 0),
        format!(
            "chart {}, rank {}, invariants {}",
            r.variable_count, r.rank, r.invariant_count
        ),
    )?;
    let rr = parse_candidate("sigma*f_sigma - f", 1).unwrap();
    for gen in &g.generators {
        let expected = match gen.kind {
            GenKind::Y3 => CanonicalForm::integer(-2),
            GenKind::Family(0) => CanonicalForm::zero(),
            GenKind::Family(k) => parse(&format!("{k}*u^{}", k - 1), &Chart::jet(1))
                .unwrap()
                .canonicalize()
                .unwrap(),
            _ => CanonicalForm::zero(),
        };
        let w = relative_weight(&rr, &gen.field).map_err(|e| e.to_string())?;
        ensure(
            w.as_ref() == Some(&expected),
            format!("weight of R under {}: {w:?}", gen.name()),
        )?;
    }
    Ok("rank 7 of 7, no invariants, R relative with weights -2 and k*u^(k-1)".into())
}

fn special_manifold() -> Result<String, String> {
    let c = parse("sigma*f_sigma - f", &Chart::jet(1)).unwrap();
    let r = rank_on_manifold(&derived(6), &c, 1, &cfg()).map_err(|e| e.to_string())?;
    ensure(r.rank == 6, format!("rank on R = 0 is {}", r.rank))?;
    Ok("rank 6 on R = 0".into())
}

fn second_order() -> Result<String, String> {
    let r = prolonged_rank(&derived(6), 2, &cfg()).map_err(|e| e.to_string())?;
    ensure(
        (r.variable_count, r.rank, r.invariant_count) == (10, 8, 2),
        format!(
            "chart {}, rank {}, invariants {}",
            r.variable_count, r.rank, r.invariant_count
        ),
    )?;
    Ok("rank 8 of 10, 2 invariants".into())
}

fn invariant_verification() -> Result<String, String> {
    let g = derived(6);
    let check = |name: &str| {
        is_absolute(&parse_candidate(name, 2).unwrap(), &g, 2).map_err(|e| e.to_string())
    };
    ensure(
        check("R2")?.overall == Overall::Absolute,
        "R2 is not absolute",
    )?;
    ensure(
        check("R1_corrected")?.overall == Overall::Absolute,
        "corrected R1 is not absolute",
    )?;
    let printed = check("R1_printed")?;
    ensure(
        printed.overall != Overall::Absolute,
        "printed R1 reported absolute",
    )?;
    ensure(
        printed.weight_for("Y^2") == Some("-4*u"),
        "printed R1 weight under Y^2 missing",
    )?;
    let report = discrepancy_report(6).map_err(|e| e.to_string())?;
    ensure(
        report
            .printed_discrepancies
            .iter()
            .any(|d| d.starts_with("R = sigma*f_sigma - f is not a relative invariant")),
        "printed generators not flagged against R",
    )?;
    ensure(
        report
            .derived_discrepancies
            .iter()
            .any(|d| d.starts_with("printed R1")),
        "printed R1 not flagged",
    )?;
    Ok(format!(
        "R2 and corrected R1 absolute; {} discrepancies reported",
        report.derived_discrepancies.len() + report.printed_discrepancies.len()
    ))
}

fn functional_independence_check() -> Result<String, String> {
    let chart: Vec<Coord> = Chart::jet(2).coords().collect();
    let fs = [
        parse_candidate("R1_corrected", 2).unwrap(),
        parse_candidate("R2", 2).unwrap(),
    ];
    ensure(
        functional_independence(&fs, &chart, &cfg()).map_err(|e| e.to_string())?,
        "Jacobian rank below 2",
    )?;
    Ok("Jacobian rank 2".into())
}

fn random_affine(rng: &mut ChaCha8Rng) -> FiniteTransformation {
    let mut nonzero = || loop {
        let p: i64 = rng.gen_range(-6..=6);
        if p != 0 {
            break ratio(p, rng.gen_range(1..=5));
        }
    };
    let a = nonzero();
    let b = nonzero() - rat(1);
    let c = ratio(rng.gen_range(1..=9), rng.gen_range(1..=9));
    FiniteTransformation::affine(a, b, c).expect("affine maps with a != 0 are invertible")
}

fn end_to_end_equivalence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2008);
    let f = EquationInstance::parse("sigma^2").unwrap();
    let degenerate = EquationInstance::parse("sigma").unwrap();
    for i in 0..20 {
        let t = random_affine(&mut rng);
        let image = apply_finite_transformation(&f, &t).map_err(|e| e.to_string())?;
        let v = check_equivalence(&f, &image).map_err(|e| e.to_string())?;
        ensure(
            v == Verdict::EquivalentPerCriterion,
            format!(
                "transformation {i} (u -> {}, c = {}): {v:?}",
                t.phi(),
                t.dilation()
            ),
        )?;
        let d = apply_finite_transformation(&degenerate, &t).map_err(|e| e.to_string())?;
        ensure(
            signature_of(&d).unwrap().degenerate(),
            format!("degeneracy lost under transformation {i}"),
        )?;
    }
    let v = check_equivalence(&f, &EquationInstance::parse("sigma^3").unwrap()).unwrap();
    ensure(
        v == Verdict::NotEquivalent,
        format!("(sigma^2, sigma^3): {v:?}"),
    )?;
    Ok(
        "20 transformations equivalent, degeneracy preserved, (sigma^2, sigma^3) not equivalent"
            .into(),
    )
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3i64..=3).prop_map(Expr::integer),
        prop_oneof![
            Just(Coord::U),
            Just(Coord::Sigma),
            Just(Coord::F),
            Just(Coord::Jet(0, 1))
        ]
        .prop_map(Expr::coord),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner).prop_map(|(a, b)| a - b),
        ]
    })
}

fn canon(e: &Expr) -> CanonicalForm {
    e.canonicalize()
        .expect("polynomial expressions canonicalize")
}

fn run_property<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 64,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(
            proptest::test_runner::RngAlgorithm::ChaCha,
        ),
    );
    runner
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

fn algebra_fields() -> Vec<VectorField> {
    derived(4).fields()
}

fn property_suites() -> Result<String, String> {
    run_property(
        "ring laws",
        (arb_expr(), arb_expr(), arb_expr()),
        |(a, b, c)| {
            prop_assert_eq!(
                canon(&(a.clone() + b.clone())),
                canon(&(b.clone() + a.clone()))
            );
            prop_assert_eq!(
                canon(&(a.clone() * b.clone())),
                canon(&(b.clone() * a.clone()))
            );
            prop_assert_eq!(
                canon(&((a.clone() + b.clone()) + c.clone())),
                canon(&(a.clone() + (b.clone() + c.clone())))
            );
            prop_assert_eq!(
                canon(&((a.clone() * b.clone()) * c.clone())),
                canon(&(a.clone() * (b.clone() * c.clone())))
            );
            prop_assert_eq!(
                canon(&(a.clone() * (b.clone() + c.clone()))),
                canon(&(a.clone() * b + a * c))
            );
            Ok(())
        },
    )?;
    run_property(
        "canonicalize idempotence",
        (arb_expr(), arb_expr()),
        |(a, b)| {
            let e = a / (b.clone() * b + Expr::integer(1));
            let c = canon(&e);
            prop_assert_eq!(canon(&c.to_expr()), c.clone());
            let reparsed = parse(&c.to_string(), &Chart::jet(1)).unwrap();
            prop_assert_eq!(canon(&reparsed), c);
            Ok(())
        },
    )?;
    let fields = algebra_fields();
    let n = fields.len();
    let combo = || prop::collection::vec(-2i64..=2, n);
    let combine = |w: &[i64]| {
        fields
            .iter()
            .zip(w)
            .fold(VectorField::zero(), |acc, (f, k)| {
                acc.add(&f.scale(&rat(*k)))
            })
    };
    run_property(
        "bracket antisymmetry and Jacobi",
        (combo(), combo(), combo()),
        |(a, b, c)| {
            let (x, y, z) = (combine(&a), combine(&b), combine(&c));
            prop_assert_eq!(x.bracket(&y), y.bracket(&x).scale(&rat(-1)));
            let jac = x
                .bracket(&y.bracket(&z))
                .add(&y.bracket(&z.bracket(&x)))
                .add(&z.bracket(&x.bracket(&y)));
            prop_assert!(jac.is_zero());
            Ok(())
        },
    )?;
    run_property(
        "prolongation naturality",
        (combo(), combo(), 1u32..=2),
        |(a, b, l)| {
            let (x, y) = (combine(&a), combine(&b));
            prop_assert_eq!(
                x.bracket(&y).prolong(l),
                x.prolong(l).bracket(&y.prolong(l))
            );
            Ok(())
        },
    )?;
    run_property(
        "derivation laws",
        (combo(), arb_expr(), arb_expr()),
        |(a, f, g)| {
            let x = combine(&a).prolong(1);
            let (f, g) = (canon(&f), canon(&g));
            prop_assert_eq!(
                x.apply(&f.mul(&g)),
                x.apply(&f).mul(&g).add(&f.mul(&x.apply(&g)))
            );
            prop_assert_eq!(x.apply(&f.add(&g)), x.apply(&f).add(&x.apply(&g)));
            Ok(())
        },
    )?;
    let fixtures = [
        "sigma^2",
        "sigma^3",
        "u + sigma",
        "u*sigma^2",
        "sigma^2 + u^3",
        "exp(u)*sigma^2",
        "sigma^2/(1 + u^2)",
        "u^2 + sigma^3",
        "sigma^2 - sigma + u",
        "u*sigma + sigma^2",
        "1 + u",
        "sigma^3/u + sigma",
    ];
    for f in fixtures {
        let eq = EquationInstance::parse(f).unwrap();
        let (r1, r2) = signature_of(&eq)
            .unwrap()
            .rho
            .ok_or(format!("{f} is degenerate"))?;
        let (a, b) = pde_residual(&eq, &r1.to_expr(), &r2.to_expr()).map_err(|e| e.to_string())?;
        ensure(
            a.is_zero() && b.is_zero(),
            format!("residual of {f} is ({a}, {b})"),
        )?;
    }
    Ok(format!(
        "5 property suites x 64 cases, residuals on {} fixtures",
        fixtures.len()
    ))
}

#[test]
fn acceptance() {
    let criteria: [(u32, &str, u64, Check); 9] = [
        (1, "commutator table", 10, commutator_table),
        (2, "closure", 10, closure),
        (3, "first-order count and R weights", 30, first_order),
        (4, "special manifold", 30, special_manifold),
        (5, "second-order count", 60, second_order),
        (6, "invariant verification", 60, invariant_verification),
        (
            7,
            "functional independence",
            10,
            functional_independence_check,
        ),
        (8, "end-to-end equivalence", 60, end_to_end_equivalence),
        (9, "property suites", 600, property_suites),
    ];
    let mut failed = BTreeMap::new();
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(msg) if elapsed > Duration::from_secs(budget) => {
                Err(format!("{msg}, but took {elapsed:.2?} (budget {budget} s)"))
            }
            r => r,
        };
        match &result {
            Ok(msg) => println!("criterion {id} ({name}): PASS | {msg} | {elapsed:.2?}"),
            Err(msg) => {
                println!("criterion {id} ({name}): FAIL | {msg} | {elapsed:.2?}");
                failed.insert(id, msg.clone());
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
