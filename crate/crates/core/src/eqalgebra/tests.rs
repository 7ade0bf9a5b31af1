use super::*;
use crate::exprcore::ratio;

fn cfg() -> SamplingConfig {
    SamplingConfig::default()
}

fn jet(s: &str) -> CanonicalForm {
    parse(s, &Chart::jet(2)).unwrap().canonicalize().unwrap()
}

fn derived(k: u32) -> GeneratorSet {
    build_generators(Source::Derived, k).unwrap()
}

fn printed(k: u32) -> GeneratorSet {
    build_generators(Source::PaperPrinted, k).unwrap()
}

#[test]
fn build_examples() {
    let p = printed(2);
    assert_eq!(
        p.get(GenKind::Family(2)).unwrap().field.coeff(Coord::Sigma),
        jet("4*u*sigma")
    );
    let d = derived(1);
    assert_eq!(
        d.get(GenKind::Family(1)).unwrap().field.coeff(Coord::F),
        jet("f")
    );
    let d0 = derived(0);
    let y0 = &d0.get(GenKind::Family(0)).unwrap().field;
    assert_eq!(y0.coefficients().len(), 1);
    assert_eq!(y0.coeff(Coord::U), jet("1"));
    assert_eq!(d.generators.len(), 6);
    let names: Vec<String> = d.generators.iter().map(|g| g.name()).collect();
    assert_eq!(names, ["Y0", "Y1", "Y2", "Y3", "Y^0", "Y^1"]);
}

#[test]
fn family_matches_symbolic_template() {
    for src in [Source::Derived, Source::PaperPrinted] {
        let g = build_generators(src, 5).unwrap();
        let template = phi_generator(src).unwrap();
        for k in 0..=5 {
            let sub = substitute_field(&template, &monomial_phi_bindings(k, 3)).unwrap();
            assert_eq!(sub, g.get(GenKind::Family(k)).unwrap().field, "{src} k={k}");
        }
    }
}

#[test]
fn gen_kind_names_round_trip() {
    for k in [
        GenKind::Y0,
        GenKind::Y1,
        GenKind::Y2,
        GenKind::Y3,
        GenKind::Family(0),
        GenKind::Family(11),
    ] {
        assert_eq!(GenKind::from_name(&k.name()), Some(k));
    }
    assert_eq!(GenKind::from_name("Y4"), None);
    assert_eq!(GenKind::from_name("Y^x"), None);
}

fn entry<'a>(t: &'a [BracketEntry], a: &str, b: &str) -> &'a Decomposition {
    &t.iter()
        .find(|e| e.left == a && e.right == b)
        .unwrap()
        .result
}

#[test]
fn table_examples() {
    let t = commutator_table(&derived(6));
    assert_eq!(
        entry(&t, "Y^0", "Y^2"),
        &Decomposition::in_span(&[(GenKind::Family(1), rat(2))])
    );
    assert_eq!(
        entry(&t, "Y1", "Y3"),
        &Decomposition::in_span(&[(GenKind::Y1, rat(1))])
    );
    for k in 0..=6 {
        assert_eq!(entry(&t, "Y0", &format!("Y^{k}")), &Decomposition::Zero);
    }
    assert_eq!(entry(&t, "Y^3", "Y^5"), &Decomposition::OutsideSpan);
    assert_eq!(entry(&t, "Y0", "Y1").to_string(), "-Y2");
    assert_eq!(entry(&t, "Y^1", "Y^3").to_string(), "2*Y^3");
}

#[test]
fn derived_table_reproduces_every_relation() {
    let checks = check_printed_relations(&derived(6));
    assert!(
        checks.iter().all(|c| c.matches),
        "{:?}",
        checks.iter().find(|c| !c.matches)
    );
    assert_eq!(checks.len(), 6 + 4 * 7 + 15);
}

#[test]
fn printed_table_fails_beyond_linear_family() {
    let checks = check_printed_relations(&printed(6));
    let failing: BTreeSet<(String, String)> = checks
        .iter()
        .filter(|c| !c.matches)
        .map(|c| (c.left.clone(), c.right.clone()))
        .collect();
    for k in 2..=6 {
        assert!(failing.contains(&("Y3".into(), format!("Y^{k}"))));
    }
    assert!(failing.contains(&("Y^1".into(), "Y^2".into())));
    assert!(!failing.contains(&("Y^0".into(), "Y^1".into())));
    assert!(!failing.contains(&("Y1".into(), "Y3".into())));
    assert!(checks
        .iter()
        .filter(|c| !c.matches)
        .all(|c| c.computed == Decomposition::OutsideSpan));
    // where both sources produce spanning brackets, the constants agree
    let d = commutator_table(&derived(6));
    for e in commutator_table(&printed(6)) {
        if e.result != Decomposition::OutsideSpan {
            assert_eq!(
                &e.result,
                entry(&d, &e.left, &e.right),
                "[{}, {}]",
                e.left,
                e.right
            );
        }
    }
}

#[test]
fn closure() {
    assert_eq!(closure_max_k(&derived(6)).unwrap().max_closing_k, Some(2));
    assert_eq!(closure_max_k(&printed(6)).unwrap().max_closing_k, Some(1));
    assert!(matches!(
        closure_max_k(&derived(3)),
        Err(Error::InvalidArgument(_))
    ));
    let g = derived(4);
    assert!(is_closed_subalgebra(&g, &[GenKind::Y1, GenKind::Y2]));
    assert!(!is_closed_subalgebra(&g, &[GenKind::Y0, GenKind::Y1]));
}

#[test]
fn ranks() {
    let g = derived(6);
    let r1 = prolonged_rank(&g, 1, &cfg()).unwrap();
    assert_eq!((r1.variable_count, r1.rank, r1.invariant_count), (7, 7, 0));
    let r2 = prolonged_rank(&g, 2, &cfg()).unwrap();
    assert_eq!((r2.variable_count, r2.rank, r2.invariant_count), (10, 8, 2));
    assert_eq!(r2.samples_used, 8);
    assert_eq!(r2.seed, DEFAULT_SEED);
    let y1 = g.subset(&[GenKind::Y1]);
    assert_eq!(prolonged_rank(&y1, 1, &cfg()).unwrap().rank, 1);
    let k3 = derived(3);
    assert_eq!(prolonged_rank(&k3, 1, &cfg()).unwrap().rank, 7);
    // the order-2 rank needs the fourth Taylor coefficient
    assert_eq!(prolonged_rank(&k3, 2, &cfg()).unwrap().rank, 7);
    assert_eq!(prolonged_rank(&derived(4), 2, &cfg()).unwrap().rank, 8);
}

#[test]
fn rank_determinism() {
    let g = derived(4);
    let a = prolonged_rank(&g, 2, &cfg()).unwrap();
    let b = prolonged_rank(&g, 2, &cfg()).unwrap();
    assert_eq!(a, b);
    let c = SamplingConfig {
        seed: 7,
        samples: 1,
        ..cfg()
    };
    assert_eq!(prolonged_rank(&g, 2, &c).unwrap().rank, 8);
    let zero = SamplingConfig {
        samples: 0,
        ..cfg()
    };
    assert!(prolonged_rank(&g, 1, &zero).is_err());
}

#[test]
fn rank_monotone_in_k_and_l() {
    let g = derived(12);
    let mut prev_l = Vec::new();
    for l in 0..=2 {
        let mut prev = 0;
        let mut row = Vec::new();
        for k in 0..=12 {
            let r = prolonged_rank(&g.truncated(k), l, &cfg()).unwrap().rank;
            assert!(r >= prev, "K monotone at L={l}, K={k}");
            prev = r;
            row.push(r);
        }
        if !prev_l.is_empty() {
            assert!(
                row.iter().zip(&prev_l).all(|(a, b)| a >= b),
                "L monotone at L={l}"
            );
        }
        prev_l = row;
    }
}

#[test]
fn manifold_ranks() {
    let g = derived(6);
    let r = parse("sigma*f_sigma - f", &Chart::jet(1)).unwrap();
    assert_eq!(rank_on_manifold(&g, &r, 1, &cfg()).unwrap().rank, 6);
    let zero = parse("0", &Chart::jet(1)).unwrap();
    assert_eq!(
        rank_on_manifold(&g, &zero, 2, &cfg()).unwrap(),
        prolonged_rank(&g, 2, &cfg()).unwrap()
    );
    let sigma = parse("sigma", &Chart::jet(1)).unwrap();
    assert!(rank_on_manifold(&g, &sigma, 1, &cfg()).unwrap().rank <= 7);
    let bad = parse("f^2 + 1", &Chart::jet(1)).unwrap();
    assert_eq!(
        rank_on_manifold(&g, &bad, 1, &cfg()).unwrap_err(),
        Error::NotSolvable
    );
}

#[test]
fn constraint_solving_prefers_constant_coefficient() {
    let chart = JetSpace::new(1).coordinates();
    let s = solve_constraint(&parse("sigma*f_sigma - f", &Chart::jet(1)).unwrap(), &chart)
        .unwrap()
        .unwrap();
    assert_eq!(s.coord, Coord::F);
    assert_eq!(s.value, jet("sigma*f_sigma"));
    let s = solve_constraint(&parse("u*t - 2", &Chart::jet(1)).unwrap(), &chart)
        .unwrap()
        .unwrap();
    assert_eq!(s.coord, Coord::T);
    assert_eq!(s.value, jet("2/u"));
}

#[test]
fn minimal_sets() {
    let g = derived(6);
    let m = minimal_generating_set(&g.generators, 2, &cfg(), false).unwrap();
    assert_eq!(m.len(), 8);
    assert_eq!(prolonged_rank(&g.subset(&m), 2, &cfg()).unwrap().rank, 8);
    let y1 = g.get(GenKind::Y1).unwrap().clone();
    let y2 = g.get(GenKind::Y2).unwrap().clone();
    let dup = [y1.clone(), y2.clone(), y1.clone()];
    assert_eq!(
        minimal_generating_set(&dup, 1, &cfg(), false).unwrap(),
        [GenKind::Y1, GenKind::Y2]
    );
    assert_eq!(
        minimal_generating_set(&dup, 1, &cfg(), true).unwrap(),
        [GenKind::Y1, GenKind::Y2]
    );
    assert_eq!(
        minimal_generating_set(&[y1], 1, &cfg(), false).unwrap(),
        [GenKind::Y1]
    );
    let ex = minimal_generating_set(&g.truncated(5).generators, 2, &cfg(), true).unwrap();
    assert_eq!(ex.len(), 8);
    assert!(minimal_generating_set(&g.generators, 2, &cfg(), true).is_err());
}

#[test]
fn greedy_result_has_no_removable_member() {
    let g = derived(6);
    let m = minimal_generating_set(&g.generators, 2, &cfg(), false).unwrap();
    for i in 0..m.len() {
        let rest: Vec<GenKind> = m
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, k)| *k)
            .collect();
        assert!(prolonged_rank(&g.subset(&rest), 2, &cfg()).unwrap().rank < 8);
    }
}

#[test]
fn invariant_counts() {
    let g = derived(6);
    assert_eq!(invariant_count(&g, 1, &cfg()).unwrap(), 0);
    assert_eq!(invariant_count(&g, 2, &cfg()).unwrap(), 2);
    let empty = GeneratorSet {
        source: Source::Derived,
        truncation: 0,
        generators: vec![],
    };
    assert_eq!(invariant_count(&empty, 1, &cfg()).unwrap(), 7);
}

#[test]
fn stabilization() {
    for (l, rank) in [(0, 5), (1, 7), (2, 8)] {
        let s = stabilized_truncation(Source::Derived, l, &cfg(), 12).unwrap();
        assert_eq!(s.rank, rank, "L={l}");
        assert!(s
            .sweep
            .iter()
            .filter(|(k, _)| *k >= s.k_star)
            .all(|(_, r)| *r == rank));
    }
    assert_eq!(
        stabilized_truncation(Source::Derived, 2, &cfg(), 5).unwrap_err(),
        Error::CapExceeded(5)
    );
}

#[test]
fn decomposition_display() {
    let d = Decomposition::in_span(&[(GenKind::Y1, ratio(-1, 2)), (GenKind::Family(3), rat(2))]);
    assert_eq!(d.to_string(), "-1/2*Y1 + 2*Y^3");
    assert_eq!(
        Decomposition::in_span(&[(GenKind::Y1, rat(0))]),
        Decomposition::Zero
    );
}
