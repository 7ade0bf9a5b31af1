use std::collections::BTreeMap;

use proptest::prelude::*;

use super::*;
use crate::error::Error;

fn chart() -> Chart {
    Chart::jet(2)
}

fn p(s: &str) -> Expr {
    parse(s, &chart()).unwrap()
}

fn canon(s: &str) -> CanonicalForm {
    p(s).canonicalize().unwrap()
}

fn point(pairs: &[(Coord, Rational)]) -> BTreeMap<Coord, Rational> {
    pairs.iter().cloned().collect()
}

#[test]
fn parse_examples() {
    let r = p("sigma*f_sigma - f");
    assert_eq!(r.canonicalize().unwrap().to_string(), "sigma*f_sigma - f");
    assert_eq!(canon("1/2*u^2").to_string(), "1/2*u^2");
    match parse("u +* f", &chart()) {
        Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 3),
        other => panic!("expected syntax error, got {other:?}"),
    }
}

#[test]
fn parse_errors() {
    assert_eq!(
        parse("u + g", &chart()),
        Err(Error::UnknownIdentifier("g".into()))
    );
    assert_eq!(
        parse("f_uuu", &chart()),
        Err(Error::UnknownIdentifier("f_uuu".into()))
    );
    assert!(matches!(parse("(u", &chart()), Err(Error::Syntax { .. })));
    assert!(matches!(parse("", &chart()), Err(Error::Syntax { .. })));
    assert!(matches!(parse("u^", &chart()), Err(Error::Syntax { .. })));
    assert!(matches!(parse("1/0", &chart()), Err(Error::Syntax { .. })));
    assert_eq!(
        parse("nope(u)", &chart()),
        Err(Error::UnknownIdentifier("nope".into()))
    );
}

#[test]
fn grammar_details() {
    // unary minus binds looser than ^
    assert_eq!(canon("-u^2"), canon("-(u^2)"));
    assert_eq!(canon("u^-1"), canon("1/u"));
    assert_eq!(canon("u^(-2)*u^2"), canon("1"));
    assert_eq!(canon("2/u"), canon("2*u^(-1)"));
    assert_eq!(canon("u - sigma - f"), canon("u - (sigma + f)"));
    assert_eq!(canon("u/sigma/f"), canon("u/(sigma*f)"));
}

#[test]
fn canonicalize_examples() {
    let c = canon("(u^2 - sigma^2)/(u - sigma)");
    assert_eq!(c.numerator(), canon("u + sigma").numerator());
    assert!(c.denominator().is_one());
    let r = canon("sigma*f_sigma - f");
    assert!(r.is_polynomial());
    assert_eq!(canon("f/f"), CanonicalForm::one());
    assert_eq!(canon("0*f"), CanonicalForm::zero());
}

#[test]
fn canonicalize_division_by_zero() {
    assert_eq!(
        p("u/(sigma - sigma)").canonicalize(),
        Err(Error::DivisionByZero)
    );
    assert_eq!(p("(u - u)^(-1)").canonicalize(), Err(Error::DivisionByZero));
}

#[test]
fn denominator_is_monic() {
    let c = canon("1/(2*u - 4*sigma)");
    assert!(c.denominator().leading_coeff() == rat(1));
    assert_eq!(c.to_string(), "1/2/(u - 2*sigma)");
    assert_eq!(p(&c.to_string()).canonicalize().unwrap(), c);
}

#[test]
fn equals_examples() {
    assert!(p("(u+sigma)^2")
        .equals(&p("u^2 + 2*u*sigma + sigma^2"))
        .unwrap());
    assert!(!p("sigma*f_sigma - f")
        .equals(&p("f - sigma*f_sigma"))
        .unwrap());
    assert!(p("sigma^2*f_sigmasigma/(sigma*f_sigma-f)")
        .equals(&p("sigma*(sigma*f_sigmasigma)/(sigma*f_sigma-f)"))
        .unwrap());
}

#[test]
fn diff_partial_examples() {
    let r = p("sigma*f_sigma - f");
    assert!(r
        .diff_partial(Coord::Sigma)
        .unwrap()
        .equals(&p("f_sigma"))
        .unwrap());
    assert!(r
        .diff_partial(Coord::Jet(0, 1))
        .unwrap()
        .equals(&p("sigma"))
        .unwrap());
    let e = p("exp(u)*f");
    assert!(e.diff_partial(Coord::U).unwrap().equals(&e).unwrap());
    // quotient rule
    let q = p("u/(u + sigma)");
    assert!(q
        .diff_partial(Coord::U)
        .unwrap()
        .equals(&p("sigma/(u+sigma)^2"))
        .unwrap());
}

#[test]
fn atom_chain_rule() {
    let e = p("exp(u*sigma)");
    assert!(e
        .diff_partial(Coord::Sigma)
        .unwrap()
        .equals(&p("u*exp(u*sigma)"))
        .unwrap());
    let l = p("log(u^2)");
    assert!(l.diff_partial(Coord::U).unwrap().equals(&p("2/u")).unwrap());
    let s = p("sin(u)");
    let d2 = s
        .diff_partial(Coord::U)
        .unwrap()
        .diff_partial(Coord::U)
        .unwrap();
    assert!(d2.equals(&(-s)).unwrap());
}

#[test]
fn registered_atom() {
    let id = register_atom("sq", "2*arg").unwrap();
    assert_eq!(atom_by_name("sq"), Some(id));
    let e = p("sq(u)");
    assert!(e.diff_partial(Coord::U).unwrap().equals(&p("2*u")).unwrap());
    assert!(register_atom("u", "1").is_err());
}

#[test]
fn phi_depends_on_u() {
    let c = Chart::jet_with_phi(1, 3);
    let e = parse("phi*phi_u", &c).unwrap();
    let d = e.diff_partial(Coord::U).unwrap();
    assert!(d
        .equals(&parse("phi_u^2 + phi*phi_uu", &c).unwrap())
        .unwrap());
}

#[test]
fn substitute_examples() {
    let c = Chart::jet_with_phi(1, 3);
    let e = parse("2*phi_u*sigma", &c).unwrap();
    let k = 2;
    let mut b = BTreeMap::new();
    b.insert(Coord::Phi(1), Expr::integer(k) * p("u").powi(k - 1));
    assert!(e.substitute(&b).equals(&p("4*u*sigma")).unwrap());

    let r = p("sigma*f_sigma - f");
    let mut id = BTreeMap::new();
    id.insert(Coord::U, p("u"));
    assert_eq!(r.substitute(&id), r);

    let mut b = BTreeMap::new();
    b.insert(Coord::F, p("sigma^2"));
    assert!(r
        .substitute(&b)
        .equals(&p("sigma*f_sigma - sigma^2"))
        .unwrap());

    // simultaneous, not sequential
    let mut swap = BTreeMap::new();
    swap.insert(Coord::U, p("sigma"));
    swap.insert(Coord::Sigma, p("u"));
    assert!(p("u - 2*sigma")
        .substitute(&swap)
        .equals(&p("sigma - 2*u"))
        .unwrap());
}

#[test]
fn canonical_substitute_matches_tree() {
    let e = p("exp(u)*f/(u+sigma) + sigma^2");
    let mut b = BTreeMap::new();
    b.insert(Coord::U, p("2*u - 1"));
    b.insert(Coord::F, p("sigma^2"));
    let tree = e.substitute(&b).canonicalize().unwrap();
    let cb = b
        .iter()
        .map(|(k, v)| (*k, v.canonicalize().unwrap()))
        .collect();
    let direct = e.canonicalize().unwrap().substitute(&cb).unwrap();
    assert_eq!(tree, direct);
}

#[test]
fn eval_examples() {
    let none = BTreeMap::new();
    let v = p("sigma*f_sigma - f")
        .eval_at(
            &point(&[
                (Coord::Sigma, rat(2)),
                (Coord::Jet(0, 1), rat(3)),
                (Coord::F, rat(1)),
            ]),
            &none,
        )
        .unwrap();
    assert_eq!(v, rat(5));
    assert_eq!(
        p("1/(sigma - 2)").eval_at(&point(&[(Coord::Sigma, rat(2))]), &none),
        Err(Error::ZeroDenominatorAtPoint)
    );
    assert_eq!(
        p("u^2")
            .eval_at(&point(&[(Coord::U, ratio(-3, 2))]), &none)
            .unwrap(),
        ratio(9, 4)
    );
    assert!(matches!(
        p("u").eval_at(&BTreeMap::new(), &none),
        Err(Error::Unbound(_))
    ));
    let mut atoms = BTreeMap::new();
    atoms.insert("exp".to_string(), rat(3));
    assert_eq!(
        p("2*exp(u)")
            .eval_at(&point(&[(Coord::U, rat(0))]), &atoms)
            .unwrap(),
        rat(6)
    );
}

#[test]
fn printing_reparses() {
    for s in [
        "-3/2*u^2 + sigma/f",
        "(u - sigma)^(-2)*exp(u + 1)",
        "u*(2/3) - (-2)^3",
        "-(u + sigma)*f_sigma",
    ] {
        let e = p(s);
        let again = p(&e.to_string());
        assert!(e.equals(&again).unwrap(), "{s} -> {e}");
        let c = e.canonicalize().unwrap();
        assert_eq!(p(&c.to_string()).canonicalize().unwrap(), c, "{c}");
    }
}

#[test]
fn polynomial_gcd_cancellation_deep() {
    let a = canon("(sigma*f_sigma - f)^3*(u + 1)");
    let b = canon("(sigma*f_sigma - f)^2*(u - sigma)");
    let q = a.div(&b).unwrap();
    assert_eq!(q, canon("(sigma*f_sigma - f)*(u+1)/(u - sigma)"));
}

// Random small expressions over a few coordinates for the ring-law suite.
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
            (inner.clone(), 0i64..3).prop_map(|(a, n)| a.powi(n)),
            (inner.clone(), inner).prop_map(|(a, b)| a - b),
        ]
    })
}

fn arb_point() -> impl Strategy<Value = BTreeMap<Coord, Rational>> {
    (-7i64..=7, -7i64..=7, -7i64..=7, -7i64..=7).prop_map(|(a, b, c, d)| {
        point(&[
            (Coord::U, rat(a)),
            (Coord::Sigma, rat(b)),
            (Coord::F, rat(c)),
            (Coord::Jet(0, 1), rat(d)),
        ])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn addition_commutes(a in arb_expr(), b in arb_expr()) {
        prop_assert_eq!(
            (a.clone() + b.clone()).canonicalize().unwrap(),
            (b + a).canonicalize().unwrap()
        );
    }

    #[test]
    fn multiplication_distributes(a in arb_expr(), b in arb_expr(), c in arb_expr()) {
        let lhs = (a.clone() * (b.clone() + c.clone())).canonicalize().unwrap();
        let rhs = (a.clone() * b + a * c).canonicalize().unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn canonicalize_idempotent(a in arb_expr(), b in arb_expr()) {
        let e = a / (b + Expr::coord(Coord::U) * Expr::coord(Coord::U) + Expr::integer(1));
        if let Ok(c) = e.canonicalize() {
            prop_assert_eq!(c.to_expr().canonicalize().unwrap(), c.clone());
            prop_assert_eq!(parse(&c.to_string(), &chart()).unwrap().canonicalize().unwrap(), c);
        }
    }

    #[test]
    fn equal_forms_evaluate_equal(a in arb_expr(), b in arb_expr(), pt in arb_point()) {
        // (a*b)/b against a, where both sides are defined
        let lhs = (a.clone() * b.clone()) / b.clone();
        if let Ok(true) = lhs.equals(&a) {
            let none = BTreeMap::new();
            if let (Ok(x), Ok(y)) = (lhs.eval_at(&pt, &none), a.eval_at(&pt, &none)) {
                prop_assert_eq!(x, y);
            }
        }
        let c = a.canonicalize().unwrap();
        let none = BTreeMap::new();
        prop_assert_eq!(c.eval(&pt, &none).unwrap(), a.eval_at(&pt, &none).unwrap());
    }

    #[test]
    fn partials_commute(a in arb_expr(), b in arb_expr()) {
        let e = a / (b * Expr::coord(Coord::Sigma) + Expr::coord(Coord::U) + Expr::integer(5));
        if let Ok(c) = e.canonicalize() {
            let coords = [Coord::U, Coord::Sigma, Coord::F, Coord::Jet(0, 1)];
            for v in coords {
                for w in coords {
                    prop_assert_eq!(c.partial(v).partial(w), c.partial(w).partial(v));
                }
            }
        }
    }

    #[test]
    fn product_over_gcd_is_exact(a in arb_expr(), b in arb_expr()) {
        let (a, b) = (a.canonicalize().unwrap(), b.canonicalize().unwrap());
        let (pa, pb) = (a.numerator(), b.numerator());
        let g = gcd(pa, pb);
        if !pa.is_zero() || !pb.is_zero() {
            prop_assert!(pa.exact_div(&g).is_some());
            prop_assert!(pb.exact_div(&g).is_some());
        }
    }
}
