mod common;

use limp::disjoint::{alg_disjoint, DisjointVerdict};
use limp::oracle::{enumerate_types, standard_bases, DeclOracle};
use limp::parser::{parse_expr, parse_type};
use limp::subtype::{alg_subtype, coercion_type};
use limp::syntax::erase_type;
use limp::target::{canonical_term, eval, observe, typecheck};
use limp::typing::{check, infer};
use limp::{Context, Expr, Term, Type};
use proptest::prelude::*;

fn arb_type() -> impl Strategy<Value = Type> {
    let leaf = prop_oneof![Just(Type::Int), Just(Type::Bool), Just(Type::Top)];
    leaf.prop_recursive(3, 7, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::arrow(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Type::and(a, b)),
        ]
    })
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-20i64..100).prop_map(Expr::Int),
        any::<bool>().prop_map(Expr::Bool),
        Just(Expr::Top),
        prop_oneof![Just("x"), Just("y"), Just("env")].prop_map(Expr::var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (prop_oneof![Just("x"), Just("f")], inner.clone()).prop_map(|(x, b)| Expr::lam(x, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::app(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::merge(a, b)),
            (inner, arb_type()).prop_map(|(e, t)| Expr::anno(e, t)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn types_print_and_parse_back(t in arb_type()) {
        prop_assert!(t.size() <= 15);
        prop_assert_eq!(parse_type(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn expressions_print_and_parse_back(e in arb_expr()) {
        let printed = e.to_string();
        prop_assert_eq!(parse_expr(&printed).unwrap(), e, "{}", printed);
    }

    #[test]
    fn coercions_are_well_typed(a in arb_type(), b in arb_type()) {
        if let Ok(c) = alg_subtype(&a, &b) {
            prop_assert_eq!(typecheck(&[], c.term()), Ok(coercion_type(&a, &b)));
        }
    }
}

#[test]
fn every_type_up_to_seven_round_trips() {
    for t in enumerate_types(7, &standard_bases()) {
        assert_eq!(parse_type(&t.to_string()).unwrap(), t);
    }
}

#[test]
fn coercions_up_to_size_five_type_check() {
    let tys = enumerate_types(5, &standard_bases());
    for a in &tys {
        for b in &tys {
            if let Ok(c) = alg_subtype(a, b) {
                assert_eq!(
                    typecheck(&[], c.term()),
                    Ok(coercion_type(a, b)),
                    "{a} <: {b}"
                );
            }
        }
    }
}

#[test]
fn disjointness_witnesses_are_common_supertypes() {
    let tys = enumerate_types(5, &standard_bases());
    let mut checked = 0;
    for (i, a) in tys.iter().enumerate() {
        for b in tys.iter().skip(i) {
            if let DisjointVerdict::NotDisjoint { witness } = alg_disjoint(a, b) {
                // spot-check with the declarative oracle on a sample
                if checked % 97 == 0 {
                    let o = DeclOracle::new(3, &[a.clone(), b.clone(), witness.clone()]);
                    assert!(o.derivable(a, &witness, 32), "{a} <: {witness}");
                    assert!(o.derivable(b, &witness, 32), "{b} <: {witness}");
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

fn generated_programs(seed: u64, count: usize) -> Vec<(Expr, Type)> {
    let mut rng = common::rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let ty = common::random_type_upto(&mut rng, 5);
        let mut g = common::ExprGen::new(&mut rng);
        let e = g.infer(&[], &ty, 4);
        out.push((e, ty));
    }
    out
}

#[test]
fn preservation_for_generated_programs() {
    let mut well_typed = 0;
    for (e, _) in generated_programs(7, 1500) {
        let Ok((ty, t)) = infer(&Context::new(), &e) else {
            continue;
        };
        well_typed += 1;
        let erased = erase_type(&ty);
        assert_eq!(typecheck(&[], &t), Ok(erased.clone()), "{e}");
        let v = eval(&t).unwrap_or_else(|f| panic!("{e}: {f}"));
        assert!(v.matches(&erased), "{e} gave {v}");
    }
    assert!(
        well_typed >= 1000,
        "only {well_typed} generated programs were well typed"
    );
}

fn observations_of(t: &Term, ty: &Type) -> Vec<String> {
    let v = eval(t).unwrap();
    observe(&v, ty)
        .unwrap()
        .into_iter()
        .map(|(p, v)| format!("{p:?}={v}"))
        .collect()
}

#[test]
fn checking_subsumes_inference() {
    for (e, _) in generated_programs(11, 600) {
        let Ok((ty, t)) = infer(&Context::new(), &e) else {
            continue;
        };
        let checked = check(&Context::new(), &e, &ty).unwrap_or_else(|err| panic!("{e}: {err}"));
        assert_eq!(
            observations_of(&t, &ty),
            observations_of(&checked, &ty),
            "{e}"
        );
    }
}

#[test]
fn annotation_is_idempotent() {
    let mut rng = common::rng(3);
    let mut both = 0;
    for (k, (e, ty)) in generated_programs(13, 600).into_iter().enumerate() {
        let a = if k % 2 == 0 {
            ty
        } else {
            common::random_type_upto(&mut rng, 5)
        };
        let once = Expr::anno(e.clone(), a.clone());
        let twice = Expr::anno(once.clone(), a.clone());
        let r1 = infer(&Context::new(), &once);
        let r2 = infer(&Context::new(), &twice);
        assert_eq!(r1.is_ok(), r2.is_ok(), "{once}");
        if let (Ok((_, t1)), Ok((_, t2))) = (r1, r2) {
            assert_eq!(observations_of(&t1, &a), observations_of(&t2, &a), "{once}");
            both += 1;
        }
    }
    assert!(both >= 250, "{both}");
}

#[test]
fn canonical_terms_have_their_types() {
    for t in enumerate_types(5, &standard_bases()) {
        assert_eq!(typecheck(&[], &canonical_term(&t)), Ok(erase_type(&t)));
    }
}

#[test]
fn transitivity_and_modus_ponens_up_to_size_five() {
    let tys = enumerate_types(5, &standard_bases());
    let n = tys.len();
    let sub: Vec<bool> = tys
        .iter()
        .flat_map(|a| tys.iter().map(move |b| limp::subtype::is_subtype(a, b)))
        .collect();
    for i in 0..n {
        for j in (0..n).filter(|&j| sub[i * n + j]) {
            for k in (0..n).filter(|&k| sub[j * n + k]) {
                assert!(sub[i * n + k], "{} <: {} <: {}", tys[i], tys[j], tys[k]);
            }
        }
    }
    for a in &tys {
        for b in &tys {
            let lhs = Type::and(Type::arrow(a.clone(), b.clone()), a.clone());
            assert!(limp::subtype::is_subtype(&lhs, b), "{lhs} <: {b}");
        }
    }
}
