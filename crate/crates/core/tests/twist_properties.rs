//! Twist axioms and coproduct invariants for simplified and generic parameters.

use proptest::prelude::*;
use twistforge::algebra::{AlgebraElement, Generator, PoincareAlgebra};
use twistforge::scalar::ParamScalar;
use twistforge::twist::{
    build_twist, check_coassoc, check_coassoc_all, check_cocycle, coassoc_residual, Twist, TwistCase, TwistSpec,
};

fn g(x: Generator) -> AlgebraElement {
    AlgebraElement::generator(x)
}

#[test]
fn generic_parameters_satisfy_the_cocycle_condition() {
    for case in [TwistCase::I, TwistCase::II] {
        let t = build_twist(&TwistSpec::generic(case).with_order(4)).unwrap();
        let report = check_cocycle(&t);
        assert!(report.pass, "{}", report.to_text());
    }
}

#[test]
fn cocycle_implies_coassociativity_on_every_generator() {
    for case in [TwistCase::I, TwistCase::II] {
        for order in 2..=4 {
            let t = build_twist(&TwistSpec::simplified(case).with_order(order)).unwrap();
            assert!(check_cocycle(&t).pass);
            let report = check_coassoc_all(&t);
            assert_eq!(report.entries.len(), Generator::ALL.len());
            assert!(report.pass, "{case} order {order}: {}", report.to_text());
        }
        let t = build_twist(&TwistSpec::generic(case).with_order(3)).unwrap();
        assert!(check_coassoc_all(&t).pass, "{case} generic");
    }
}

#[test]
fn left_and_right_forms_agree() {
    for case in [TwistCase::I, TwistCase::II] {
        for spec in [TwistSpec::simplified(case), TwistSpec::generic(case).with_order(3)] {
            let agreement = build_twist(&spec).unwrap().form_agreement();
            assert!(agreement.agree, "{case}: {}", agreement.residual);
            assert_eq!(agreement.first_differing_order, None);
        }
    }
}

#[test]
fn twist_fixes_its_commuting_subalgebra_generically() {
    for case in [TwistCase::I, TwistCase::II] {
        let t = build_twist(&TwistSpec::generic(case).with_order(4)).unwrap();
        for x in case.subalgebra() {
            assert_eq!(t.coproduct(&g(x)), g(x).coproduct0().truncated(4), "{case} {x}");
        }
    }
}

#[test]
fn translation_products_are_multiplicative() {
    let t = build_twist(&TwistSpec::simplified(TwistCase::I)).unwrap();
    let alg = t.algebra();
    let (p0, p1) = (g(Generator::P0), g(Generator::P1));
    let lhs = t.coproduct(&alg.mul(&p0, &p1));
    let rhs = alg.tensor_mul(&t.coproduct(&p0), &t.coproduct(&p1)).unwrap();
    assert_eq!(lhs, rhs);
}

fn arb_element(max_len: usize) -> impl Strategy<Value = AlgebraElement> {
    let word = (prop::collection::vec(0usize..Generator::ALL.len(), 1..=max_len), -3i64..=3);
    prop::collection::vec(word, 1..4).prop_map(|words| {
        let alg = PoincareAlgebra::standard();
        let mut out = AlgebraElement::zero();
        for (w, c) in words {
            let mut e = AlgebraElement::scalar(ParamScalar::int(c));
            for k in w {
                e = alg.mul(&e, &AlgebraElement::generator(Generator::ALL[k]));
            }
            out = &out + &e;
        }
        out
    })
}

fn twists() -> &'static [Twist; 3] {
    static TWISTS: std::sync::OnceLock<[Twist; 3]> = std::sync::OnceLock::new();
    TWISTS.get_or_init(|| {
        [
            build_twist(&TwistSpec::trivial(TwistCase::I).with_order(3)).unwrap(),
            build_twist(&TwistSpec::simplified(TwistCase::I).with_order(3)).unwrap(),
            build_twist(&TwistSpec::simplified(TwistCase::II).with_order(3)).unwrap(),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn coassociative_on_random_elements(x in arb_element(3), k in 0usize..3) {
        let t = &twists()[k];
        prop_assert!(coassoc_residual(t, &x).is_zero(), "{}", check_coassoc(t, &x).to_text());
    }

    #[test]
    fn coproduct_is_an_algebra_map(x in arb_element(2), y in arb_element(2), k in 0usize..3) {
        let t = &twists()[k];
        let alg = t.algebra();
        let lhs = t.coproduct(&alg.mul(&x, &y));
        let rhs = alg.tensor_mul(&t.coproduct(&x), &t.coproduct(&y)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
