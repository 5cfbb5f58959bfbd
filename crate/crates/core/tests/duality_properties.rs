//! Invariants of derived relation tables, including general parameters where
//! no closed-form reference exists.

use twistforge::algebra::metric;
use twistforge::duality::{
    check_jacobi, classify_algebra, cross_commutator, dual_brackets, graded_spec, iso2_printed_table, preset_table,
    relation_table, relation_table_from, ClassLabel, CoproductTable, DualityError, PhaseSpaceGenerator, RelationTable,
};
use twistforge::momentum::MomentumFunction;
use twistforge::scalar::{GaussRat, Mono, Param, ParamScalar, Poly};
use twistforge::twist::{build_twist, TwistCase, TwistSpec};
use PhaseSpaceGenerator::{P, X};

/// All parameters symbolic except the Lorentz-Lorentz ones (`alphap`,
/// `gammap`), which pull Lorentz generators into the translation coproducts.
fn closing(case: TwistCase, order: u32) -> TwistSpec {
    let lorentz = match case {
        TwistCase::I => Param::AlphaP,
        TwistCase::II => Param::GammaP,
    };
    TwistSpec::generic(case).with(lorentz, ParamScalar::zero()).with_order(order)
}

fn generic_tables(order: u32) -> Vec<(TwistSpec, RelationTable)> {
    [TwistCase::I, TwistCase::II]
        .into_iter()
        .map(|case| {
            let spec = closing(case, order);
            let table = relation_table(&spec).unwrap();
            (spec, table)
        })
        .collect()
}

#[test]
fn momenta_commute_and_brackets_are_antisymmetric_for_general_parameters() {
    for (spec, t) in generic_tables(3) {
        for a in PhaseSpaceGenerator::all() {
            for b in PhaseSpaceGenerator::all() {
                assert_eq!(t.get(a, b), t.get(b, a).neg(), "{} [{a},{b}]", spec.case);
                if !a.is_coordinate() && !b.is_coordinate() {
                    assert!(t.get(a, b).is_zero());
                }
            }
        }
    }
}

#[test]
fn lorentz_lorentz_parameters_are_reported_not_derived() {
    for case in [TwistCase::I, TwistCase::II] {
        let err = relation_table(&TwistSpec::generic(case).with_order(3)).unwrap_err();
        assert!(matches!(err, DualityError::OpenTranslationSector(..)), "{err}");
    }
}

#[test]
fn dual_brackets_are_antisymmetric_and_satisfy_jacobi() {
    for case in [TwistCase::I, TwistCase::II] {
        for spec in [TwistSpec::simplified(case), closing(case, 3)] {
            let coproducts = CoproductTable::new(build_twist(&spec).unwrap()).unwrap();
            let k = dual_brackets(&coproducts).unwrap();
            for mu in 0..4 {
                for nu in 0..4 {
                    for lambda in 0..4 {
                        assert_eq!(k[mu][nu][lambda], -&k[nu][mu][lambda]);
                    }
                }
            }
            let table = relation_table_from(&coproducts, format!("{case}")).unwrap();
            let report = check_jacobi(&table);
            assert!(report.pass, "{case}: {}", report.to_text());
        }
    }
}

#[test]
fn trivial_twist_gives_the_canonical_cross_relations() {
    let hbar = ParamScalar::param(Param::Hbar);
    for case in [TwistCase::I, TwistCase::II] {
        let coproducts = CoproductTable::new(build_twist(&TwistSpec::trivial(case)).unwrap()).unwrap();
        for mu in 0..4 {
            for nu in 0..4 {
                let (value, closed) = cross_commutator(mu, nu, &coproducts);
                let expected = if mu == nu {
                    MomentumFunction::scalar(&hbar.scale(&GaussRat::from_parts((0, 1), (-metric(mu), 1))))
                } else {
                    MomentumFunction::zero()
                };
                assert!(closed);
                assert_eq!(value, expected, "[p{mu}, x{nu}]");
            }
        }
    }
}

/// Multiplies every monomial by `s^k`, `k` its deformation degree.
fn grade(p: &Poly) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        let mut scaled = *m;
        for _ in 0..m.deformation_degree() {
            scaled = scaled.mul(&Mono::param(Param::Scale));
        }
        out.add_term(scaled, c.clone());
    }
    out
}

#[test]
fn scaling_parameters_grades_every_relation() {
    let order = 3;
    for case in [TwistCase::I, TwistCase::II] {
        for spec in [TwistSpec::simplified(case).with_order(order), closing(case, order)] {
            let plain = relation_table(&spec).unwrap();
            let graded = relation_table(&graded_spec(&spec)).unwrap();
            let s = ParamScalar::param(Param::Scale);
            for (a, b) in RelationTable::display_pairs() {
                let (u, v) = (plain.get(a, b), graded.get(a, b));
                for (cu, cv) in u.linear.iter().zip(&v.linear) {
                    assert_eq!(cv, &cu.graded(), "{case} [{a},{b}]");
                    if cu.max_deformation_degree() == Some(1) {
                        assert_eq!(cv, &(&s * cu));
                    }
                }
                let fu = u.function.expand(order).unwrap().polynomial_part();
                let fv = v.function.expand(order).unwrap().polynomial_part();
                for k in 1..=order {
                    assert_eq!(fv.deformation_part(k), grade(&fu.deformation_part(k)), "{case} [{a},{b}] degree {k}");
                }
                assert_eq!(fv.deformation_part(0), fu.deformation_part(0));
            }
        }
    }
}

#[test]
fn classification_of_presets() {
    assert_eq!(classify_algebra(&preset_table("iso2").unwrap()), ClassLabel::Iso2);
    assert_eq!(classify_algebra(&preset_table("iso11").unwrap()), ClassLabel::Iso11);
    assert_eq!(classify_algebra(&preset_table("trivial").unwrap()), ClassLabel::Abelian);
    assert!(!check_jacobi(&iso2_printed_table().unwrap()).pass);
}

#[test]
fn case_ii_annotation_records_the_momentum_misprint() {
    let t = preset_table("case-ii").unwrap();
    let note = t.annotations.iter().find(|a| a.pair == ["p3", "p0"]).expect("annotation");
    assert!(note.printed.contains("sinh"));
    assert!(t.get(P(3), P(0)).is_zero());
    assert!(!t.get(P(3), X(0)).is_zero());
}
