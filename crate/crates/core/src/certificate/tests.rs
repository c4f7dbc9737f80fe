use super::*;
use crate::datum::{validate, Mode};
use crate::fixtures::{holder, loomis_whitney, loomis_whitney_with, young};
use crate::ratlin::{rat, rat_int, RatMatrix};

fn light() -> SearchBudget {
    SearchBudget::light()
}

fn young_balanced() -> CheckedDatum {
    validate(young(&[rat(1, 2), rat(1, 2), rat(1, 1)], Mode::Global)).unwrap()
}

#[test]
fn holder_certificate_is_the_base_case() {
    let d = validate(holder(&[rat(1, 3), rat(1, 3), rat(1, 3)])).unwrap();
    let cert = build_certificate(&d, &light()).expect("feasible fixture certifies");
    assert_eq!(cert.node, CertNode::HolderBase);
    verify_certificate(&d, &cert).unwrap();
}

#[test]
fn young_certificate_splits_at_the_difference_kernel() {
    let d = young_balanced();
    let cert = build_certificate(&d, &light()).expect("feasible fixture certifies");
    match &cert.node {
        CertNode::CriticalSplit {
            witness,
            inner_factors,
            outer_factors,
            inner,
            outer,
        } => {
            // W = kernel(x − y) = span{(1,1)}; the third factor vanishes on
            // it and is carried entirely by the outer child.
            assert_eq!(witness, &Subspace::from_i64_rows(2, &[&[1, 1]]));
            assert_eq!(inner_factors, &vec![0, 1]);
            assert_eq!(outer_factors, &vec![2]);
            assert_eq!(inner.node, CertNode::HolderBase);
            assert_eq!(outer.node, CertNode::HolderBase);
            assert_eq!(
                inner.datum.exponents().as_slice(),
                &[rat(1, 2), rat(1, 2)]
            );
            assert_eq!(outer.datum.exponents().as_slice(), &[rat_int(1)]);
        }
        other => panic!("expected a critical split, found {other:?}"),
    }
    verify_certificate(&d, &cert).unwrap();
}

#[test]
fn loomis_whitney_certificate_recurses_through_axes() {
    let d = validate(loomis_whitney(3, rat(1, 2))).unwrap();
    let cert = build_certificate(&d, &light()).expect("feasible fixture certifies");
    assert!(matches!(cert.node, CertNode::CriticalSplit { .. }));
    assert!(cert.depth() <= d.ambient_dim() + d.factor_count());
    verify_certificate(&d, &cert).unwrap();
}

#[test]
fn interior_exponents_build_convex_combinations() {
    // All proper subspaces of the convolution datum are subcritical at
    // t = (2/3, 2/3, 2/3), so the builder must interpolate between the
    // three extreme points.
    let d = validate(young(&[rat(2, 3), rat(2, 3), rat(2, 3)], Mode::Global)).unwrap();
    let cert = build_certificate(&d, &light()).expect("feasible fixture certifies");
    match &cert.node {
        CertNode::ConvexCombination { terms } => {
            assert_eq!(terms.len(), 3);
            for term in terms {
                assert_eq!(term.weight, rat(1, 3));
                // Each extreme point has a zero coordinate, which makes one
                // kernel line critical, so the children split first.
                assert!(matches!(term.child.node, CertNode::CriticalSplit { .. }));
                assert!(term.exponents.contains(&rat(0, 1)));
            }
        }
        other => panic!("expected a convex combination, found {other:?}"),
    }
    verify_certificate(&d, &cert).unwrap();
}

#[test]
fn split_bookkeeping_identities() {
    // At every split: child ambients add to the parent's, and for every
    // factor the inner image dimension and outer target dimension add to
    // the parent target dimension; both children are exactly balanced.
    fn walk(cert: &Certificate) {
        if let CertNode::CriticalSplit {
            witness,
            inner,
            outer,
            ..
        } = &cert.node
        {
            let d = &cert.datum;
            assert_eq!(
                inner.datum.ambient_dim() + outer.datum.ambient_dim(),
                d.ambient_dim()
            );
            for j in 0..d.factor_count() {
                let u = crate::ratlin::image(d.map(j), witness).unwrap().dim();
                let outer_dim = d.target_dim(j) - u;
                assert_eq!(u + outer_dim, d.target_dim(j));
            }
            assert!(inner.datum.homogeneity_gap().is_zero());
            assert!(outer.datum.homogeneity_gap().is_zero());
            walk(inner);
            walk(outer);
        }
    }
    for datum in [
        young_balanced(),
        validate(loomis_whitney(3, rat(1, 2))).unwrap(),
        validate(loomis_whitney_balanced_4()).unwrap(),
    ] {
        let cert = build_certificate(&datum, &light()).expect("feasible fixture certifies");
        walk(&cert);
    }
}

fn loomis_whitney_balanced_4() -> crate::datum::BLDatum {
    crate::fixtures::loomis_whitney_balanced(4)
}

#[test]
fn build_refuses_infeasible_and_non_global_data() {
    let skewed = validate(loomis_whitney_with(3, &[rat(1, 1), rat(1, 4), rat(1, 4)])).unwrap();
    assert!(build_certificate(&skewed, &light()).is_none());

    let local = validate(young(&[rat(1, 2), rat(1, 2), rat(1, 1)], Mode::Local)).unwrap();
    assert!(build_certificate(&local, &light()).is_none());
}

#[test]
fn verifier_rejects_tampered_weights() {
    let d = validate(young(&[rat(2, 3), rat(2, 3), rat(2, 3)], Mode::Global)).unwrap();
    let cert = build_certificate(&d, &light()).unwrap();
    let mut tampered = cert.clone();
    if let CertNode::ConvexCombination { terms } = &mut tampered.node {
        terms[0].weight += rat(1, 100);
    } else {
        panic!("fixture changed shape");
    }
    let err = verify_certificate(&d, &tampered).unwrap_err();
    assert!(err.reason.contains("sum to one"), "{err}");
}

#[test]
fn verifier_rejects_non_critical_witness() {
    let d = young_balanced();
    let cert = build_certificate(&d, &light()).unwrap();
    let mut tampered = cert.clone();
    if let CertNode::CriticalSplit { witness, .. } = &mut tampered.node {
        // The first axis is subcritical for these exponents.
        *witness = Subspace::coordinate_axis(2, 0);
    } else {
        panic!("fixture changed shape");
    }
    let err = verify_certificate(&d, &tampered).unwrap_err();
    assert!(err.reason.contains("not critical"), "{err}");
    assert_eq!(err.path, "root");
}

#[test]
fn verifier_rejects_wrong_datum() {
    let d = young_balanced();
    let cert = build_certificate(&d, &light()).unwrap();
    let other = validate(young(&[rat(1, 1), rat(1, 2), rat(1, 2)], Mode::Global)).unwrap();
    assert!(verify_certificate(&other, &cert).is_err());
}

#[test]
fn certificate_json_round_trip() {
    let d = young_balanced();
    let cert = build_certificate(&d, &light()).unwrap();
    let text = certificate_to_json(&cert);
    assert!(text.contains(CERT_FORMAT_VERSION));
    let back = certificate_from_json(&text).unwrap();
    assert_eq!(back, cert);
    verify_certificate(&d, &back).unwrap();

    // A corrupted weight string fails at parse time.
    let bad = text.replace("\"1/2\"", "\"0.5\"");
    assert!(certificate_from_json(&bad).is_err());
}

#[test]
fn witness_examples_from_the_lopsided_fixture() {
    let d = validate(loomis_whitney_with(3, &[rat(1, 1), rat(1, 4), rat(1, 4)])).unwrap();
    let w = build_witness(&d, &Subspace::coordinate_axis(3, 0)).unwrap();
    assert_eq!(w.violation, Violation::BigRadius);
    assert_eq!(w.v_big, Subspace::coordinate_axis(3, 0));
    assert_eq!(w.big_radius_exponent, rat(1, 2));
    verify_witness(&d, &w).unwrap();

    let local = validate(loomis_whitney(3, rat(2, 3))).unwrap();
    let local = validate(crate::datum::BLDatum {
        mode: Mode::Local,
        ..local.datum().clone()
    })
    .unwrap();
    let w = build_witness(&local, &Subspace::zero(3)).unwrap();
    assert_eq!(w.violation, Violation::SmallRadius);
    assert_eq!(w.small_radius_exponent, rat_int(-1));
    verify_witness(&local, &w).unwrap();

    // A critical subspace is not a violation.
    let balanced = validate(loomis_whitney(3, rat(1, 2))).unwrap();
    assert_eq!(
        build_witness(&balanced, &Subspace::coordinate_axis(3, 0)),
        Err(WitnessError::NotAViolation)
    );
}

#[test]
fn witness_saturation_closes_under_preimages() {
    // One map that forgets the first two coordinates: the first axis has
    // zero image, but so does the whole kernel plane. Closing under
    // preimages keeps the images and doubles the dimension, strengthening
    // the exponent without invalidating anything.
    let d = validate(crate::datum::BLDatum::new(
        3,
        vec![RatMatrix::from_i64_rows(&[&[0, 0, 1]])],
        crate::datum::ExponentVector::from_i64_pairs(&[(1, 4)]),
        Mode::Amalgam,
    ))
    .unwrap();
    let w = build_witness(&d, &Subspace::coordinate_axis(3, 0)).unwrap();
    assert_eq!(w.violation, Violation::BigRadius);
    assert_eq!(w.v_big, Subspace::coordinate_span(3, &[0, 1]));
    assert_eq!(w.big_radius_exponent, rat_int(2));
    verify_witness(&d, &w).unwrap();
}

#[test]
fn verifier_rejects_tampered_witness() {
    let d = validate(loomis_whitney_with(3, &[rat(1, 1), rat(1, 4), rat(1, 4)])).unwrap();
    let w = build_witness(&d, &Subspace::coordinate_axis(3, 0)).unwrap();

    let mut tampered = w.clone();
    tampered.big_radius_exponent = rat(3, 4);
    assert!(verify_witness(&d, &tampered).is_err());

    // A big-radius claim with a zero big part must be rejected.
    let mut wrong_mode = w.clone();
    wrong_mode.v = Subspace::zero(3);
    wrong_mode.v_big = Subspace::zero(3);
    wrong_mode.v_small = Subspace::zero(3);
    wrong_mode.big_radius_exponent = rat_int(0);
    wrong_mode.small_radius_exponent = f2(&d, &Subspace::zero(3)).unwrap();
    assert!(verify_witness(&d, &wrong_mode).is_err());
}

#[test]
fn witness_dto_round_trip() {
    let d = validate(loomis_whitney_with(3, &[rat(1, 1), rat(1, 4), rat(1, 4)])).unwrap();
    let w = build_witness(&d, &Subspace::coordinate_axis(3, 0)).unwrap();
    let dto = witness_to_dto(&w);
    let back = witness_from_dto(3, &dto).unwrap();
    assert_eq!(back, w);
}
