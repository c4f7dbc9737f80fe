use num_traits::Zero;

use super::*;
use crate::certificate::Violation;
use crate::datum::{validate, Mode};
use crate::fixtures::{holder, loomis_whitney, loomis_whitney_with, young, young_discrete};
use crate::ratlin::{mod_p_reduce, rat, rat_int, rat_zero, RatMatrix, Subspace};

fn lw_half() -> crate::datum::CheckedDatum {
    validate(loomis_whitney(3, rat(1, 2))).unwrap()
}

fn lw_lopsided() -> crate::datum::CheckedDatum {
    validate(loomis_whitney_with(
        3,
        &[rat(1, 1), rat(1, 4), rat(1, 4)],
    ))
    .unwrap()
}

#[test]
fn f1_on_loomis_whitney_axis() {
    let d = lw_half();
    let axis = Subspace::coordinate_axis(3, 0);
    // Images have dimensions (0, 1, 1): (1/2)(0+1+1) − 1 = 0.
    assert_eq!(f1(&d, &axis).unwrap(), rat_zero());
    assert_eq!(f1(&d, &Subspace::zero(3)).unwrap(), rat_zero());
}

#[test]
fn f1_detects_supercritical_axis() {
    let d = lw_lopsided();
    let axis = Subspace::coordinate_axis(3, 0);
    // 1·0 + (1/4)·1 + (1/4)·1 − 1 = −1/2.
    assert_eq!(f1(&d, &axis).unwrap(), rat(-1, 2));
}

#[test]
fn f2_examples() {
    // f2({0}) = c for any datum.
    let d = validate(loomis_whitney(3, rat(1, 3))).unwrap();
    assert_eq!(f2(&d, &Subspace::zero(3)).unwrap(), d.homogeneity_gap());
    assert_eq!(d.homogeneity_gap(), rat_int(1));
    // f2(H) = f1(H) + c = −1 + 1 = 0.
    assert_eq!(f2(&d, &Subspace::full(3)).unwrap(), rat_zero());

    // t = 2/3: f2({0}) = 3 − 3·(2/3)·2 = −1, a small-scale violation.
    let d = validate(loomis_whitney(3, rat(2, 3))).unwrap();
    assert_eq!(f2(&d, &Subspace::zero(3)).unwrap(), rat_int(-1));
}

#[test]
fn lattice_closure_trivial_and_young() {
    let budget = SearchBudget::default();
    let (closed, truncated) = lattice_closure(&[Subspace::zero(2), Subspace::full(2)], &budget);
    assert_eq!(closed.len(), 2);
    assert!(!truncated);

    // Young kernels: three distinct lines in the plane. Pairwise sums give
    // the plane, intersections the origin: exactly five subspaces.
    let seeds = vec![
        Subspace::zero(2),
        Subspace::full(2),
        Subspace::coordinate_axis(2, 1),
        Subspace::coordinate_axis(2, 0),
        Subspace::from_i64_rows(2, &[&[1, 1]]),
    ];
    let (closed, _) = lattice_closure(&seeds, &budget);
    assert_eq!(closed.len(), 5);
}

#[test]
fn lattice_closure_three_generic_lines() {
    // Brute-force oracle: keep joining until nothing new appears, tracking
    // the family in a plain vector.
    let lines = vec![
        Subspace::coordinate_axis(3, 0),
        Subspace::coordinate_axis(3, 1),
        Subspace::from_i64_rows(3, &[&[1, 1, 1]]),
    ];
    let mut oracle: Vec<Subspace> = lines.clone();
    loop {
        let mut new = Vec::new();
        for a in &oracle {
            for b in &oracle {
                for candidate in [a.sum(b).unwrap(), a.intersect(b).unwrap()] {
                    if !oracle.contains(&candidate) && !new.contains(&candidate) {
                        new.push(candidate);
                    }
                }
            }
        }
        if new.is_empty() {
            break;
        }
        oracle.extend(new);
    }
    assert_eq!(oracle.len(), 8);

    let (closed, truncated) = lattice_closure(&lines, &SearchBudget::default());
    assert!(!truncated);
    assert_eq!(closed.len(), 8);
    for s in &oracle {
        assert!(closed.contains(s));
    }
}

#[test]
fn scan_counts_subspaces_of_f2_cubed() {
    let d = lw_half();
    let scan = grassmannian_scan_mod_p(&d, 2).unwrap();
    // Gaussian binomial sum 1 + 7 + 7 + 1.
    assert_eq!(scan.subspaces_enumerated, 16);
    assert_eq!(scan.min_f1, rat_zero());
}

#[test]
fn scan_finds_the_lopsided_violation() {
    let d = lw_lopsided();
    let scan = grassmannian_scan_mod_p(&d, 2).unwrap();
    assert_eq!(scan.min_f1, rat(-1, 2));
    // The minimizing profile is the first axis: dims (1, (0,1,1)).
    assert!(scan
        .argmin_profiles
        .iter()
        .any(|p| p.dim_v == 1 && p.image_dims == vec![0, 1, 1]));
    let rep = &scan.representatives[0];
    let lifted = lift_witness(&d, rep).expect("violation lifts exactly");
    assert_eq!(lifted, Subspace::coordinate_axis(3, 0));
}

#[test]
fn scan_rejects_oversized_ambient() {
    let maps = vec![RatMatrix::identity(7)];
    let d = validate(crate::datum::BLDatum::new(
        7,
        maps,
        crate::datum::ExponentVector::from_i64_pairs(&[(1, 1)]),
        Mode::Global,
    ))
    .unwrap();
    assert!(matches!(
        grassmannian_scan_mod_p(&d, 2),
        Err(EngineError::AmbientTooLarge { n: 7, .. })
    ));
}

#[test]
fn spurious_fp_violation_does_not_lift() {
    // Both maps reduce to [1, 0] at p = 3, so the line through e2 drops
    // every image dimension mod 3 while its lift is subcritical over Q. The
    // lift must be refused and the scan cannot certify exhaustiveness.
    let d = validate(crate::datum::BLDatum::new(
        2,
        vec![
            RatMatrix::from_i64_rows(&[&[1, 3]]),
            RatMatrix::from_i64_rows(&[&[1, -3]]),
        ],
        crate::datum::ExponentVector::from_i64_pairs(&[(1, 1), (1, 1)]),
        Mode::Discrete,
    ))
    .unwrap();
    let scan = grassmannian_scan_mod_p(&d, 3).unwrap();
    assert_eq!(scan.min_f1, rat_int(-1));
    for rep in &scan.representatives {
        assert!(lift_witness(&d, rep).is_none());
    }
    // The exact engine is not fooled: the explored minimum over Q is 0, but
    // the failed lifts mean the scans cannot certify it.
    let result = min_f1(&d, Domain::AllOfH, &SearchBudget::light());
    assert_eq!(result.explored_min, rat_zero());
    assert!(!result.exhaustive);
}

#[test]
fn min_f1_examples() {
    // Three identity factors on a line: only {0} and H exist, f1(H) = 0.
    let d = validate(holder(&[rat(1, 3), rat(1, 3), rat(1, 3)])).unwrap();
    let result = min_f1(&d, Domain::AllOfH, &SearchBudget::light());
    assert_eq!(result.explored_min, rat_zero());
    assert!(result.exhaustive);

    let result = min_f1(&lw_half(), Domain::AllOfH, &SearchBudget::light());
    assert_eq!(result.explored_min, rat_zero());
    assert!(result.exhaustive);
    // Critical witnesses include all three coordinate axes.
    for axis in 0..3 {
        assert!(result
            .witnesses
            .contains(&Subspace::coordinate_axis(3, axis)));
    }

    let result = min_f1(&lw_lopsided(), Domain::AllOfH, &SearchBudget::light());
    assert_eq!(result.explored_min, rat(-1, 2));
    assert!(result.exhaustive);
    assert_eq!(result.witnesses, vec![Subspace::coordinate_axis(3, 0)]);
}

#[test]
fn decide_young_global_feasible() {
    let d = validate(young(&[rat(1, 2), rat(1, 2), rat(1, 1)], Mode::Global)).unwrap();
    match decide(&d, &SearchBudget::light()) {
        Verdict::Feasible(FeasibleEvidence::Certificate(cert)) => {
            crate::certificate::verify_certificate(&d, &cert).unwrap();
        }
        other => panic!("expected a certificate, found {other:?}"),
    }
}

#[test]
fn decide_young_global_homogeneity_violation() {
    let d = validate(young(&[rat(1, 1), rat(1, 1), rat(1, 1)], Mode::Global)).unwrap();
    match decide(&d, &SearchBudget::light()) {
        Verdict::Infeasible(w) => {
            // c = −1: the zero subspace violates the small-scale condition.
            assert_eq!(w.violation, Violation::SmallRadius);
            assert_eq!(w.small_radius_exponent, rat_int(-1));
            crate::certificate::verify_witness(&d, &w).unwrap();
        }
        other => panic!("expected infeasible, found {other:?}"),
    }
}

#[test]
fn decide_young_discrete_feasible() {
    let d = validate(crate::datum::discrete_to_rational(&young_discrete(&[
        rat(1, 1),
        rat(1, 1),
        rat(1, 1),
    ])))
    .unwrap();
    match decide(&d, &SearchBudget::light()) {
        Verdict::Feasible(FeasibleEvidence::ConditionsVerified { scanned_primes }) => {
            assert!(scanned_primes.len() >= 2);
        }
        other => panic!("expected conditions-verified, found {other:?}"),
    }
}

#[test]
fn decide_undecided_beyond_scan_budget() {
    // Identity datum on Q^7: feasible in truth, but the scans cannot run,
    // so a non-global mode must answer honestly.
    let d = validate(crate::datum::BLDatum::new(
        7,
        vec![RatMatrix::identity(7)],
        crate::datum::ExponentVector::from_i64_pairs(&[(1, 1)]),
        Mode::Amalgam,
    ))
    .unwrap();
    let mut budget = SearchBudget::light();
    budget.random_subspace_samples = 8;
    match decide(&d, &budget) {
        Verdict::Undecided(diag) => {
            assert!(diag.scanned_primes.is_empty());
            assert_eq!(diag.best_min_f1, Some(rat_zero()));
        }
        other => panic!("expected undecided, found {other:?}"),
    }
}

#[test]
fn critical_subspaces_examples() {
    let budget = SearchBudget::light();

    let d = validate(young(&[rat(1, 2), rat(1, 2), rat(1, 1)], Mode::Global)).unwrap();
    let criticals = critical_subspaces(&d, &budget);
    assert_eq!(criticals, vec![Subspace::from_i64_rows(2, &[&[1, 1]])]);

    let criticals = critical_subspaces(&lw_half(), &budget);
    assert_eq!(criticals.len(), 6);
    assert!(criticals.iter().take(3).all(|v| v.dim() == 1));
    assert!(criticals.iter().skip(3).all(|v| v.dim() == 2));

    let d = validate(holder(&[rat(1, 2), rat(1, 2)])).unwrap();
    assert!(critical_subspaces(&d, &budget).is_empty());
}

#[test]
fn gut_mode_searches_inside_the_kernel() {
    // Bounded first coordinate on the convolution maps: the kernel of the
    // bounded map is the second axis.
    let d = validate(young(
        &[rat(1, 2), rat(1, 2), rat(1, 1)],
        Mode::Gut(RatMatrix::from_i64_rows(&[&[1, 0]])),
    ))
    .unwrap();
    let result = min_f1(&d, Domain::WithinKernel0, &SearchBudget::light());
    // Subspaces of a line: {0} and the line itself; e2 has images of
    // dimensions (0, 1, 1): f1 = 1/2 + 1 − 1 = 1/2 > 0.
    assert_eq!(result.explored_min, rat_zero());
    assert!(result.exhaustive);
    for w in &result.witnesses {
        assert!(d.kernel0().contains(w));
    }
}

#[test]
fn profile_records_kernel_membership() {
    let d = validate(young(
        &[rat(1, 2), rat(1, 2), rat(1, 1)],
        Mode::Gut(RatMatrix::from_i64_rows(&[&[1, 0]])),
    ))
    .unwrap();
    let inside = profile(&d, &Subspace::coordinate_axis(2, 1)).unwrap();
    assert!(inside.within_kernel0);
    let outside = profile(&d, &Subspace::coordinate_axis(2, 0)).unwrap();
    assert!(!outside.within_kernel0);
}

#[test]
fn exploration_is_deterministic() {
    let d = lw_half();
    let budget = SearchBudget::default().with_seed(7);
    let a = explore(&d, Domain::AllOfH, &budget);
    let b = explore(&d, Domain::AllOfH, &budget);
    assert_eq!(a.subspaces, b.subspaces);
    // Different seeds may sample different subspaces, but the canonical
    // lattice and scan lifts are shared.
    let c = explore(&d, Domain::AllOfH, &SearchBudget::default().with_seed(8));
    for seed in [Subspace::zero(3), Subspace::full(3)] {
        assert!(c.subspaces.contains(&seed));
    }
}

#[test]
fn good_prime_filtering_in_exploration() {
    // The doubling map is bad at p = 2 (rank drop) and good at 3 and 5.
    let d = validate(crate::datum::BLDatum::new(
        1,
        vec![RatMatrix::from_i64_rows(&[&[2]])],
        crate::datum::ExponentVector::from_i64_pairs(&[(1, 1)]),
        Mode::Discrete,
    ))
    .unwrap();
    let ex = explore(&d, Domain::AllOfH, &SearchBudget::light());
    let good: Vec<u64> = ex.scans.iter().filter(|s| s.good).map(|s| s.p).collect();
    assert_eq!(good, vec![3, 5]);
    assert!(mod_p_reduce(d.map(0), 2).is_err());
    // Two good primes remain, so the verdict is still certified.
    let eval = ex.evaluate(d.exponents().as_slice());
    assert!(eval.exhaustive);
    assert_eq!(eval.min, rat_zero());
}
