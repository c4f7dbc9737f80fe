use num_bigint::BigInt;

use super::*;

fn m(rows: &[&[i64]]) -> RatMatrix {
    RatMatrix::from_i64_rows(rows)
}

#[test]
fn rref_proportional_rows() {
    let r = rref(&m(&[&[1, 2], &[2, 4]]));
    assert_eq!(r.rank, 1);
    assert_eq!(r.pivot_cols, vec![0]);
}

#[test]
fn rref_identity_is_fixed() {
    let id = RatMatrix::identity(3);
    let r = rref(&id);
    assert_eq!(r.echelon, id);
    assert_eq!(r.rank, 3);
}

#[test]
fn rref_rank_two_example() {
    // Hand Gaussian elimination: row3 = row1 + row2, so rank 2.
    let r = rref(&m(&[&[1, 0, -1], &[0, 1, -1], &[1, 1, -2]]));
    assert_eq!(r.rank, 2);
    assert_eq!(r.pivot_cols, vec![0, 1]);
}

#[test]
fn kernel_of_difference_map() {
    let k = kernel(&m(&[&[1, -1]]));
    assert_eq!(k, Subspace::from_i64_rows(2, &[&[1, 1]]));
    assert_eq!(k.dim(), 1);
}

#[test]
fn kernel_of_invertible_is_zero() {
    let k = kernel(&m(&[&[1, 1], &[0, 1]]));
    assert!(k.is_zero());
}

#[test]
fn kernel_of_forgetful_projection() {
    // pi_1 forgets the first coordinate; solving the 2x3 system by hand
    // leaves exactly the first axis.
    let k = kernel(&m(&[&[0, 1, 0], &[0, 0, 1]]));
    assert_eq!(k, Subspace::coordinate_axis(3, 0));
}

#[test]
fn image_of_full_space_under_surjection() {
    let pi = m(&[&[0, 1, 0], &[0, 0, 1]]);
    let img = image(&pi, &Subspace::full(3)).unwrap();
    assert!(img.is_full());
}

#[test]
fn image_of_kernel_is_zero() {
    let pi = m(&[&[1, 2, 3]]);
    let img = image(&pi, &kernel(&pi)).unwrap();
    assert!(img.is_zero());
}

#[test]
fn image_of_coordinate_plane() {
    let pi3 = m(&[&[1, 0, 0], &[0, 1, 0]]);
    let v = Subspace::coordinate_span(3, &[0, 2]);
    let img = image(&pi3, &v).unwrap();
    assert_eq!(img, Subspace::coordinate_axis(2, 0));
}

#[test]
fn sum_of_two_lines_is_plane() {
    let a = Subspace::from_i64_rows(2, &[&[1, 0]]);
    let b = Subspace::from_i64_rows(2, &[&[1, 1]]);
    assert!(a.sum(&b).unwrap().is_full());
}

#[test]
fn intersect_is_idempotent() {
    let v = Subspace::from_i64_rows(3, &[&[1, 2, 3], &[0, 1, 1]]);
    assert_eq!(v.intersect(&v).unwrap(), v);
}

#[test]
fn intersect_coordinate_planes() {
    // Stacked-kernel / Zassenhaus oracle: the only common directions of
    // span{e1,e2} and span{e2,e3} are multiples of e2.
    let a = Subspace::coordinate_span(3, &[0, 1]);
    let b = Subspace::coordinate_span(3, &[1, 2]);
    assert_eq!(a.intersect(&b).unwrap(), Subspace::coordinate_axis(3, 1));
}

#[test]
fn complement_of_zero_and_full() {
    assert!(Subspace::zero(3).complement().is_full());
    assert!(Subspace::full(3).complement().is_zero());
}

#[test]
fn complement_of_diagonal_line() {
    // Echelon basis of span{(1,1)} pivots on column 0, so the coordinate
    // complement is the second axis.
    let v = Subspace::from_i64_rows(2, &[&[1, 1]]);
    let c = v.complement();
    assert_eq!(c, Subspace::coordinate_axis(2, 1));
    assert!(v.sum(&c).unwrap().is_full());
    assert!(v.intersect(&c).unwrap().is_zero());
}

#[test]
fn restrict_identity_map() {
    let v = Subspace::from_i64_rows(3, &[&[1, 0, 2], &[0, 1, -1]]);
    let r = restrict_map(&RatMatrix::identity(3), &v, &v).unwrap();
    assert_eq!(r, RatMatrix::identity(2));
}

#[test]
fn restrict_into_zero_target() {
    let map = m(&[&[1, -1]]);
    let domain = Subspace::from_i64_rows(2, &[&[1, 1]]);
    let target = Subspace::zero(1);
    let r = restrict_map(&map, &domain, &target).unwrap();
    assert_eq!(r.rows(), 0);
    assert_eq!(r.cols(), 1);
}

#[test]
fn restrict_rejects_escaping_image() {
    let map = m(&[&[1, 0], &[0, 1]]);
    let domain = Subspace::full(2);
    let target = Subspace::coordinate_axis(2, 0);
    assert_eq!(
        restrict_map(&map, &domain, &target),
        Err(RatlinError::ImageNotInTarget)
    );
}

#[test]
fn restrict_forgetful_map_onto_image() {
    let pi1 = m(&[&[0, 1, 0], &[0, 0, 1]]);
    let domain = Subspace::coordinate_span(3, &[1, 2]);
    let target = image(&pi1, &domain).unwrap();
    let r = restrict_map(&pi1, &domain, &target).unwrap();
    assert!(r.is_invertible());
}

#[test]
fn quotient_by_zero_is_identity_composition() {
    let map = m(&[&[1, 2], &[3, 4]]);
    let (q, complement) = quotient_map(&map, &Subspace::zero(2)).unwrap();
    assert_eq!(q, map);
    assert!(complement.is_full());
}

#[test]
fn quotient_by_full_target_is_zero_dimensional() {
    let map = m(&[&[1, 2], &[3, 4]]);
    let (q, complement) = quotient_map(&map, &Subspace::full(2)).unwrap();
    assert_eq!(q.rows(), 0);
    assert!(complement.is_zero());
}

#[test]
fn quotient_on_young_datum() {
    // W = kernel(l3) = span{(1,1)}; U_1 = l1(W) is all of Q^1, so the
    // quotient of l1 by U_1 is the 0x2 map, and the quotient of l3 by
    // l3(W) = {0} is l3 itself. Restricting l3 to the complement of W
    // (the second axis) gives the 1x1 map [-1].
    let l3 = m(&[&[1, -1]]);
    let w = kernel(&l3);
    let l1 = m(&[&[1, 0]]);
    let u1 = image(&l1, &w).unwrap();
    let (q1, _) = quotient_map(&l1, &u1).unwrap();
    assert_eq!(q1.rows(), 0);
    let (q3, c3) = quotient_map(&l3, &image(&l3, &w).unwrap()).unwrap();
    assert_eq!(q3, l3);
    assert!(c3.is_full());
    let restricted = q3.mul(&w.complement().basis().transpose());
    assert_eq!(restricted, m(&[&[-1]]));
}

#[test]
fn smith_normal_form_examples() {
    // diag(2,3): elementary row/column reduction gives diag(1,6).
    let s = smith_normal_form(&IntMatrix::from_i64_rows(&[&[2, 0], &[0, 3]]));
    assert_eq!(
        s.invariant_factors,
        vec![BigInt::from(1), BigInt::from(6)]
    );
    assert_eq!(s.rank, 2);

    let id = smith_normal_form(&IntMatrix::identity(4));
    assert_eq!(id.invariant_factors, vec![BigInt::from(1); 4]);

    let zero = smith_normal_form(&IntMatrix::zero(2, 3));
    assert!(zero.invariant_factors.is_empty());
    assert_eq!(zero.rank, 0);
}

#[test]
fn smith_normal_form_divisibility_chain() {
    let s = smith_normal_form(&IntMatrix::from_i64_rows(&[
        &[2, 4, 4],
        &[-6, 6, 12],
        &[10, 4, 16],
    ]));
    for w in s.invariant_factors.windows(2) {
        assert!((&w[1] % &w[0]).is_zero());
    }
    assert_eq!(s.rank, s.invariant_factors.len());
}

#[test]
fn mod_p_reduce_good_and_bad() {
    let good = mod_p_reduce(&m(&[&[1, -1]]), 2).unwrap();
    assert_eq!(good.entries(), &[1, 1]);
    assert_eq!(good.rank(), 1);

    assert_eq!(
        mod_p_reduce(&m(&[&[2]]), 2),
        Err(RatlinError::BadPrimeRankDrop {
            p: 2,
            rational_rank: 1,
            fp_rank: 0
        })
    );

    let third = RatMatrix::from_rows(2, vec![vec![rat_one(), rat(1, 3)]]);
    assert_eq!(
        mod_p_reduce(&third, 3),
        Err(RatlinError::BadPrimeDenominator { p: 3 })
    );
}

#[test]
fn subspace_enumeration_counts() {
    // Gaussian binomial oracle: sum_k C_p(n, k).
    fn gaussian_binomial(p: u64, n: usize, k: usize) -> u64 {
        let mut num = 1u64;
        let mut den = 1u64;
        for i in 0..k {
            num *= p.pow((n - i) as u32) - 1;
            den *= p.pow((i + 1) as u32) - 1;
        }
        num / den
    }
    fn oracle(p: u64, n: usize) -> u64 {
        (0..=n).map(|k| gaussian_binomial(p, n, k)).sum()
    }
    assert_eq!(oracle(2, 3), 16); // 1 + 7 + 7 + 1
    for (p, n) in [(2u64, 0usize), (2, 1), (2, 3), (2, 4), (3, 3), (5, 2)] {
        assert_eq!(subspace_count(p, n), oracle(p, n), "p={p} n={n}");
    }
}

#[test]
fn enumerated_bases_are_distinct_echelon() {
    let all: Vec<FpMatrix> = FpSubspaceIter::new(3, 3).collect();
    let mut dedup = all.clone();
    dedup.sort_by_key(|m| m.entries().to_vec());
    dedup.dedup();
    assert_eq!(all.len(), dedup.len());
    for b in &all {
        let lifted = b.lift_to_subspace();
        assert_eq!(lifted.dim(), b.rows());
        // The integer lift of an F_p echelon basis is already canonical.
        assert_eq!(lifted.basis(), &b.lift_to_rational());
    }
}

#[test]
fn parse_and_format_rationals() {
    assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
    assert_eq!(parse_rat("-2").unwrap(), rat_int(-2));
    assert_eq!(rat_to_string(&rat(7, 2)), "7/2");
    assert_eq!(rat_to_string(&rat_int(5)), "5");
    assert!(parse_rat("0.5").is_err());
    assert!(parse_rat("1/0").is_err());
}

#[test]
fn determinant_matches_cofactor_expansion() {
    let a = m(&[&[2, 1, 0], &[1, -1, 3], &[0, 2, 1]]);
    // Hand cofactor expansion: 2(-1*1 - 3*2) - 1(1*1 - 3*0) + 0 = -15.
    assert_eq!(a.det(), rat_int(-15));
    assert_eq!(RatMatrix::identity(3).det(), rat_one());
}
