use l96::lie::{
    all_generators, bracket, closure, hormander_rank_at, shift_conjugate, shift_conjugate_inverse,
    spanning_rank_exact, spanning_rank_float, standard_generators_check, verify_sl_generation, SpanTracker,
    MAX_DEPTH,
};
use l96::model::{jacobian_db, SubspaceIndexing, StateVector};
use l96::{Error, Matrix, Rational, RationalMatrix, Ring};
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

fn square(d: usize) -> impl Strategy<Value = Matrix<i64>> {
    prop::collection::vec(-20i64..=20, d * d).prop_map(move |v| Matrix::from_row_major(d, d, v).unwrap())
}

fn q(m: &Matrix<i64>) -> RationalMatrix {
    m.map(|&x| Rational::from_i64(x))
}

/// A basis of `sl(d)`: off-diagonal units and `E_ii - E_{i+1,i+1}`.
fn sl_basis(d: usize) -> Vec<RationalMatrix> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if i != j {
                out.push(Matrix::elementary(d, i, j));
            }
        }
    }
    for i in 0..d - 1 {
        out.push(&Matrix::elementary(d, i, i) - &Matrix::elementary(d, i + 1, i + 1));
    }
    out
}

/// Transverse direction with ones on every index `j = 2 (mod 3)`.
fn w_direction(n: usize) -> Vec<Rational> {
    let idx = SubspaceIndexing::new(n).unwrap();
    let u = StateVector::from_vec((0..n).map(|j| Rational::from_i64((j % 3 == 2) as i64)).collect());
    idx.compact_transverse(&u)
}

/// Basis rows ordered by pivot; equal spans give equal results.
fn canonical(t: &SpanTracker<Rational>) -> Vec<Vec<Rational>> {
    let mut rows: Vec<_> = t.pivots().iter().cloned().zip(t.basis().iter().cloned()).collect();
    rows.sort_by_key(|r| r.0);
    rows.into_iter().map(|r| r.1).collect()
}

fn full_closure(n: usize) -> Vec<RationalMatrix> {
    closure(&all_generators::<Rational>(n).unwrap(), MAX_DEPTH).unwrap().tracker().basis_matrices().unwrap()
}

proptest! {
    #[test]
    fn bracket_is_antisymmetric((a, b) in (square(4), square(4))) {
        let ab = bracket(&a, &b).unwrap();
        let ba = bracket(&b, &a).unwrap();
        prop_assert!((&ab + &ba).is_zero());
        prop_assert_eq!(ab.trace(), 0);
    }

    #[test]
    fn bracket_satisfies_jacobi((a, b, c) in (square(4), square(4), square(4))) {
        let x = bracket(&a, &bracket(&b, &c).unwrap()).unwrap();
        let y = bracket(&b, &bracket(&c, &a).unwrap()).unwrap();
        let z = bracket(&c, &bracket(&a, &b).unwrap()).unwrap();
        prop_assert!((&(&x + &y) + &z).is_zero());
    }

    #[test]
    fn shift_has_order_k(k in 1usize..7, seed in any::<u64>()) {
        let d = 2 * k;
        let a = Matrix::from_fn(d, d, |i, j| ((seed.wrapping_mul(31 + i as u64 * 7 + j as u64) >> 40) % 17) as i64);
        let mut b = a.clone();
        for _ in 0..k {
            b = shift_conjugate(&b, k).unwrap();
        }
        prop_assert_eq!(&b, &a);
        prop_assert_eq!(shift_conjugate_inverse(&shift_conjugate(&a, k).unwrap(), k).unwrap(), a);
    }

    #[test]
    fn shift_is_a_lie_automorphism((a, b) in (square(6), square(6))) {
        let lhs = shift_conjugate(&bracket(&a, &b).unwrap(), 3).unwrap();
        let rhs = bracket(&shift_conjugate(&a, 3).unwrap(), &shift_conjugate(&b, 3).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5))]

    #[test]
    fn closure_is_independent_of_generator_order(perm in Just((0..3usize).collect::<Vec<_>>()).prop_shuffle()) {
        let gens = all_generators::<Rational>(9).unwrap();
        let reference = closure(&gens, MAX_DEPTH).unwrap();
        let shuffled: Vec<_> = perm.iter().map(|&i| gens[i].clone()).collect();
        let c = closure(&shuffled, MAX_DEPTH).unwrap();
        prop_assert!(c.is_stable());
        prop_assert_eq!(canonical(c.tracker()), canonical(reference.tracker()));
    }
}

#[test]
fn closure_is_invariant_under_index_shift() {
    for n in [9, 12] {
        let k = n / 3;
        let c = closure(&all_generators::<Rational>(n).unwrap(), MAX_DEPTH).unwrap();
        for m in c.tracker().basis_matrices().unwrap() {
            assert!(c.tracker().contains_matrix(&shift_conjugate(&m, k).unwrap()).unwrap());
            assert!(c.tracker().contains_matrix(&shift_conjugate_inverse(&m, k).unwrap()).unwrap());
        }
    }
}

#[test]
fn full_jacobian_closure_matches_compact_closure() {
    // Close the N x N Jacobians at the forced unit vectors and compare with
    // the compact 2K x 2K computation.
    let n = 9;
    let idx = SubspaceIndexing::new(n).unwrap();
    let gens: Vec<RationalMatrix> =
        idx.forced().iter().map(|&k| q(&jacobian_db(&StateVector::<i64>::basis(n, k as isize)))).collect();
    let big = closure(&gens, MAX_DEPTH).unwrap();
    let small = closure(&all_generators::<Rational>(n).unwrap(), MAX_DEPTH).unwrap();
    assert_eq!(big.dim(), small.dim());
    let t = idx.transverse();
    let mut restricted = SpanTracker::for_matrices(t.len());
    for m in big.tracker().basis_matrices().unwrap() {
        for &f in idx.forced() {
            for j in 0..n {
                assert!(m[(f, j)].is_zero() && m[(j, f)].is_zero());
            }
        }
        restricted.insert_matrix(&m.select(t, t)).unwrap();
    }
    assert_eq!(canonical(&restricted), canonical(small.tracker()));
}

#[test]
fn small_systems_have_fixed_closure_dimensions() {
    assert_eq!(verify_sl_generation::<Rational>(3).unwrap().0.dim, 0);
    let (r6, _) = verify_sl_generation::<Rational>(6).unwrap();
    assert_eq!((r6.dim, r6.expected, r6.generated, r6.stable), (5, 15, false, true));
}

#[test]
fn every_bracket_annihilates_the_alternating_direction() {
    for n in [6, 9, 12] {
        let w = w_direction(n);
        for m in full_closure(n) {
            assert!(m.mul_vec(&w).unwrap().iter().all(|x| x.is_zero()), "N = {n}");
        }
    }
}

#[test]
fn standard_sets_generate_sl() {
    for n in 2..=6 {
        assert!(standard_generators_check(n).unwrap(), "n = {n}");
    }
}

#[test]
fn spanning_rank_at_base_subspace_is_k() {
    let n = 9;
    let u = StateVector::from_vec((0..n).map(|j| Rational::from_i64(if j % 3 == 0 { j as i64 + 1 } else { 0 })).collect());
    assert_eq!(spanning_rank_exact(&u, &sl_basis(6)).unwrap(), 3);
    let r = hormander_rank_at(&u, &sl_basis(6)).unwrap();
    assert_eq!((r.rank, r.full_rank), (3, false));
}

#[test]
fn sl_basis_gives_full_rank_off_the_base_subspace() {
    let n = 9;
    let u = StateVector::from_vec((0..n as i64).map(|j| Rational::from_i64(j * j - 3)).collect());
    let r = hormander_rank_at(&u, &sl_basis(6)).unwrap();
    assert_eq!((r.rank, r.full_rank), (9, true));
    let uf = StateVector::from_vec((0..n).map(|j| (j * j) as f64 - 3.0).collect());
    let fb: Vec<Matrix<f64>> = sl_basis(6).iter().map(|m| m.map(|x| x.to_f64().unwrap())).collect();
    assert_eq!(spanning_rank_float(&uf, &fb).unwrap(), 9);
}

#[test]
fn closure_basis_fails_the_sl_precondition() {
    let n = 9;
    let basis = full_closure(n);
    let u = StateVector::from_vec((0..n as i64).map(|j| Rational::from_i64(j + 1)).collect());
    assert!(matches!(hormander_rank_at(&u, &basis), Err(Error::Precondition(_))));
    // full rank at a generic point, but only the forced directions survive
    // where the transverse part is the annihilated direction
    assert_eq!(spanning_rank_exact(&u, &basis).unwrap(), n);
    let on_w = StateVector::from_vec((0..n).map(|j| Rational::from_i64(if j % 3 == 1 { 0 } else { 1 })).collect());
    assert_eq!(spanning_rank_exact(&on_w, &basis).unwrap(), n / 3);
    assert_eq!(spanning_rank_exact(&on_w, &sl_basis(6)).unwrap(), n);
}
