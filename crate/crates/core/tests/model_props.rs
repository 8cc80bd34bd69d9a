use l96::model::{
    bilinear_b, drift, jacobian_db, m_k_matrix, on_invariant_subspace, project_invariant, project_transverse,
    transverse_generator, SubspaceIndexing, StateVector,
};
use l96::{IntMatrix, Matrix};
use proptest::prelude::*;

fn int_state(n: usize) -> impl Strategy<Value = StateVector<i64>> {
    prop::collection::vec(-1000i64..=1000, n).prop_map(StateVector::from_vec)
}

fn sized_state() -> impl Strategy<Value = StateVector<i64>> {
    prop_oneof![Just(9usize), Just(12), Just(15)].prop_flat_map(int_state)
}

fn pair() -> impl Strategy<Value = (StateVector<i64>, StateVector<i64>)> {
    prop_oneof![Just(9usize), Just(15)].prop_flat_map(|n| (int_state(n), int_state(n)))
}

proptest! {
    #[test]
    fn advection_conserves_energy(u in sized_state()) {
        prop_assert_eq!(bilinear_b(&u, &u).unwrap().dot(&u), 0);
    }

    #[test]
    fn jacobian_is_symmetrized_form((u, v) in pair()) {
        let lhs = jacobian_db(&u).mul_vec(v.as_slice()).unwrap();
        let rhs = bilinear_b(&u, &v).unwrap().add(&bilinear_b(&v, &u).unwrap());
        prop_assert_eq!(lhs, rhs.into_vec());
    }

    #[test]
    fn jacobian_is_traceless(u in sized_state()) {
        prop_assert_eq!(jacobian_db(&u).trace(), 0);
    }

    #[test]
    fn shift_covariance((u, v) in pair(), s in 0isize..15) {
        let lhs = bilinear_b(&u.shifted(s), &v.shifted(s)).unwrap();
        prop_assert_eq!(lhs, bilinear_b(&u, &v).unwrap().shifted(s));
    }

    #[test]
    fn forced_subspace_is_invariant_under_transverse_linearization((u, w) in pair()) {
        let y = project_invariant(&u);
        let w = project_transverse(&w);
        let out = StateVector::from_vec(jacobian_db(&y).mul_vec(w.as_slice()).unwrap());
        prop_assert!(project_invariant(&out).is_zero());
        // on H_I the quadratic part vanishes
        prop_assert!(bilinear_b(&y, &y).unwrap().is_zero());
    }

    #[test]
    fn transverse_generator_is_restricted_jacobian(u in sized_state()) {
        let y = project_invariant(&u);
        let idx = SubspaceIndexing::new(y.len()).unwrap();
        let full = jacobian_db(&y);
        let t = idx.transverse();
        prop_assert_eq!(transverse_generator(&y).unwrap(), full.select(t, t));
    }

    #[test]
    fn decomposition_is_orthogonal(u in sized_state()) {
        let a = project_invariant(&u);
        let b = project_transverse(&u);
        prop_assert_eq!(a.add(&b), u);
        prop_assert_eq!(a.dot(&b), 0);
        prop_assert!(on_invariant_subspace(&a));
    }
}

#[test]
fn generators_are_traceless_with_four_unit_entries() {
    for n in [9, 12, 15, 18] {
        let idx = SubspaceIndexing::new(n).unwrap();
        for &k in idx.forced() {
            let m: IntMatrix = m_k_matrix(k, n).unwrap();
            assert_eq!(m.trace(), 0);
            assert_eq!(m.nonzero_count(), 4);
            assert!(m.as_slice().iter().all(|x| (-1..=1).contains(x)));
        }
    }
}

#[test]
fn generators_are_jacobians_at_basis_vectors() {
    let n = 12;
    let idx = SubspaceIndexing::new(n).unwrap();
    for &k in idx.forced() {
        let db: Matrix<i64> = jacobian_db(&StateVector::basis(n, k as isize));
        let t = idx.transverse();
        assert_eq!(db.select(t, t), m_k_matrix(k, n).unwrap());
        assert!(bilinear_b(&StateVector::<i64>::basis(n, k as isize), &StateVector::basis(n, k as isize)).unwrap().is_zero());
    }
}

#[test]
fn float_drift_matches_exact_drift_at_integer_points() {
    let u: StateVector<i64> = StateVector::from_vec(vec![3, -1, 4, 1, -5, 9, 2, -6, 5]);
    let exact = l96::model::drift_exact(&u, &2);
    let uf = StateVector::from_vec(u.as_slice().iter().map(|&x| x as f64).collect());
    let f = drift(&uf, 2.0).unwrap();
    for (a, b) in exact.as_slice().iter().zip(f.as_slice()) {
        assert_eq!(*a as f64, *b);
    }
}
