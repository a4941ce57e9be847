use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use wco_core::linalg::{eigen, eigen_order, hermitian_eigenvalues, CMatrix};

fn matrix(n: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n)
        .prop_map(move |v| DMatrix::from_iterator(n, n, v.into_iter().map(|(a, b)| Complex64::new(a, b))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn qr_matches_hermitian_solver(a in matrix(12)) {
        let h = &a + a.adjoint();
        let mut ours: Vec<f64> = eigen(&h).unwrap().values.iter().map(|v| v.re).collect();
        ours.sort_by(f64::total_cmp);
        for (x, y) in ours.iter().zip(hermitian_eigenvalues(&h)) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenpairs_have_small_backward_error(a in matrix(10)) {
        let d = eigen(&a).unwrap();
        prop_assert!(d.converged);
        prop_assert!(d.backward_errors.iter().all(|&e| e < 1e-12));
    }

    #[test]
    fn ab_and_ba_share_nonzero_spectrum(a in matrix(8), b in matrix(8)) {
        let mut ab = eigen(&(&a * &b)).unwrap().values;
        let mut ba = eigen(&(&b * &a)).unwrap().values;
        ab.sort_by(eigen_order);
        ba.sort_by(eigen_order);
        for (x, y) in ab.iter().zip(&ba) {
            prop_assert!((x - y).norm() < 1e-8);
        }
    }
}
