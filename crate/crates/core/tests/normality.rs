use num_complex::Complex64;
use proptest::prelude::*;
use wco_core::eigen::{eigenfunction_series, one_minus_z_power};
use wco_core::hardy::H2Vector;
use wco_core::normality::{hyponormal_probe, inprod_probe, NormalityVerdict};
use wco_core::{MobiusMap, Symbol};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn hyper_pair() -> (Symbol, Symbol) {
    (
        Symbol::exp(Symbol::poly_real(&[2.0, -1.0])),
        Symbol::mobius(MobiusMap::from_real(0.5, 0.5, 0.0, 1.0).unwrap()),
    )
}

fn selfadjoint_pair() -> (Symbol, Symbol) {
    (Symbol::kernel(c(0.5)).unwrap(), Symbol::mobius(MobiusMap::from_real(0.0, 1.0, -1.0, 2.0).unwrap()))
}

#[test]
fn commutator_block_is_hermitian_before_symmetrizing() {
    for (psi, phi) in [hyper_pair(), selfadjoint_pair()] {
        for n in [16, 64, 128] {
            let r = hyponormal_probe(&psi, &phi, n).unwrap();
            assert!(r.probe.asymmetry < 1e-9, "N={n}: {}", r.probe.asymmetry);
            assert!(r.probe_wide.asymmetry < 1e-9);
        }
    }
}

#[test]
fn buffers_agree_on_example_pairs() {
    for (psi, phi) in [hyper_pair(), selfadjoint_pair()] {
        let r = hyponormal_probe(&psi, &phi, 48).unwrap();
        assert!(r.buffer_relative_change < 0.1, "{}", r.buffer_relative_change);
        assert_ne!(r.verdict, NormalityVerdict::Inconclusive);
    }
}

#[test]
fn verdict_is_scale_invariant() {
    let (psi, phi) = hyper_pair();
    let base = hyponormal_probe(&psi, &phi, 32).unwrap();
    for k in [0.5, 3.0, 10.0] {
        let r = hyponormal_probe(&Symbol::scale(c(k), psi.clone()), &phi, 32).unwrap();
        assert_eq!(r.verdict, base.verdict);
        assert!((r.commutator_min_eig - k * k * base.commutator_min_eig).abs() <= 1e-9 * k * k * base.commutator_min_eig.abs());
    }
    let (psi, phi) = selfadjoint_pair();
    let base = hyponormal_probe(&psi, &phi, 32).unwrap();
    for k in [0.5, 3.0, 10.0] {
        assert_eq!(hyponormal_probe(&Symbol::scale(c(k), psi.clone()), &phi, 32).unwrap().verdict, base.verdict);
    }
}

#[test]
fn inprod_detects_eigenfunctions() {
    let (psi, phi) = hyper_pair();
    let cert = eigenfunction_series(&psi, &phi, 60, 128).unwrap();
    for k in 0..3 {
        let h = H2Vector::from_symbol(&Symbol::product(cert.eigenfunction.clone(), one_minus_z_power(k)), 128).unwrap();
        assert!(inprod_probe(&h, 32).unwrap().first_n.is_some(), "k={k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inprod_detects_monomials(k in 0usize..60) {
        let t = inprod_probe(&H2Vector::monomial(k, 128), 32).unwrap();
        prop_assert!(t.deviation > 0.0);
        prop_assert_eq!(t.first_n, Some(1));
    }

    #[test]
    fn inprod_detects_kernels(r in 0.0..0.95f64, theta in -3.2..3.2f64) {
        let w = Complex64::from_polar(r, theta);
        let h = H2Vector::from_symbol(&Symbol::kernel(w).unwrap(), 256).unwrap();
        let t = inprod_probe(&h, 32).unwrap();
        prop_assert!(t.deviation > 0.0 && t.first_n.is_some());
    }
}
