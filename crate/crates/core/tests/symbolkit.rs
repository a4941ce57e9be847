use num_complex::Complex64;
use proptest::prelude::*;
use wco_core::symbol::{classify, eval_series, taylor, DWClass, DWMethod};
use wco_core::{MobiusMap, Symbol};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex(bound: f64) -> impl Strategy<Value = Complex64> {
    (-bound..bound, -bound..bound).prop_map(|(re, im)| c(re, im))
}

fn disk_point(r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..r, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(m, t)| Complex64::from_polar(m, t))
}

fn mobius() -> impl Strategy<Value = MobiusMap> {
    (complex(2.0), complex(2.0), complex(2.0), complex(2.0))
        .prop_filter("non-degenerate", |(a, b, c, d)| (a * d - b * c).norm() > 0.1)
        .prop_map(|(a, b, c, d)| MobiusMap::new(a, b, c, d).unwrap())
}

/// `r·A(z) + b` with `A` a disk automorphism and `|b| ≤ 1 - r`; `t = 1` touches the circle.
fn self_map() -> impl Strategy<Value = MobiusMap> {
    (disk_point(0.9), -3.2..3.2f64, 0.05..1.0f64, prop_oneof![Just(1.0), 0.0..1.0f64], -3.2..3.2f64).prop_map(
        |(p, theta, r, t, beta)| {
            let u = Complex64::from_polar(1.0, theta);
            let b = Complex64::from_polar(t * (1.0 - r), beta);
            MobiusMap::new(r * u + b * (-p.conj()), -r * u * p + b, -p.conj(), c(1.0, 0.0)).unwrap()
        },
    )
}

/// Direct evaluation from the stored coefficients, independent of `MobiusMap::eval`.
fn raw_eval(m: &MobiusMap, z: Complex64) -> Complex64 {
    let [a, b, c, d] = m.coefficients();
    (a * z + b) / (c * z + d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mobius_group_law(m1 in mobius(), m2 in mobius(), zs in prop::collection::vec(disk_point(1.0), 50)) {
        let m = m1.compose(&m2).unwrap();
        for z in zs {
            let inner = raw_eval(&m2, z);
            prop_assume!(inner.norm() < 1e3);
            let expected = raw_eval(&m1, inner);
            prop_assume!(expected.norm() < 10.0 && (m.coefficients()[2] * z + m.coefficients()[3]).norm() > 1e-3);
            let got = m.eval(z).unwrap();
            prop_assert!((got - expected).norm() < 1e-11 * (1.0 + expected.norm()), "{got} vs {expected}");
        }
    }

    #[test]
    fn polynomial_round_trip(coeffs in prop::collection::vec(complex(3.0), 1..17), zs in prop::collection::vec(disk_point(1.0), 20)) {
        let s = Symbol::poly(coeffs.clone());
        let t = taylor(&s, 16).unwrap();
        for z in zs {
            prop_assert!((eval_series(&t, z) - s.eval(z).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn analytic_round_trip(w in disk_point(1.0 / 1.5), p in prop::collection::vec(complex(1.0), 1..4), zs in prop::collection::vec(disk_point(0.9), 20)) {
        let k = Symbol::kernel(w).unwrap();
        let e = Symbol::exp(Symbol::poly(p));
        let prod = Symbol::product(k.clone(), e.clone());
        for s in [k, e, prod] {
            prop_assert!(s.analyticity_radius() >= 1.5);
            let t = taylor(&s, 128).unwrap();
            for &z in &zs {
                let exact = s.eval(z).unwrap();
                prop_assert!((eval_series(&t, z) - exact).norm() < 1e-9 * (1.0 + exact.norm()));
            }
        }
    }

    #[test]
    fn classify_residual(m in self_map()) {
        prop_assume!(!m.is_identity());
        let r = classify(&Symbol::mobius(m));
        prop_assume!(r.is_ok());
        let r = r.unwrap();
        prop_assert_eq!(r.method, DWMethod::ExactMobius);
        prop_assert!((raw_eval(&m, r.point) - r.point).norm() <= 1e-10);
    }
}

#[test]
fn semigroup_law() {
    let ts = [0.5, 1.0, 3.0];
    for &s in &ts {
        for &t in &ts {
            let lhs = MobiusMap::parabolic_semigroup(s).unwrap().compose(&MobiusMap::parabolic_semigroup(t).unwrap()).unwrap();
            let rhs = MobiusMap::parabolic_semigroup(s + t).unwrap();
            for k in 0..50 {
                let z = Complex64::from_polar(0.99 * k as f64 / 50.0, 0.7 * k as f64);
                assert!((lhs.eval(z).unwrap() - rhs.eval(z).unwrap()).norm() < 1e-11);
            }
        }
    }
}

#[test]
fn cowen_sigma_examples() {
    let para = MobiusMap::from_real(0.0, 1.0, -1.0, 2.0).unwrap();
    assert_eq!(para.cowen_sigma().unwrap(), para);
    let hyper = MobiusMap::from_real(0.5, 0.5, 0.0, 1.0).unwrap();
    let sigma = hyper.cowen_sigma().unwrap();
    let back = sigma.cowen_sigma().unwrap();
    assert!(back.maps_closed_disk_into_itself(1e-12));
    for k in 0..20 {
        let z = Complex64::from_polar(0.9, k as f64);
        assert!((back.eval(z).unwrap() - hyper.eval(z).unwrap()).norm() < 1e-12);
    }
}

#[test]
fn worked_classifications() {
    let h = classify(&Symbol::mobius(MobiusMap::from_real(0.5, 0.5, 0.0, 1.0).unwrap())).unwrap();
    assert_eq!(h.klass, DWClass::BoundaryHyperbolic);
    assert!((h.point - 1.0).norm() < 1e-12 && (h.multiplier - 0.5).norm() < 1e-12);
    let p = classify(&Symbol::mobius(MobiusMap::from_real(0.0, 1.0, -1.0, 2.0).unwrap())).unwrap();
    assert_eq!(p.klass, DWClass::BoundaryParabolic);
    assert_eq!(p.multiplier, c(1.0, 0.0));
    assert!(classify(&Symbol::identity()).is_err());
}
