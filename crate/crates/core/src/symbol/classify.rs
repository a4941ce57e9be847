//! Denjoy-Wolff point and multiplier of a self-map of the disk.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expr::Symbol;
use super::mobius::{FixedPoint, MobiusMap};
use crate::error::{Error, Result};

/// Tolerance for class decisions on the exact path.
pub const EXACT_TOL: f64 = 1e-9;
const SELF_MAP_TOL: f64 = 1e-9;
const BOUNDARY_SAMPLES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DWClass {
    InteriorFixed,
    BoundaryHyperbolic,
    BoundaryParabolic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DWMethod {
    ExactMobius,
    Iterative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DWReport {
    pub point: Complex64,
    pub multiplier: Complex64,
    pub klass: DWClass,
    pub is_automorphism: bool,
    pub method: DWMethod,
    pub residual: f64,
}

impl DWReport {
    pub fn is_boundary(&self) -> bool {
        self.klass != DWClass::InteriorFixed
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    pub max_iter: usize,
    /// Residual `|φ(a) - a|` accepted on the iterative path.
    pub tolerance: f64,
    /// Class decisions (|a| = 1, multiplier = 1) on the iterative path.
    pub class_tolerance: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { max_iter: 100_000, tolerance: 1e-10, class_tolerance: 1e-6 }
    }
}

/// `count` equispaced points on the unit circle.
pub fn boundary_circle(count: usize) -> impl Iterator<Item = Complex64> {
    (0..count).map(move |j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / count as f64))
}

pub fn classify(phi: &Symbol) -> Result<DWReport> {
    classify_with(phi, &ClassifyOptions::default())
}

pub fn classify_with(phi: &Symbol, opts: &ClassifyOptions) -> Result<DWReport> {
    match phi.as_mobius() {
        Some(m) => classify_mobius(m),
        None => classify_iterative(phi, opts),
    }
}

fn classify_mobius(m: &MobiusMap) -> Result<DWReport> {
    if m.is_identity() {
        return Err(Error::IdentityMap);
    }
    if !m.maps_closed_disk_into_itself(SELF_MAP_TOL) {
        return Err(Error::NotSelfMap { sup: m.boundary_sup() });
    }
    let is_automorphism = m.is_disk_automorphism(EXACT_TOL);
    let mut candidates: Vec<(Complex64, Complex64)> = Vec::new();
    for fp in m.fixed_points()? {
        if let FixedPoint::Finite { z, .. } = fp {
            if z.norm() <= 1.0 + EXACT_TOL {
                candidates.push((z, m.derivative(z)?));
            }
        }
    }
    // An interior fixed point wins; otherwise the boundary point with multiplier ≤ 1.
    let pick = candidates
        .iter()
        .find(|(z, _)| z.norm() < 1.0 - EXACT_TOL)
        .or_else(|| {
            candidates
                .iter()
                .filter(|(_, d)| d.norm() <= 1.0 + EXACT_TOL)
                .min_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        })
        .copied();
    let (point, multiplier) = pick.ok_or(Error::NonConvergence { iterations: 0, residual: f64::NAN })?;
    let point = if point.norm() >= 1.0 - EXACT_TOL && (point.norm() - 1.0).abs() <= EXACT_TOL {
        point / point.norm()
    } else {
        point
    };
    let klass = class_of(point, multiplier, EXACT_TOL);
    let multiplier = if klass == DWClass::BoundaryParabolic { Complex64::new(1.0, 0.0) } else { multiplier };
    let residual = (m.eval(point)? - point).norm();
    Ok(DWReport { point, multiplier, klass, is_automorphism, method: DWMethod::ExactMobius, residual })
}

fn class_of(point: Complex64, multiplier: Complex64, tol: f64) -> DWClass {
    if point.norm() < 1.0 - tol {
        DWClass::InteriorFixed
    } else if (multiplier - 1.0).norm() < tol {
        DWClass::BoundaryParabolic
    } else {
        DWClass::BoundaryHyperbolic
    }
}

fn classify_iterative(phi: &Symbol, opts: &ClassifyOptions) -> Result<DWReport> {
    if phi.analyticity_radius() <= 1.0 {
        return Err(Error::RadiusTooSmall { radius: phi.analyticity_radius(), required: 1.0 });
    }
    let mut sup: f64 = 0.0;
    let mut inf = f64::INFINITY;
    let mut moved: f64 = 0.0;
    for z in boundary_circle(BOUNDARY_SAMPLES) {
        let w = phi.eval(z)?;
        sup = sup.max(w.norm());
        inf = inf.min(w.norm());
        moved = moved.max((w - z).norm());
    }
    if moved < 1e-13 {
        return Err(Error::IdentityMap);
    }
    if sup > 1.0 + SELF_MAP_TOL {
        return Err(Error::NotSelfMap { sup });
    }
    let is_automorphism = inf > 1.0 - SELF_MAP_TOL;

    let residual = |z: Complex64| -> Result<f64> { Ok((phi.eval_unchecked(z)? - z).norm()) };
    let mut z = Complex64::new(0.0, 0.0);
    let mut iterations = 0;
    let mut best = (z, residual(z)?);
    while iterations < opts.max_iter && best.1 > opts.tolerance {
        // Steffensen step from z, falling back to the plain orbit step.
        let z1 = phi.eval_unchecked(z)?;
        let z2 = phi.eval_unchecked(z1)?;
        iterations += 2;
        let den = z2 - 2.0 * z1 + z;
        let mut next = z2;
        if den.norm() > 1e-300 {
            let acc = z - (z1 - z) * (z1 - z) / den;
            if acc.is_finite() && acc.norm() <= 1.0 {
                next = acc;
            }
        }
        z = next;
        let r = residual(z)?;
        if r < best.1 {
            best = (z, r);
        }
    }
    let (mut z, mut r) = best;
    // Newton polish on φ(z) - z.
    for _ in 0..200 {
        let (v, d) = phi.eval_with_derivative(z)?;
        let den = d - 1.0;
        if den.norm() < 1e-300 {
            break;
        }
        let cand = z - (v - z) / den;
        if !cand.is_finite() || cand.norm() > 1.0 + opts.class_tolerance {
            break;
        }
        let rc = residual(cand)?;
        if rc >= r && r <= opts.tolerance {
            break;
        }
        if rc < r || rc <= opts.tolerance {
            z = cand;
            r = rc;
        } else {
            break;
        }
    }
    if !(r <= opts.tolerance) {
        return Err(Error::NonConvergence { iterations, residual: r });
    }
    if z.norm() > 1.0 - opts.class_tolerance {
        z /= z.norm();
    }
    let multiplier = phi.derivative_at(z)?;
    let klass = class_of(z, multiplier, opts.class_tolerance);
    let multiplier = match klass {
        DWClass::BoundaryParabolic => Complex64::new(1.0, 0.0),
        _ => multiplier,
    };
    let residual = (phi.eval(z)? - z).norm();
    Ok(DWReport { point: z, multiplier, klass, is_automorphism, method: DWMethod::Iterative, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hyperbolic_example() {
        let r = classify(&Symbol::mobius(MobiusMap::from_real(0.5, 0.5, 0.0, 1.0).unwrap())).unwrap();
        assert_eq!(r.klass, DWClass::BoundaryHyperbolic);
        assert_eq!(r.method, DWMethod::ExactMobius);
        assert!((r.point - c(1.0, 0.0)).norm() < 1e-15);
        assert!((r.multiplier - c(0.5, 0.0)).norm() < 1e-15);
        assert!(!r.is_automorphism);
        assert!(r.residual <= 1e-10);
    }

    #[test]
    fn parabolic_example_and_semigroup() {
        let r = classify(&Symbol::mobius(MobiusMap::from_real(0.0, 1.0, -1.0, 2.0).unwrap())).unwrap();
        assert_eq!(r.klass, DWClass::BoundaryParabolic);
        assert!((r.point - c(1.0, 0.0)).norm() < 1e-12);
        for t in [1.0, 5.0, 100.0] {
            let r = classify(&Symbol::mobius(MobiusMap::parabolic_semigroup(t).unwrap())).unwrap();
            assert_eq!(r.klass, DWClass::BoundaryParabolic, "t={t}");
            assert!((r.point - c(1.0, 0.0)).norm() < 1e-9);
            assert!(r.residual <= 1e-10);
        }
    }

    #[test]
    fn interior_and_rejections() {
        let r = classify(&Symbol::mobius(MobiusMap::from_real(0.5, 0.0, 0.0, 1.0).unwrap())).unwrap();
        assert_eq!(r.klass, DWClass::InteriorFixed);
        assert_eq!(r.point, c(0.0, 0.0));
        assert!(matches!(classify(&Symbol::identity()), Err(Error::IdentityMap)));
        let big = Symbol::mobius(MobiusMap::from_real(2.0, 0.0, 0.0, 1.0).unwrap());
        assert!(matches!(classify(&big), Err(Error::NotSelfMap { .. })));
    }

    #[test]
    fn automorphisms_are_flagged() {
        // parabolic automorphism fixing 1: half-plane translation by 2i
        let m = MobiusMap::new(c(2.0, -2.0), c(0.0, 2.0), c(0.0, -2.0), c(2.0, 2.0)).unwrap();
        let r = classify(&Symbol::mobius(m)).unwrap();
        assert!(r.is_automorphism);
        assert_eq!(r.klass, DWClass::BoundaryParabolic);
        let rot = classify(&Symbol::mobius(MobiusMap::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap())).unwrap();
        assert!(rot.is_automorphism);
        assert_eq!(rot.klass, DWClass::InteriorFixed);
    }

    #[test]
    fn iterative_path_agrees_with_exact() {
        // same maps hidden behind a composition node
        let hyper = Symbol::compose(Symbol::poly_real(&[0.5, 0.5]), Symbol::identity()).unwrap();
        let r = classify(&hyper).unwrap();
        assert_eq!(r.method, DWMethod::Iterative);
        assert_eq!(r.klass, DWClass::BoundaryHyperbolic);
        assert!((r.point - c(1.0, 0.0)).norm() < 1e-9);
        assert!((r.multiplier - c(0.5, 0.0)).norm() < 1e-8);

        let para = Symbol::product(
            Symbol::real(1.0),
            Symbol::mobius(MobiusMap::from_real(0.0, 1.0, -1.0, 2.0).unwrap()),
        );
        let r = classify(&para).unwrap();
        assert_eq!(r.klass, DWClass::BoundaryParabolic, "{r:?}");
        assert!((r.point - c(1.0, 0.0)).norm() < 1e-6);

        let inner = Symbol::poly(vec![c(0.1, 0.2), c(0.3, 0.0), c(0.0, 0.2)]);
        let r = classify(&inner).unwrap();
        assert_eq!(r.klass, DWClass::InteriorFixed);
        assert!(r.residual <= 1e-10);
    }
}
