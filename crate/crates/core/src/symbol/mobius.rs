//! Linear fractional maps `z -> (az + b) / (cz + d)` with exact group algebra.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DET_FLOOR: f64 = 1e-14;
const POLE_FLOOR: f64 = 1e-14;
/// Coefficients below this modulus (after normalization) are treated as zero.
const ZERO_COEFF: f64 = 1e-14;
const TIE: f64 = 1e-12;

/// A fixed point of a linear fractional map on the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "kebab-case")]
pub enum FixedPoint {
    Finite { z: Complex64, multiplicity: u8 },
    Infinity { multiplicity: u8 },
}

impl FixedPoint {
    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            FixedPoint::Finite { z, .. } => Some(z),
            FixedPoint::Infinity { .. } => None,
        }
    }

    pub fn multiplicity(&self) -> u8 {
        match *self {
            FixedPoint::Finite { multiplicity, .. } | FixedPoint::Infinity { multiplicity } => {
                multiplicity
            }
        }
    }
}

/// `z -> (az + b) / (cz + d)`, stored with the largest-modulus coefficient
/// scaled to exactly `1 + 0i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMobius", into = "RawMobius")]
pub struct MobiusMap {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

#[derive(Serialize, Deserialize)]
struct RawMobius {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl TryFrom<RawMobius> for MobiusMap {
    type Error = Error;

    fn try_from(raw: RawMobius) -> Result<Self> {
        MobiusMap::new(raw.a, raw.b, raw.c, raw.d)
    }
}

impl From<MobiusMap> for RawMobius {
    fn from(m: MobiusMap) -> Self {
        RawMobius { a: m.a, b: m.b, c: m.c, d: m.d }
    }
}

fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl MobiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let coeffs = [a, b, c, d];
        if coeffs.iter().any(|z| !z.is_finite()) {
            return Err(Error::DegenerateMobius(f64::NAN));
        }
        let max = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return Err(Error::DegenerateMobius(0.0));
        }
        // First index within a relative tie of the maximum; keeps normalization idempotent.
        let pivot = coeffs
            .iter()
            .position(|z| z.norm() >= max * (1.0 - TIE))
            .expect("nonempty");
        let k = coeffs[pivot];
        let mut n = coeffs.map(|z| z / k);
        n[pivot] = cplx(1.0, 0.0);
        let det = n[0] * n[3] - n[1] * n[2];
        if det.norm() < DET_FLOOR {
            return Err(Error::DegenerateMobius(det.norm()));
        }
        Ok(MobiusMap { a: n[0], b: n[1], c: n[2], d: n[3] })
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(cplx(a, 0.0), cplx(b, 0.0), cplx(c, 0.0), cplx(d, 0.0))
    }

    pub fn identity() -> Self {
        MobiusMap::from_real(1.0, 0.0, 0.0, 1.0).expect("identity is valid")
    }

    /// `z -> s z + t`.
    pub fn affine(s: Complex64, t: Complex64) -> Result<Self> {
        Self::new(s, t, cplx(0.0, 0.0), cplx(1.0, 0.0))
    }

    /// The parabolic non-automorphism semigroup `(t + (2 - t) z) / ((2 + t) - t z)`
    /// with Denjoy-Wolff point 1.
    pub fn parabolic_semigroup(t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::NonPositive { name: "t", value: t });
        }
        Self::from_real(2.0 - t, t, -t, 2.0 + t)
    }

    pub fn coefficients(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_affine(&self) -> bool {
        self.c.norm() < ZERO_COEFF
    }

    pub fn is_identity(&self) -> bool {
        self.b.norm() < ZERO_COEFF && self.c.norm() < ZERO_COEFF && (self.a - self.d).norm() < ZERO_COEFF
    }

    /// Finite pole `-d/c`, if any.
    pub fn pole(&self) -> Option<Complex64> {
        if self.is_affine() {
            None
        } else {
            Some(-self.d / self.c)
        }
    }

    pub fn analyticity_radius(&self) -> f64 {
        self.pole().map_or(f64::INFINITY, |p| p.norm())
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let den = self.c * z + self.d;
        if den.norm() < POLE_FLOOR {
            return Err(Error::PoleProximity { z, modulus: den.norm() });
        }
        Ok((self.a * z + self.b) / den)
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let den = self.c * z + self.d;
        if den.norm() < POLE_FLOOR {
            return Err(Error::PoleProximity { z, modulus: den.norm() });
        }
        Ok(self.determinant() / (den * den))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> Result<Self> {
        Self::new(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )
    }

    /// n-fold self-composition by repeated squaring.
    pub fn pow(&self, mut n: u64) -> Result<Self> {
        let mut acc = MobiusMap::identity();
        let mut base = *self;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.compose(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.compose(&base)?;
            }
        }
        Ok(acc)
    }

    /// Roots of `c z^2 + (d - a) z - b = 0`, with infinity reported explicitly.
    pub fn fixed_points(&self) -> Result<Vec<FixedPoint>> {
        if self.is_identity() {
            return Err(Error::IdentityMap);
        }
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        if self.is_affine() {
            let slope = d - a;
            if slope.norm() < ZERO_COEFF {
                // translation: only infinity, doubly
                return Ok(vec![FixedPoint::Infinity { multiplicity: 2 }]);
            }
            return Ok(vec![
                FixedPoint::Finite { z: b / slope, multiplicity: 1 },
                FixedPoint::Infinity { multiplicity: 1 },
            ]);
        }
        let p = d - a;
        let disc = p * p + 4.0 * b * c;
        let scale = (p * p).norm() + (4.0 * b * c).norm();
        if disc.norm() <= 1e-13 * scale.max(1e-300) {
            return Ok(vec![FixedPoint::Finite { z: -p / (2.0 * c), multiplicity: 2 }]);
        }
        let sq = disc.sqrt();
        // q = -(p ± sqrt(disc))/2 with the sign that avoids cancellation
        let q = if (p.conj() * sq).re >= 0.0 { -(p + sq) / 2.0 } else { -(p - sq) / 2.0 };
        let r1 = q / c;
        let r2 = -b / q;
        Ok(vec![
            FixedPoint::Finite { z: r1, multiplicity: 1 },
            FixedPoint::Finite { z: r2, multiplicity: 1 },
        ])
    }

    /// Cowen's auxiliary map `(conj(a) z - conj(c)) / (-conj(b) z + conj(d))`.
    pub fn cowen_sigma(&self) -> Result<Self> {
        Self::new(self.a.conj(), -self.c.conj(), -self.b.conj(), self.d.conj())
    }

    /// Center and radius of the image of the unit circle, or `None` when the
    /// image is a line (pole on the circle).
    pub fn image_of_unit_circle(&self) -> Option<(Complex64, f64)> {
        let pts = [cplx(1.0, 0.0), cplx(0.0, 1.0), cplx(-1.0, 0.0)];
        let mut img = [cplx(0.0, 0.0); 3];
        for (w, z) in img.iter_mut().zip(pts) {
            *w = self.eval(z).ok()?;
        }
        circumcircle(img[0], img[1], img[2])
    }

    /// Exact test for `φ(closed disk) ⊆ closed disk` (up to `tol`).
    pub fn maps_closed_disk_into_itself(&self, tol: f64) -> bool {
        if self.analyticity_radius() <= 1.0 {
            return false;
        }
        match self.image_of_unit_circle() {
            Some((center, radius)) => center.norm() + radius <= 1.0 + tol,
            None => false,
        }
    }

    /// Sup of `|φ|` over the unit circle, computed from the image circle.
    pub fn boundary_sup(&self) -> f64 {
        if self.analyticity_radius() <= 1.0 {
            return f64::INFINITY;
        }
        self.image_of_unit_circle()
            .map_or(f64::INFINITY, |(c, r)| c.norm() + r)
    }

    /// A self-map of the disk that maps the circle onto the circle.
    pub fn is_disk_automorphism(&self, tol: f64) -> bool {
        if !self.maps_closed_disk_into_itself(tol) {
            return false;
        }
        match self.image_of_unit_circle() {
            Some((center, radius)) => center.norm() < tol.max(1e-12) && (radius - 1.0).abs() < tol,
            None => false,
        }
    }
}

fn circumcircle(p: Complex64, q: Complex64, r: Complex64) -> Option<(Complex64, f64)> {
    // Solve |c - p| = |c - q| = |c - r| as a 2x2 linear system.
    let (ax, ay) = (q.re - p.re, q.im - p.im);
    let (bx, by) = (r.re - p.re, r.im - p.im);
    let det = 2.0 * (ax * by - ay * bx);
    let scale = (ax * ax + ay * ay).max(bx * bx + by * by);
    if det.abs() <= 1e-14 * scale {
        return None;
    }
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let ux = (by * a2 - ay * b2) / det;
    let uy = (ax * b2 - bx * a2) / det;
    let center = p + cplx(ux, uy);
    Some((center, (cplx(ux, uy)).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normalization_is_canonical_and_idempotent() {
        let m = MobiusMap::from_real(0.0, 2.0, -2.0, 4.0).unwrap();
        assert_eq!(m.coefficients()[3], c(1.0, 0.0));
        let again = MobiusMap::new(m.a, m.b, m.c, m.d).unwrap();
        assert_eq!(m, again);
        let tie = MobiusMap::new(c(3.0, 4.0), c(0.0, 0.0), c(0.0, 0.0), c(5.0, 0.0)).unwrap();
        assert_eq!(tie, MobiusMap::new(tie.a, tie.b, tie.c, tie.d).unwrap());
    }

    #[test]
    fn rejects_degenerate() {
        assert!(matches!(
            MobiusMap::from_real(1.0, 2.0, 2.0, 4.0),
            Err(Error::DegenerateMobius(_))
        ));
    }

    #[test]
    fn halving_map_composed_with_itself() {
        let m = MobiusMap::from_real(0.5, 0.5, 0.0, 1.0).unwrap();
        let m2 = m.compose(&m).unwrap();
        let expect = MobiusMap::from_real(0.25, 0.75, 0.0, 1.0).unwrap();
        for z in [c(0.3, 0.1), c(-0.9, 0.0), c(0.0, 0.7)] {
            assert!((m2.eval(z).unwrap() - expect.eval(z).unwrap()).norm() < 1e-15);
        }
        assert_eq!(m.compose(&MobiusMap::identity()).unwrap(), m);
    }

    #[test]
    fn semigroup_at_two_is_one_over_two_minus_z() {
        let p2 = MobiusMap::parabolic_semigroup(2.0).unwrap();
        let target = MobiusMap::from_real(0.0, 1.0, -1.0, 2.0).unwrap();
        assert_eq!(p2, target);
        for t in [0.5, 1.0, 7.0] {
            let p = MobiusMap::parabolic_semigroup(t).unwrap();
            assert!((p.eval(c(0.0, 0.0)).unwrap() - c(t / (2.0 + t), 0.0)).norm() < 1e-15);
        }
        assert!(MobiusMap::parabolic_semigroup(0.0).is_err());
        assert!(MobiusMap::parabolic_semigroup(-1.0).is_err());
    }

    #[test]
    fn fixed_points_of_reference_maps() {
        let hyp = MobiusMap::from_real(0.5, 0.5, 0.0, 1.0).unwrap();
        let fp = hyp.fixed_points().unwrap();
        assert_eq!(fp.len(), 2);
        assert!((fp[0].finite().unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(fp[1], FixedPoint::Infinity { multiplicity: 1 });

        for t in [1.0, 2.0, 5.0, 100.0] {
            let fp = MobiusMap::parabolic_semigroup(t).unwrap().fixed_points().unwrap();
            assert_eq!(fp.len(), 1);
            assert_eq!(fp[0].multiplicity(), 2);
            assert!((fp[0].finite().unwrap() - c(1.0, 0.0)).norm() < 1e-7);
        }

        let rot = MobiusMap::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let fp = rot.fixed_points().unwrap();
        assert!(fp[0].finite().unwrap().norm() < 1e-15);
        assert!(matches!(fp[1], FixedPoint::Infinity { .. }));

        assert!(matches!(MobiusMap::identity().fixed_points(), Err(Error::IdentityMap)));
    }

    #[test]
    fn cowen_sigma_examples() {
        let phi = MobiusMap::from_real(0.0, 1.0, -1.0, 2.0).unwrap();
        assert_eq!(phi.cowen_sigma().unwrap(), phi);
        let s = 0.3;
        let aff = MobiusMap::from_real(s, 1.0 - s, 0.0, 1.0).unwrap();
        let sigma = aff.cowen_sigma().unwrap();
        let expect = MobiusMap::from_real(s, 0.0, -(1.0 - s), 1.0).unwrap();
        for z in [c(0.2, 0.1), c(-0.5, 0.4)] {
            assert!((sigma.eval(z).unwrap() - expect.eval(z).unwrap()).norm() < 1e-15);
        }
        assert_eq!(sigma.eval(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(MobiusMap::identity().cowen_sigma().unwrap(), MobiusMap::identity());
    }

    #[test]
    fn self_map_and_automorphism_tests() {
        let hyp = MobiusMap::from_real(0.5, 0.5, 0.0, 1.0).unwrap();
        assert!(hyp.maps_closed_disk_into_itself(1e-9));
        assert!(!hyp.is_disk_automorphism(1e-9));
        let grow = MobiusMap::from_real(1.5, 0.0, 0.0, 1.0).unwrap();
        assert!(!grow.maps_closed_disk_into_itself(1e-9));
        // parabolic automorphism: Cayley translation w -> w + i
        let aut = MobiusMap::new(c(2.0, 1.0), c(0.0, -1.0), c(0.0, 1.0), c(2.0, -1.0)).unwrap();
        assert!(aut.is_disk_automorphism(1e-9));
    }
}
