//! Expression trees for analytic symbols on the disk.
//!
//! Every [`Symbol`] carries an analyticity radius: the largest `ρ` for which the
//! expression is analytic on `|z| < ρ`. Leaves know theirs exactly; combinators
//! take the minimum of their children; compositions and iterates find theirs by
//! bisection on the sampled image of circles `|z| = ρ`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::mobius::MobiusMap;
use crate::error::{Error, Result};
use crate::quadrature::radial_rule;

const POLE_FLOOR: f64 = 1e-14;
const RADIUS_SAMPLES: usize = 512;
const RADIUS_BISECTIONS: usize = 60;
/// Search ceiling for entire inner maps of a composition.
const RADIUS_CEILING: f64 = 8.0;
/// Image must stay this fraction inside the outer map's radius.
const IMAGE_MARGIN: f64 = 0.999;

#[derive(Debug)]
pub enum Node {
    Mobius(MobiusMap),
    Poly(Vec<Complex64>),
    Exp(Symbol),
    Product(Symbol, Symbol),
    Scale(Complex64, Symbol),
    /// Szegő kernel `1 / (1 - conj(w) z)`.
    Kernel(Complex64),
    Const(Complex64),
    Sum(Vec<Symbol>),
    Compose { outer: Symbol, inner: Symbol },
    /// `map` applied `n` times; `n = 0` is the identity.
    Iterate { map: Symbol, n: usize },
    /// Analytic logarithm continued radially from the principal value at 0.
    Log { arg: Symbol, base: Complex64 },
}

#[derive(Clone, Debug)]
pub struct Symbol {
    node: Arc<Node>,
    radius: f64,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Symbol {
    fn from_node(node: Node, radius: f64) -> Self {
        Symbol { node: Arc::new(node), radius }
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn analyticity_radius(&self) -> f64 {
        self.radius
    }

    pub fn mobius(m: MobiusMap) -> Self {
        let r = m.analyticity_radius();
        Self::from_node(Node::Mobius(m), r)
    }

    pub fn identity() -> Self {
        Self::mobius(MobiusMap::identity())
    }

    pub fn poly(coeffs: Vec<Complex64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![c(0.0, 0.0)] } else { coeffs };
        Self::from_node(Node::Poly(coeffs), f64::INFINITY)
    }

    pub fn poly_real(coeffs: &[f64]) -> Self {
        Self::poly(coeffs.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn constant(v: Complex64) -> Self {
        Self::from_node(Node::Const(v), f64::INFINITY)
    }

    pub fn real(v: f64) -> Self {
        Self::constant(c(v, 0.0))
    }

    pub fn kernel(w: Complex64) -> Result<Self> {
        if !(w.norm() < 1.0) {
            return Err(Error::OutsideRadius { modulus: w.norm(), radius: 1.0 });
        }
        let r = if w.norm() == 0.0 { f64::INFINITY } else { 1.0 / w.norm() };
        Ok(Self::from_node(Node::Kernel(w), r))
    }

    pub fn exp(arg: Symbol) -> Self {
        let r = arg.radius;
        Self::from_node(Node::Exp(arg), r)
    }

    pub fn product(left: Symbol, right: Symbol) -> Self {
        let r = left.radius.min(right.radius);
        Self::from_node(Node::Product(left, right), r)
    }

    /// Product of a nonempty list, folded left.
    pub fn product_of(factors: Vec<Symbol>) -> Self {
        let mut it = factors.into_iter();
        let first = it.next().unwrap_or_else(|| Symbol::real(1.0));
        it.fold(first, Symbol::product)
    }

    pub fn scale(factor: Complex64, arg: Symbol) -> Self {
        let r = arg.radius;
        Self::from_node(Node::Scale(factor, arg), r)
    }

    pub fn sum(terms: Vec<Symbol>) -> Self {
        if terms.is_empty() {
            return Symbol::real(0.0);
        }
        let r = terms.iter().map(|t| t.radius).fold(f64::INFINITY, f64::min);
        Self::from_node(Node::Sum(terms), r)
    }

    /// `a - b`.
    pub fn difference(a: Symbol, b: Symbol) -> Self {
        Symbol::sum(vec![a, Symbol::scale(c(-1.0, 0.0), b)])
    }

    /// `outer ∘ inner`. Möbius pairs compose exactly.
    pub fn compose(outer: Symbol, inner: Symbol) -> Result<Self> {
        if let (Node::Mobius(f), Node::Mobius(g)) = (outer.node(), inner.node()) {
            return Ok(Symbol::mobius(f.compose(g)?));
        }
        if let Node::Const(v) = outer.node() {
            return Ok(Symbol::constant(*v));
        }
        let radius = if outer.radius.is_infinite() {
            inner.radius
        } else {
            let limit = outer.radius * IMAGE_MARGIN;
            largest_radius(inner.radius, |rho| {
                circle(rho).all(|z| matches!(inner.eval_unchecked(z), Ok(w) if w.norm() < limit))
            })
        };
        Ok(Self::from_node(Node::Compose { outer, inner }, radius))
    }

    /// Lazy n-fold self-composition.
    pub fn iterate_lazy(map: Symbol, n: usize) -> Self {
        if n == 0 {
            return Symbol::identity();
        }
        if n == 1 {
            return map;
        }
        let radius = if map.radius.is_infinite() {
            // entire maps: the orbit of a circle must stay bounded only to be finite
            largest_radius(f64::INFINITY, |rho| {
                circle(rho).all(|mut z| {
                    for _ in 0..n {
                        match map.eval_unchecked(z) {
                            Ok(w) if w.is_finite() && w.norm() < 1e150 => z = w,
                            _ => return false,
                        }
                    }
                    true
                })
            })
        } else {
            let limit = map.radius * IMAGE_MARGIN;
            largest_radius(map.radius, |rho| {
                circle(rho).all(|mut z| {
                    for step in 0..n {
                        if step > 0 && z.norm() >= limit {
                            return false;
                        }
                        match map.eval_unchecked(z) {
                            Ok(w) => z = w,
                            Err(_) => return false,
                        }
                    }
                    true
                })
            })
        };
        Self::from_node(Node::Iterate { map, n }, radius)
    }

    /// Analytic logarithm of a symbol that is zero-free on a disk of radius
    /// greater than one. The branch is the principal value at 0.
    pub fn log(arg: Symbol) -> Result<Self> {
        if let Node::Exp(u) = arg.node() {
            return Ok(u.clone());
        }
        if arg.radius <= 1.0 {
            return Err(Error::RadiusTooSmall { radius: arg.radius, required: 1.0 });
        }
        let mut rho = if arg.radius.is_infinite() { 2.0 } else { (1.0 + 0.5 * (arg.radius - 1.0)).min(2.0) };
        let mut inf_seen = f64::INFINITY;
        for _ in 0..24 {
            let (winding, inf) = winding_number(&arg, rho)?;
            inf_seen = inf_seen.min(inf);
            if inf > 1e-9 && winding == 0 {
                let base = arg.eval_unchecked(c(0.0, 0.0))?.ln();
                return Ok(Self::from_node(Node::Log { arg, base }, rho));
            }
            rho = 1.0 + 0.5 * (rho - 1.0);
        }
        Err(Error::VanishingWeight { inf: inf_seen })
    }

    pub fn as_mobius(&self) -> Option<&MobiusMap> {
        match self.node() {
            Node::Mobius(m) => Some(m),
            _ => None,
        }
    }

    /// Structural constant detection; exact for constant subtrees.
    pub fn constant_value(&self) -> Option<Complex64> {
        match self.node() {
            Node::Const(v) => Some(*v),
            Node::Poly(p) => p[1..].iter().all(|x| *x == c(0.0, 0.0)).then_some(p[0]),
            Node::Kernel(w) => (*w == c(0.0, 0.0)).then_some(c(1.0, 0.0)),
            Node::Mobius(_) => None,
            Node::Exp(u) => u.constant_value().map(|v| v.exp()),
            Node::Product(a, b) => Some(a.constant_value()? * b.constant_value()?),
            Node::Scale(k, s) => s.constant_value().map(|v| k * v),
            Node::Sum(terms) => {
                let mut acc = c(0.0, 0.0);
                for t in terms {
                    acc += t.constant_value()?;
                }
                Some(acc)
            }
            Node::Compose { outer, inner } => match outer.constant_value() {
                Some(v) => Some(v),
                None => outer.eval_unchecked(inner.constant_value()?).ok(),
            },
            Node::Iterate { map, n } => {
                if *n == 0 {
                    None
                } else {
                    map.constant_value()
                }
            }
            Node::Log { arg, base } => arg.constant_value().map(|_| *base),
        }
    }

    /// Pointwise value; requires `|z| < analyticity_radius`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        self.eval_unchecked(z)
    }

    /// Value and first derivative; requires `|z| < analyticity_radius`.
    pub fn eval_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        self.check_domain(z)?;
        self.eval_d(z)
    }

    pub fn derivative_at(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_with_derivative(z)?.1)
    }

    fn check_domain(&self, z: Complex64) -> Result<()> {
        if z.norm() >= self.radius {
            return Err(Error::OutsideRadius { modulus: z.norm(), radius: self.radius });
        }
        Ok(())
    }

    pub(crate) fn eval_unchecked(&self, z: Complex64) -> Result<Complex64> {
        match self.node() {
            Node::Mobius(m) => m.eval(z),
            Node::Poly(p) => Ok(horner(p, z)),
            Node::Exp(u) => Ok(u.eval_unchecked(z)?.exp()),
            Node::Product(a, b) => Ok(a.eval_unchecked(z)? * b.eval_unchecked(z)?),
            Node::Scale(k, s) => Ok(k * s.eval_unchecked(z)?),
            Node::Kernel(w) => {
                let den = c(1.0, 0.0) - w.conj() * z;
                if den.norm() < POLE_FLOOR {
                    return Err(Error::PoleProximity { z, modulus: den.norm() });
                }
                Ok(den.inv())
            }
            Node::Const(v) => Ok(*v),
            Node::Sum(terms) => {
                let mut acc = c(0.0, 0.0);
                for t in terms {
                    acc += t.eval_unchecked(z)?;
                }
                Ok(acc)
            }
            Node::Compose { outer, inner } => outer.eval_unchecked(inner.eval_unchecked(z)?),
            Node::Iterate { map, n } => {
                let mut w = z;
                for _ in 0..*n {
                    w = map.eval_unchecked(w)?;
                }
                Ok(w)
            }
            Node::Log { arg, base } => {
                let (t, wts) = radial_rule();
                let mut acc = c(0.0, 0.0);
                for (ti, wi) in t.iter().zip(wts) {
                    let (v, d) = arg.eval_d(z * ti)?;
                    acc += d / v * *wi;
                }
                Ok(base + z * acc)
            }
        }
    }

    fn eval_d(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        match self.node() {
            Node::Mobius(m) => Ok((m.eval(z)?, m.derivative(z)?)),
            Node::Poly(p) => Ok(horner_d(p, z)),
            Node::Exp(u) => {
                let (v, d) = u.eval_d(z)?;
                let e = v.exp();
                Ok((e, e * d))
            }
            Node::Product(a, b) => {
                let (va, da) = a.eval_d(z)?;
                let (vb, db) = b.eval_d(z)?;
                Ok((va * vb, da * vb + va * db))
            }
            Node::Scale(k, s) => {
                let (v, d) = s.eval_d(z)?;
                Ok((k * v, k * d))
            }
            Node::Kernel(w) => {
                let den = c(1.0, 0.0) - w.conj() * z;
                if den.norm() < POLE_FLOOR {
                    return Err(Error::PoleProximity { z, modulus: den.norm() });
                }
                let inv = den.inv();
                Ok((inv, w.conj() * inv * inv))
            }
            Node::Const(v) => Ok((*v, c(0.0, 0.0))),
            Node::Sum(terms) => {
                let mut acc = (c(0.0, 0.0), c(0.0, 0.0));
                for t in terms {
                    let (v, d) = t.eval_d(z)?;
                    acc.0 += v;
                    acc.1 += d;
                }
                Ok(acc)
            }
            Node::Compose { outer, inner } => {
                let (vi, di) = inner.eval_d(z)?;
                let (vo, d_o) = outer.eval_d(vi)?;
                Ok((vo, d_o * di))
            }
            Node::Iterate { map, n } => {
                let mut w = z;
                let mut d = c(1.0, 0.0);
                for _ in 0..*n {
                    let (v, dv) = map.eval_d(w)?;
                    w = v;
                    d *= dv;
                }
                Ok((w, d))
            }
            Node::Log { arg, .. } => {
                let value = self.eval_unchecked(z)?;
                let (v, d) = arg.eval_d(z)?;
                Ok((value, d / v))
            }
        }
    }
}

fn horner(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(c(0.0, 0.0), |acc, &k| acc * z + k)
}

fn horner_d(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = c(0.0, 0.0);
    let mut d = c(0.0, 0.0);
    for &k in p.iter().rev() {
        d = d * z + v;
        v = v * z + k;
    }
    (v, d)
}

fn circle(rho: f64) -> impl Iterator<Item = Complex64> {
    (0..RADIUS_SAMPLES).map(move |j| Complex64::from_polar(rho, 2.0 * PI * j as f64 / RADIUS_SAMPLES as f64))
}

/// Largest radius below `cap` passing `ok`, assuming `ok` is monotone in the radius.
fn largest_radius(cap: f64, ok: impl Fn(f64) -> bool) -> f64 {
    let hi = if cap.is_finite() { cap * (1.0 - 1e-9) } else { RADIUS_CEILING };
    if ok(hi) {
        return hi;
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..RADIUS_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Winding number of `f` around 0 on `|z| = rho`, and `inf |f|` on the samples.
fn winding_number(f: &Symbol, rho: f64) -> Result<(i64, f64)> {
    const SAMPLES: usize = 4096;
    let vals: Vec<Complex64> = (0..SAMPLES)
        .map(|j| f.eval_unchecked(Complex64::from_polar(rho, 2.0 * PI * j as f64 / SAMPLES as f64)))
        .collect::<Result<_>>()?;
    let inf = vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if inf == 0.0 {
        return Ok((i64::MAX, 0.0));
    }
    let total: f64 = (0..SAMPLES).map(|j| (vals[(j + 1) % SAMPLES] / vals[j]).arg()).sum();
    Ok(((total / (2.0 * PI)).round() as i64, inf))
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Mobius(m) => {
                let [a, b, cc, d] = m.coefficients();
                write!(f, "({a})z+({b}) / ({cc})z+({d})")
            }
            Node::Poly(p) => {
                write!(f, "poly[")?;
                for (i, k) in p.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k}")?;
                }
                write!(f, "]")
            }
            Node::Exp(u) => write!(f, "exp({u})"),
            Node::Product(a, b) => write!(f, "({a})·({b})"),
            Node::Scale(k, s) => write!(f, "({k})·({s})"),
            Node::Kernel(w) => write!(f, "K[{w}]"),
            Node::Const(v) => write!(f, "{v}"),
            Node::Sum(t) => {
                write!(f, "sum(")?;
                for (i, s) in t.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, ")")
            }
            Node::Compose { outer, inner } => write!(f, "({outer})∘({inner})"),
            Node::Iterate { map, n } => write!(f, "iter{n}({map})"),
            Node::Log { arg, .. } => write!(f, "log({arg})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn reference_eval_examples() {
        let k = Symbol::kernel(z(0.5, 0.0)).unwrap();
        assert_eq!(k.eval(z(0.0, 0.0)).unwrap(), z(1.0, 0.0));
        assert_eq!(k.analyticity_radius(), 2.0);

        let phi = Symbol::mobius(MobiusMap::from_real(0.0, 1.0, -1.0, 2.0).unwrap());
        assert!((phi.eval(z(1.0, 0.0)).unwrap() - z(1.0, 0.0)).norm() < 1e-15);
        assert!((phi.derivative_at(z(1.0, 0.0)).unwrap() - z(1.0, 0.0)).norm() < 1e-15);

        let e = Symbol::exp(Symbol::poly_real(&[2.0, -1.0]));
        assert!((e.eval(z(0.0, 0.0)).unwrap().re - 2f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn derivative_examples() {
        let hyp = Symbol::mobius(MobiusMap::from_real(0.5, 0.5, 0.0, 1.0).unwrap());
        assert!((hyp.derivative_at(z(1.0, 0.0)).unwrap() - z(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(Symbol::real(3.0).derivative_at(z(0.4, 0.1)).unwrap(), z(0.0, 0.0));
        // product/compose chain rule against a central difference
        let s = Symbol::compose(
            Symbol::exp(Symbol::poly_real(&[0.0, 1.0, 0.5])),
            Symbol::kernel(z(0.3, 0.2)).unwrap(),
        )
        .unwrap();
        let p = z(0.2, -0.4);
        let h = 1e-6;
        let fd = (s.eval(p + h).unwrap() - s.eval(p - h).unwrap()) / (2.0 * h);
        assert!((s.derivative_at(p).unwrap() - fd).norm() < 1e-7);
    }

    #[test]
    fn pole_and_domain_errors() {
        let phi = Symbol::mobius(MobiusMap::from_real(0.0, 1.0, -1.0, 2.0).unwrap());
        assert!(matches!(phi.eval(z(2.5, 0.0)), Err(Error::OutsideRadius { .. })));
        let m = MobiusMap::from_real(0.0, 1.0, -1.0, 2.0).unwrap();
        assert!(matches!(m.eval(z(2.0, 0.0)), Err(Error::PoleProximity { .. })));
        assert!(Symbol::kernel(z(1.0, 0.0)).is_err());
    }

    #[test]
    fn radii_are_structural() {
        let k = Symbol::kernel(z(0.25, 0.0)).unwrap();
        let m = Symbol::mobius(MobiusMap::from_real(0.0, 1.0, -1.0, 2.0).unwrap());
        assert_eq!(Symbol::product(k.clone(), m.clone()).analyticity_radius(), 2.0);
        assert_eq!(Symbol::exp(k.clone()).analyticity_radius(), 4.0);
        assert!(Symbol::poly_real(&[1.0, 2.0]).analyticity_radius().is_infinite());
        // K_{1/2} ∘ (z/2 + 1/2): inner image of |z| = ρ has max (ρ+1)/2 < 2 for ρ < 3.
        let half = Symbol::mobius(MobiusMap::from_real(0.5, 0.5, 0.0, 1.0).unwrap());
        let comp = Symbol::compose(Symbol::kernel(z(0.5, 0.0)).unwrap(), half).unwrap();
        assert!((comp.analyticity_radius() - 3.0).abs() < 0.01, "{}", comp.analyticity_radius());
    }

    #[test]
    fn log_inverts_exp() {
        let psi = Symbol::kernel(z(0.5, 0.0)).unwrap();
        let eta = Symbol::log(psi.clone()).unwrap();
        assert!(eta.analyticity_radius() > 1.0);
        let back = Symbol::exp(eta.clone());
        for k in 0..50 {
            let p = Complex64::from_polar(0.95 * (k as f64 / 50.0).sqrt(), 2.4 * k as f64);
            assert!((back.eval(p).unwrap() - psi.eval(p).unwrap()).norm() < 1e-12);
        }
        let d = eta.derivative_at(z(0.3, 0.0)).unwrap();
        assert!((d - z(0.5 / (1.0 - 0.15), 0.0)).norm() < 1e-13);
        // zeros in the disk are rejected
        assert!(matches!(
            Symbol::log(Symbol::poly_real(&[0.5, 1.0])),
            Err(Error::VanishingWeight { .. })
        ));
    }

    #[test]
    fn constants_are_detected() {
        let k = Symbol::scale(z(2.0, 0.0), Symbol::exp(Symbol::real(0.0)));
        assert_eq!(k.constant_value(), Some(z(2.0, 0.0)));
        let phi = Symbol::mobius(MobiusMap::from_real(0.5, 0.5, 0.0, 1.0).unwrap());
        assert_eq!(Symbol::compose(Symbol::real(3.0), phi.clone()).unwrap().constant_value(), Some(z(3.0, 0.0)));
        assert_eq!(phi.constant_value(), None);
    }

    #[test]
    fn iterate_lazy_matches_repeated_eval() {
        let quad = Symbol::poly_real(&[0.5, 0.25, 0.25]); // (2 + z + z^2)/4
        let it = Symbol::iterate_lazy(quad.clone(), 5);
        let p = z(0.3, -0.6);
        let mut w = p;
        for _ in 0..5 {
            w = quad.eval(w).unwrap();
        }
        assert!((it.eval(p).unwrap() - w).norm() < 1e-15);
        assert!(it.analyticity_radius() > 1.0);
    }
}
