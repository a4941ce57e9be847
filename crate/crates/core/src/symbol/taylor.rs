//! Taylor coefficients by trapezoidal Cauchy integration on a circle.
//!
//! With `M` equispaced nodes on `|z| = r`, the discrete transform returns
//! `c_k + Σ_{l≥1} c_{k+lM} r^{lM}`; for any `r < r' < ρ` the aliased part is at
//! most `sup_{|z|=r'} |f| · (r/r')^M / (1 - r/r')`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::expr::{Node, Symbol};
use crate::error::{Error, Result};

/// Nodes per retained coefficient.
pub const OVERSAMPLING: usize = 8;
/// Floor on the node count so that low degrees still alias negligibly.
pub const MIN_NODES: usize = 256;

/// A sampling circle together with its FFT plan.
#[derive(Clone)]
pub struct Contour {
    radius: f64,
    nodes: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Contour {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Contour").field("radius", &self.radius).field("nodes", &self.nodes).finish()
    }
}

/// Default contour radius for a symbol analytic on `|z| < rho`.
pub fn contour_radius(rho: f64) -> f64 {
    if rho > 1.0 {
        (0.99 * rho).min(0.995)
    } else {
        0.999
    }
}

impl Contour {
    /// The contour used for degree `n` expansions of functions analytic on `|z| < rho`.
    pub fn for_degree(rho: f64, n: usize) -> Result<Self> {
        let r = contour_radius(rho);
        if rho <= r {
            return Err(Error::RadiusTooSmall { radius: rho, required: r });
        }
        Ok(Self::with_radius(r, (OVERSAMPLING * (n + 1)).max(MIN_NODES)))
    }

    pub fn with_radius(radius: f64, nodes: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(nodes);
        Contour { radius, nodes, fft }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn points(&self) -> Vec<Complex64> {
        (0..self.nodes)
            .map(|j| Complex64::from_polar(self.radius, 2.0 * PI * j as f64 / self.nodes as f64))
            .collect()
    }

    pub fn sample(&self, s: &Symbol) -> Result<Vec<Complex64>> {
        self.points().into_iter().map(|z| s.eval_unchecked(z)).collect()
    }

    /// Coefficients `c_0..c_n` from samples at [`Contour::points`].
    pub fn coefficients(&self, samples: &[Complex64], n: usize) -> Vec<Complex64> {
        debug_assert_eq!(samples.len(), self.nodes);
        let mut buf = samples.to_vec();
        self.fft.process(&mut buf);
        let scale = 1.0 / self.nodes as f64;
        let inv_r = 1.0 / self.radius;
        let mut rk = 1.0;
        buf.truncate(n + 1);
        buf.resize(n + 1, Complex64::new(0.0, 0.0));
        for v in buf.iter_mut() {
            *v *= scale * rk;
            rk *= inv_r;
        }
        buf
    }
}

/// Taylor coefficients `c_0..c_n` of `s` at 0.
pub fn taylor(s: &Symbol, n: usize) -> Result<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    if let Some(v) = s.constant_value() {
        let mut out = vec![zero; n + 1];
        out[0] = v;
        return Ok(out);
    }
    if let Node::Poly(p) = s.node() {
        let mut out = vec![zero; n + 1];
        for (o, k) in out.iter_mut().zip(p) {
            *o = *k;
        }
        return Ok(out);
    }
    let contour = Contour::for_degree(s.analyticity_radius(), n)?;
    let samples = contour.sample(s)?;
    Ok(contour.coefficients(&samples, n))
}

/// Aliasing bound `sup_{|z|=r'} |s| · (r/r')^M / (1 - r/r')` for the default
/// degree-`n` contour, with the sup sampled on 4096 points of `|z| = r'`.
pub fn taylor_error_bound(s: &Symbol, n: usize, r_prime: f64) -> Result<f64> {
    let contour = Contour::for_degree(s.analyticity_radius(), n)?;
    let r = contour.radius();
    if !(r_prime > r && r_prime < s.analyticity_radius()) {
        return Err(Error::RadiusTooSmall { radius: r_prime, required: r });
    }
    let sup = Contour::with_radius(r_prime, 4096)
        .sample(s)?
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let q = r / r_prime;
    Ok(sup * q.powi(contour.nodes() as i32) / (1.0 - q))
}

/// Horner evaluation of a coefficient vector.
pub fn eval_series(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * z + k)
}
