//! Iteration of self-maps, uniform convergence to the Denjoy-Wolff point, and
//! UCI certificates.
//!
//! Grid sups are lower bounds for the true sup over the disk; certificates
//! rest on the analytic rate bounds, the grids only illustrate them.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::{boundary_circle, classify, DWClass, DWReport, FixedPoint, MobiusMap, Symbol};

pub const MAX_ITERATE: usize = 1_000_000;
/// Half-angle of the window around `a` filled by the Julia quotient limit.
pub const WINDOW: f64 = 1e-3;
const HOROCYCLE_SAMPLES: usize = 8192;
const HOROCYCLE_SAFETY: f64 = 1e-6;
const CIRCLE_TOL: f64 = 1e-9;
const DOMINATION_SLACK: f64 = 1e-9;

/// Polar sampling grid: Chebyshev-spaced radii on `[0, r_max]` times equispaced angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radii: usize,
    pub angles: usize,
    pub r_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { radii: 64, angles: 256, r_max: 0.999999 }
    }
}

impl GridSpec {
    pub fn radius_values(&self) -> Vec<f64> {
        if self.radii == 1 {
            return vec![self.r_max];
        }
        let n = (self.radii - 1) as f64;
        (0..self.radii)
            .map(|k| 0.5 * self.r_max * (1.0 - (PI * k as f64 / n).cos()))
            .collect()
    }

    /// Grid points, radius-major.
    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.radii * self.angles);
        for r in self.radius_values() {
            for j in 0..self.angles {
                out.push(Complex64::from_polar(r, 2.0 * PI * j as f64 / self.angles as f64));
            }
        }
        out
    }
}

/// `H(a, λ) = {z : |a - z|² ≤ λ (1 - |z|²)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Horocycle {
    pub a: Complex64,
    pub lambda: f64,
}

impl Horocycle {
    pub fn new(a: Complex64, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::NonPositive { name: "lambda", value: lambda });
        }
        if (a.norm() - 1.0).abs() > CIRCLE_TOL {
            return Err(Error::OutsideRadius { modulus: a.norm(), radius: 1.0 });
        }
        Ok(Horocycle { a: a / a.norm(), lambda })
    }

    pub fn center(&self) -> Complex64 {
        self.a / (1.0 + self.lambda)
    }

    pub fn radius(&self) -> f64 {
        self.lambda / (1.0 + self.lambda)
    }

    /// `|a - z|² - λ(1 - |z|²)`; nonpositive on the horocycle.
    pub fn excess(&self, z: Complex64) -> f64 {
        (self.a - z).norm_sqr() - self.lambda * (1.0 - z.norm_sqr())
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.excess(z) <= tol
    }
}

/// `φ_n`: exact for Möbius maps, a lazy composition otherwise. A Möbius power
/// whose normalized determinant falls below the floor is kept lazy as well.
pub fn iterate(phi: &Symbol, n: usize) -> Result<Symbol> {
    if n > MAX_ITERATE {
        return Err(Error::IterationOverflow(n as u64));
    }
    if let Some(m) = phi.as_mobius() {
        match m.pow(n as u64) {
            Ok(p) => return Ok(Symbol::mobius(p)),
            Err(Error::DegenerateMobius(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(Symbol::iterate_lazy(phi.clone(), n))
}

/// Max of `|f(z) - a|` over the grid.
pub fn sup_dist(f: &Symbol, a: Complex64, grid: &GridSpec) -> Result<f64> {
    let pts = grid.points();
    let vals: Vec<f64> = pts
        .par_iter()
        .map(|&z| f.eval(z).map(|w| (w - a).norm()))
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// `sup_dist(φ_n, a)` for `n = 1..=n_max`.
pub fn orbit_sups(phi: &Symbol, a: Complex64, grid: &GridSpec, n_max: usize) -> Result<Vec<f64>> {
    if phi.as_mobius().is_some() {
        return (1..=n_max).map(|n| sup_dist(&iterate(phi, n)?, a, grid)).collect();
    }
    let mut pts = grid.points();
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        pts = pts.par_iter().map(|&z| phi.eval(z)).collect::<Result<_>>()?;
        out.push(pts.iter().map(|w| (w - a).norm()).fold(0.0, f64::max));
    }
    Ok(out)
}

/// Second derivative by a Cauchy integral on a small circle around `z`.
fn second_derivative(phi: &Symbol, z: Complex64) -> Result<Complex64> {
    if let Some(m) = phi.as_mobius() {
        let [_, _, c, d] = m.coefficients();
        let den = c * z + d;
        return Ok(-2.0 * c * m.determinant() / (den * den * den));
    }
    let h = (0.5 * (phi.analyticity_radius() - z.norm())).min(0.25);
    if !(h > 0.0) {
        return Err(Error::RadiusTooSmall { radius: phi.analyticity_radius(), required: z.norm() });
    }
    let k = 64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..k {
        let u = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64);
        acc += phi.eval(z + h * u)? * u.powi(-2);
    }
    Ok(2.0 * acc / (k as f64 * h * h))
}

/// Smallest `λ` with `φ(𝔻̄) ⊆ H(a, λ)`, from the boundary image; the window of
/// half-angle [`WINDOW`] around `a` uses the Julia quotient limit
/// `s² / (s - s² + Re(a φ''(a)))`. Returned with a `1 + 1e-6` safety factor.
pub fn horocycle_param(phi: &Symbol, a: Complex64) -> Result<f64> {
    if (a.norm() - 1.0).abs() > CIRCLE_TOL {
        return Err(Error::OutsideRadius { modulus: a.norm(), radius: 1.0 });
    }
    let a = a / a.norm();
    if phi.analyticity_radius() <= 1.0 {
        return Err(Error::RadiusTooSmall { radius: phi.analyticity_radius(), required: 1.0 });
    }
    let quotient = |w: Complex64| (a - w).norm_sqr() / (1.0 - w.norm_sqr());
    let fa = phi.eval(a)?;
    let touches = fa.norm() >= 1.0 - CIRCLE_TOL;
    if touches && (fa - a).norm() > 1e-8 {
        return Err(Error::RefutedHypothesis(format!("φ(a) = {fa} lies on the circle but differs from a")));
    }
    let theta0 = a.arg();
    let mut offsets: Vec<f64> = (0..HOROCYCLE_SAMPLES)
        .map(|j| 2.0 * PI * j as f64 / HOROCYCLE_SAMPLES as f64)
        .map(|t| if t > PI { t - 2.0 * PI } else { t })
        .collect();
    // dense ring just outside the window
    for k in 0..200 {
        let t = WINDOW * (50.0f64).powf(k as f64 / 199.0);
        offsets.push(t);
        offsets.push(-t);
    }
    let vals: Vec<Result<Option<f64>>> = offsets
        .par_iter()
        .map(|&t| {
            if touches && t.abs() <= WINDOW {
                return Ok(None);
            }
            let w = phi.eval(Complex64::from_polar(1.0, theta0 + t))?;
            if w.norm() >= 1.0 - CIRCLE_TOL {
                return Err(Error::RefutedHypothesis(format!(
                    "boundary point at angle offset {t:.6} maps to |w| = {:.12}",
                    w.norm()
                )));
            }
            Ok(Some(quotient(w)))
        })
        .collect();
    let mut lambda: f64 = 0.0;
    for v in vals {
        if let Some(q) = v? {
            lambda = lambda.max(q);
        }
    }
    if touches {
        let s = phi.derivative_at(a)?.re;
        let p = a * second_derivative(phi, a)?;
        let den = s - s * s + p.re;
        if !(den > 0.0) {
            return Err(Error::RefutedHypothesis(format!("Julia quotient limit has denominator {den}")));
        }
        lambda = lambda.max(s * s / den);
    } else {
        lambda = lambda.max(quotient(fa));
    }
    Ok(lambda * (1.0 + HOROCYCLE_SAFETY))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    InteriorCompact,
    JuliaHorocycle,
    #[serde(rename = "parabolic-2-over-t")]
    Parabolic2OverT,
    EmpiricalOnly,
}

/// `n ↦` bound on `sup_z |φ_n(z) - a|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum RateBound {
    /// `√λ · s^{(n-1)/2}`.
    Julia { lambda: f64, s: f64 },
    /// `2 / (n t)`.
    Parabolic { t: f64 },
    /// `2 r0 q^{n - N}` for `n ≥ N`, `1 + |a|` before.
    Interior { n0: usize, r0: f64, q: f64, a_modulus: f64 },
    None,
}

impl RateBound {
    pub fn at(&self, n: usize) -> Option<f64> {
        match *self {
            RateBound::Julia { lambda, s } => Some(lambda.sqrt() * s.powf((n as f64 - 1.0) / 2.0)),
            RateBound::Parabolic { t } => (n > 0).then(|| 2.0 / (n as f64 * t)),
            RateBound::Interior { n0, r0, q, a_modulus } => {
                if n >= n0 {
                    Some(2.0 * r0 * q.powi((n - n0) as i32))
                } else {
                    Some(1.0 + a_modulus)
                }
            }
            RateBound::None => None,
        }
    }

    pub fn formula(&self) -> String {
        match *self {
            RateBound::Julia { lambda, s } => format!("sqrt({lambda}) * {s}^((n-1)/2)"),
            RateBound::Parabolic { t } => format!("2 / (n * {t})"),
            RateBound::Interior { n0, r0, q, a_modulus } => {
                format!("2 * {r0} * {q}^(n - {n0}) for n >= {n0}, else {}", 1.0 + a_modulus)
            }
            RateBound::None => "none".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupRow {
    pub n: usize,
    pub sup: f64,
    pub bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UCICertificate {
    pub verdict: Verdict,
    pub mechanism: Mechanism,
    #[serde(rename = "N")]
    pub n: usize,
    pub lambda: Option<f64>,
    pub rate_bound: RateBound,
    pub rate_formula: String,
    pub empirical_sups: Vec<SupRow>,
    pub grid_spec: GridSpec,
    pub dw: DWReport,
    pub notes: Vec<String>,
}

impl UCICertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialization is infallible")
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "sup", "bound"])?;
        for row in &self.empirical_sups {
            let bound = row.bound.map(|b| b.to_string()).unwrap_or_default();
            wr.write_record([row.n.to_string(), row.sup.to_string(), bound])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Every recorded sup is within the rate bound (plus `1e-9`).
    pub fn bounds_dominate(&self) -> bool {
        self.empirical_sups
            .iter()
            .all(|r| r.bound.is_none_or(|b| r.sup <= b + DOMINATION_SLACK))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct UciOptions {
    /// Rows in the empirical table.
    pub n_max: usize,
    /// Largest `N` tried for `φ_N(𝔻̄) ⊆ 𝔻` in the interior case.
    pub search_cap: usize,
    pub grid: GridSpec,
}

impl Default for UciOptions {
    fn default() -> Self {
        UciOptions { n_max: 32, search_cap: 64, grid: GridSpec::default() }
    }
}

pub fn uci_certify(phi: &Symbol) -> Result<UCICertificate> {
    uci_certify_with(phi, &UciOptions::default())
}

pub fn uci_certify_with(phi: &Symbol, opts: &UciOptions) -> Result<UCICertificate> {
    let dw = classify(phi)?;
    let a = dw.point;
    let mut notes = Vec::new();
    let mut verdict = Verdict::Inconclusive;
    let mut mechanism = Mechanism::EmpiricalOnly;
    let mut rate = RateBound::None;
    let mut lambda = None;
    let mut n_used = 1;

    let second_fixed = phi.as_mobius().and_then(|m| second_closed_disk_fixed_point(m, a));

    if dw.is_automorphism {
        verdict = Verdict::Refuted;
        notes.push("disk automorphism: iterates do not converge uniformly on the disk".into());
    } else if let Some(z) = second_fixed {
        verdict = Verdict::Refuted;
        notes.push(format!("second fixed point {z} in the closed disk"));
    } else {
        match dw.klass {
            DWClass::InteriorFixed => {
                if let Some((n0, r0, q)) = interior_search(phi, &dw, opts.search_cap)? {
                    verdict = Verdict::Certified;
                    mechanism = Mechanism::InteriorCompact;
                    n_used = n0;
                    rate = RateBound::Interior { n0, r0, q, a_modulus: a.norm() };
                } else {
                    notes.push(format!("no N <= {} with phi_N(closed disk) inside the disk", opts.search_cap));
                }
            }
            DWClass::BoundaryHyperbolic => match horocycle_param(phi, a) {
                Ok(l) => {
                    verdict = Verdict::Certified;
                    mechanism = Mechanism::JuliaHorocycle;
                    lambda = Some(l);
                    rate = RateBound::Julia { lambda: l, s: dw.multiplier.re };
                }
                Err(Error::RefutedHypothesis(msg)) => {
                    notes.push(format!("N = 1 horocycle hypothesis fails: {msg}"));
                }
                Err(e) => return Err(e),
            },
            DWClass::BoundaryParabolic => match phi.as_mobius() {
                Some(m) => {
                    let t = parabolic_translation(m, a)?;
                    if t.re > 0.0 {
                        verdict = Verdict::Certified;
                        mechanism = Mechanism::Parabolic2OverT;
                        rate = RateBound::Parabolic { t: t.re };
                        if t.im != 0.0 {
                            notes.push(format!("half-plane translation {t}; bound uses Re t"));
                        }
                    } else {
                        notes.push(format!("half-plane translation {t} has Re t <= 0"));
                    }
                }
                None => notes.push("parabolic symbol is not linear fractional".into()),
            },
        }
    }

    let sups = orbit_sups(phi, a, &opts.grid, opts.n_max)?;
    let empirical_sups: Vec<SupRow> = sups
        .into_iter()
        .enumerate()
        .map(|(i, sup)| SupRow { n: i + 1, sup, bound: rate.at(i + 1) })
        .collect();
    let mut cert = UCICertificate {
        verdict,
        mechanism,
        n: n_used,
        lambda,
        rate_bound: rate,
        rate_formula: rate.formula(),
        empirical_sups,
        grid_spec: opts.grid,
        dw,
        notes,
    };
    if cert.verdict == Verdict::Certified && !cert.bounds_dominate() {
        cert.verdict = Verdict::Inconclusive;
        cert.notes.push("measured sup exceeds the rate bound".into());
    }
    Ok(cert)
}

fn second_closed_disk_fixed_point(m: &MobiusMap, a: Complex64) -> Option<Complex64> {
    m.fixed_points().ok()?.into_iter().find_map(|fp| match fp {
        FixedPoint::Finite { z, .. } if z.norm() <= 1.0 + CIRCLE_TOL && (z - a).norm() > CIRCLE_TOL => Some(z),
        _ => None,
    })
}

/// For a parabolic Möbius map with Denjoy-Wolff point `a`, the translation `τ`
/// of the conjugate `ζ ↦ ζ + τ` in the half-plane `ζ = (1 + āz)/(1 - āz)`.
pub fn parabolic_translation(m: &MobiusMap, a: Complex64) -> Result<Complex64> {
    let w = a.conj() * m.eval(Complex64::new(0.0, 0.0))?;
    let one = Complex64::new(1.0, 0.0);
    Ok((one + w) / (one - w) - one)
}

/// Pseudo-hyperbolic distance.
fn pseudo_hyperbolic(z: Complex64, a: Complex64) -> f64 {
    ((z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z)).norm()
}

fn interior_search(phi: &Symbol, dw: &DWReport, cap: usize) -> Result<Option<(usize, f64, f64)>> {
    let a = dw.point;
    let s = dw.multiplier.norm();
    let mut pts: Vec<Complex64> = boundary_circle(4096).collect();
    for n in 1..=cap {
        pts = pts.par_iter().map(|&z| phi.eval(z)).collect::<Result<_>>()?;
        let exact = phi.as_mobius().and_then(|m| m.pow(n as u64).ok());
        let sup = match exact {
            Some(mn) => mn.boundary_sup(),
            None => pts.iter().map(|w| w.norm()).fold(0.0, f64::max),
        };
        if sup < 1.0 - CIRCLE_TOL {
            let r_grid = pts.iter().map(|&w| pseudo_hyperbolic(w, a)).fold(0.0, f64::max);
            // inflate for sampling; stays below one
            let r0 = (r_grid + 1e-3 * (1.0 - r_grid)).min(1.0 - 1e-12);
            let q = (r0 + s) / (1.0 + r0 * s);
            return Ok(Some((n, r0, q)));
        }
    }
    Ok(None)
}
