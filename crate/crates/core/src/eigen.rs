//! Approximate eigenvectors from finite weight products, and exact
//! eigenfunctions `h = e^g` with `g = Σ (η∘φ_n - η(a))`, `ψ = e^η`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{iterate, sup_dist, uci_certify, GridSpec, RateBound, Verdict};
use crate::error::{Error, Result};
use crate::hardy::{apply_exact, h2_norm, H2Vector};
use crate::symbol::{boundary_circle, classify, DWClass, Node, Symbol};

const SCALE_FLOOR: f64 = 1e-14;
const VANISHING_FLOOR: f64 = 1e-9;
const LIPSCHITZ_SAFETY: f64 = 1.05;
const BOUNDARY_SAMPLES: usize = 4096;
/// Tolerance for `C_φ f = λ f` before lifting.
pub const PRECONDITION_TOL: f64 = 1e-8;
/// Default acceptance tolerance for certificate residuals.
pub const ACCEPT_TOL: f64 = 1e-7;
pub const DEFAULT_TERMS: usize = 60;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproxEntry {
    pub m: usize,
    pub vector: H2Vector,
    pub residual: f64,
    pub analytic_bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproxEigenSeq {
    pub psi: Symbol,
    pub phi: Symbol,
    pub a: Complex64,
    pub alpha: Complex64,
    /// Eigenvalue the sequence approximates (`ψ(a)` or `ψ(a)λ` when lifted).
    pub target: Complex64,
    pub degree: usize,
    pub entries: Vec<ApproxEntry>,
}

fn dw_weight(psi: &Symbol, phi: &Symbol) -> Result<(Complex64, Complex64)> {
    let dw = classify(phi)?;
    let alpha = psi.eval(dw.point)?;
    if alpha.norm() < SCALE_FLOOR {
        return Err(Error::ZeroAtFixedPoint(alpha.norm()));
    }
    Ok((dw.point, alpha))
}

fn require_certified(phi: &Symbol) -> Result<crate::dynamics::UCICertificate> {
    let cert = uci_certify(phi)?;
    if cert.verdict != Verdict::Certified {
        return Err(Error::Uncertified(format!("{:?} via {:?}", cert.verdict, cert.mechanism)));
    }
    Ok(cert)
}

/// `h_m = Π_{n=0}^{m} (ψ∘φ_n) / ψ(a)`.
pub fn weight_product(psi: &Symbol, phi: &Symbol, m: usize) -> Result<Symbol> {
    let (_, alpha) = dw_weight(psi, phi)?;
    if psi.constant_value().is_some() {
        return Ok(Symbol::real(1.0));
    }
    let inv = one() / alpha;
    let factors = (0..=m)
        .map(|n| Ok(Symbol::scale(inv, Symbol::compose(psi.clone(), iterate(phi, n)?)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Symbol::product_of(factors))
}

/// `sup |ψ∘φ_n - ψ(a)|` over the default grid.
fn weight_gap(psi: &Symbol, phi: &Symbol, alpha: Complex64, n: usize) -> Result<f64> {
    if psi.constant_value().is_some() {
        return Ok(0.0);
    }
    sup_dist(&Symbol::compose(psi.clone(), iterate(phi, n)?)?, alpha, &GridSpec::default())
}

/// `H_m = h_m / ‖h_m‖` with residuals `‖(W - ψ(a)) H_m‖` for `m = 0..=m_max`.
pub fn approx_eigensequence(psi: &Symbol, phi: &Symbol, m_max: usize, degree: usize) -> Result<ApproxEigenSeq> {
    lifted_inner(psi, phi, &Symbol::real(1.0), one(), m_max, degree)
}

/// The sequence `G_m = g h_m / ‖g h_m‖` for an eigenfunction `g` of `C_φ`.
pub fn lifted_sequence(
    psi: &Symbol,
    phi: &Symbol,
    g: &Symbol,
    lambda: Complex64,
    m_max: usize,
    degree: usize,
) -> Result<ApproxEigenSeq> {
    check_composition_eigen(phi, g, lambda, degree)?;
    lifted_inner(psi, phi, g, lambda, m_max, degree)
}

fn lifted_inner(
    psi: &Symbol,
    phi: &Symbol,
    g: &Symbol,
    lambda: Complex64,
    m_max: usize,
    degree: usize,
) -> Result<ApproxEigenSeq> {
    require_certified(phi)?;
    let (a, alpha) = dw_weight(psi, phi)?;
    let target = alpha * lambda;
    let entries = (0..=m_max)
        .into_par_iter()
        .map(|m| {
            let h = Symbol::product(g.clone(), weight_product(psi, phi, m)?);
            let v = H2Vector::from_symbol(&h, degree)?;
            let norm = h2_norm(&v);
            if norm == 0.0 {
                return Err(Error::ZeroVector);
            }
            let w = apply_exact(psi, phi, &h, degree)?;
            let residual = h2_norm(&w.sub(&v.scale(target))?) / norm;
            let analytic_bound = lambda.norm() * weight_gap(psi, phi, alpha, m + 1)?;
            Ok(ApproxEntry { m, vector: v.scale(Complex64::new(1.0 / norm, 0.0)), residual, analytic_bound })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ApproxEigenSeq { psi: psi.clone(), phi: phi.clone(), a, alpha, target, degree, entries })
}

/// `‖C_φ f - λ f‖ / ‖f‖` at the given degree, which must not exceed [`PRECONDITION_TOL`].
pub fn check_composition_eigen(phi: &Symbol, f: &Symbol, lambda: Complex64, degree: usize) -> Result<f64> {
    let fv = H2Vector::from_symbol(f, degree)?;
    let norm = h2_norm(&fv);
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let cf = apply_exact(&Symbol::real(1.0), phi, f, degree)?;
    let residual = h2_norm(&cf.sub(&fv.scale(lambda))?) / norm;
    if !(residual <= PRECONDITION_TOL) {
        return Err(Error::EigenPrecondition { residual, tolerance: PRECONDITION_TOL });
    }
    Ok(residual)
}

/// `η` with `ψ = e^η`: the argument of a syntactic exponential, the principal
/// log of a constant, or the radially continued analytic logarithm.
pub fn log_weight(psi: &Symbol) -> Result<Symbol> {
    if let Node::Exp(u) = psi.node() {
        return Ok(u.clone());
    }
    if let Some(c) = psi.constant_value() {
        if c.norm() < VANISHING_FLOOR {
            return Err(Error::VanishingWeight { inf: c.norm() });
        }
        return Ok(Symbol::constant(c.ln()));
    }
    if psi.analyticity_radius() <= 1.0 {
        return Err(Error::RadiusTooSmall { radius: psi.analyticity_radius(), required: 1.0 });
    }
    let inf = boundary_circle(BOUNDARY_SAMPLES)
        .map(|z| psi.eval(z).map(|v| v.norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if !(inf > VANISHING_FLOOR) {
        return Err(Error::VanishingWeight { inf });
    }
    Symbol::log(psi.clone())
}

/// `(1 - z)^k` as a polynomial.
pub fn one_minus_z_power(k: usize) -> Symbol {
    let mut coeffs = vec![1.0];
    for _ in 0..k {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c;
        }
        coeffs = next;
    }
    Symbol::poly_real(&coeffs)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenCertificate {
    pub eigenvalue: Complex64,
    pub eigenfunction: Symbol,
    pub coefficients: H2Vector,
    /// `‖ψ·(h∘φ) - λh‖` at `degree`, computed without compressing `W`.
    pub residual: f64,
    /// Bound on `sup |g - g_M|` over the disk.
    pub tail_bound: f64,
    pub invertible_flag: bool,
    pub boundary_inf: f64,
    pub boundary_sup: f64,
    pub terms: usize,
    pub degree: usize,
    /// `K̃`: 1.05 × max |η′| on the default grid.
    pub lipschitz: f64,
    /// `√λ` from the horocycle certificate.
    pub julia_constant: f64,
    pub multiplier: f64,
    pub tolerance: f64,
    pub accepted: bool,
    pub notes: Vec<String>,
}

impl EigenCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialization is infallible")
    }
}

/// `g_M = Σ_{n=0}^{M} (η∘φ_n - η(a))`.
pub fn series_g(eta: &Symbol, phi: &Symbol, a: Complex64, terms: usize) -> Result<Symbol> {
    let eta_a = eta.eval(a)?;
    let parts = (0..=terms)
        .map(|n| Ok(Symbol::difference(Symbol::compose(eta.clone(), iterate(phi, n)?)?, Symbol::constant(eta_a))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Symbol::sum(parts))
}

fn boundary_extent(h: &Symbol) -> Result<(f64, f64)> {
    let vals = boundary_circle(BOUNDARY_SAMPLES)
        .map(|z| h.eval(z).map(|v| v.norm()))
        .collect::<Result<Vec<_>>>()?;
    Ok(vals.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v))))
}

fn lipschitz_constant(eta: &Symbol) -> Result<f64> {
    if eta.constant_value().is_some() {
        return Ok(0.0);
    }
    let pts = GridSpec::default().points();
    let vals = pts
        .par_iter()
        .map(|&z| eta.derivative_at(z).map(|d| d.norm()))
        .collect::<Result<Vec<_>>>()?;
    Ok(LIPSCHITZ_SAFETY * vals.into_iter().fold(0.0, f64::max))
}

/// `h = e^{g_M}` with eigenvalue `ψ(a)` for a boundary-hyperbolic `φ`.
pub fn eigenfunction_series(psi: &Symbol, phi: &Symbol, terms: usize, degree: usize) -> Result<EigenCertificate> {
    let dw = classify(phi)?;
    if dw.klass != DWClass::BoundaryHyperbolic {
        return Err(Error::WrongClass { expected: "boundary-hyperbolic", found: format!("{:?}", dw.klass) });
    }
    let s = dw.multiplier.re;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::WrongClass { expected: "multiplier in (0, 1)", found: format!("{s}") });
    }
    let cert = require_certified(phi)?;
    let julia = match cert.rate_bound {
        RateBound::Julia { lambda, .. } => lambda.sqrt(),
        _ => return Err(Error::Uncertified("no horocycle rate".into())),
    };
    let a = dw.point;
    let alpha = psi.eval(a)?;
    if alpha.norm() < SCALE_FLOOR {
        return Err(Error::ZeroAtFixedPoint(alpha.norm()));
    }
    let eta = log_weight(psi)?;
    let g = series_g(&eta, phi, a, terms)?;
    let h = Symbol::exp(g);
    let lipschitz = lipschitz_constant(&eta)?;
    let rs = s.sqrt();
    let tail_bound = lipschitz * julia * s.powf(terms as f64 / 2.0) / (1.0 - rs);
    certificate(psi, phi, h, alpha, degree, terms, tail_bound, lipschitz, julia, s, vec![])
}

#[allow(clippy::too_many_arguments)]
fn certificate(
    psi: &Symbol,
    phi: &Symbol,
    h: Symbol,
    eigenvalue: Complex64,
    degree: usize,
    terms: usize,
    tail_bound: f64,
    lipschitz: f64,
    julia_constant: f64,
    multiplier: f64,
    notes: Vec<String>,
) -> Result<EigenCertificate> {
    let coefficients = H2Vector::from_symbol(&h, degree)?;
    let w = apply_exact(psi, phi, &h, degree)?;
    let residual = h2_norm(&w.sub(&coefficients.scale(eigenvalue))?);
    let (boundary_inf, boundary_sup) = boundary_extent(&h)?;
    let invertible_flag = boundary_inf > 0.0 && boundary_sup.is_finite();
    Ok(EigenCertificate {
        eigenvalue,
        eigenfunction: h,
        coefficients,
        residual,
        tail_bound,
        invertible_flag,
        boundary_inf,
        boundary_sup,
        terms,
        degree,
        lipschitz,
        julia_constant,
        multiplier,
        tolerance: ACCEPT_TOL,
        accepted: residual <= ACCEPT_TOL,
        notes,
    })
}

/// Certificate for `h·f` with eigenvalue `ψ(a)·λ`, given `C_φ f = λ f`.
pub fn lift_eigenpair(
    h_cert: &EigenCertificate,
    f: &Symbol,
    lambda: Complex64,
    psi: &Symbol,
    phi: &Symbol,
    degree: usize,
) -> Result<EigenCertificate> {
    if !h_cert.accepted {
        return Err(Error::EigenPrecondition { residual: h_cert.residual, tolerance: h_cert.tolerance });
    }
    if f.constant_value() == Some(one()) && lambda == one() {
        return Ok(h_cert.clone());
    }
    check_composition_eigen(phi, f, lambda, degree)?;
    let mut notes = h_cert.notes.clone();
    if h_cert.invertible_flag {
        notes.push("1/h is bounded: the point spectra of ψ(a)C_φ and T_ψC_φ coincide".into());
    }
    certificate(
        psi,
        phi,
        Symbol::product(h_cert.eigenfunction.clone(), f.clone()),
        h_cert.eigenvalue * lambda,
        degree,
        h_cert.terms,
        h_cert.tail_bound,
        h_cert.lipschitz,
        h_cert.julia_constant,
        h_cert.multiplier,
        notes,
    )
}
