//! Predicted spectra, eigenvalues of compressions, and pseudospectral probes.
//!
//! Membership evidence comes from smallest singular values of `M - λI`, which
//! are 1-Lipschitz in `λ` and behave monotonically under refinement, rather
//! than from the eigenvalues of finite sections.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{iterate, parabolic_translation, uci_certify, Verdict};
use crate::error::{Error, Result};
use crate::hardy::{boundary_sup, composition_norm_bound, wco_matrix, OperatorMatrix};
use crate::linalg::{eigen, smallest_singular_value, spectral_norm, CMatrix};
use crate::symbol::{classify, DWClass, Symbol};

const SCALE_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKind {
    /// `scale · {|λ| ≤ R}`.
    ScaledDisk,
    /// `scale · [0, 1]`.
    Segment,
    FiniteSet,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum PointSpectrum {
    /// `scale · {0 < |λ| < radius}`.
    PuncturedDisk { radius: f64 },
    /// `scale · (0, 1)`.
    OpenSegment,
    Set { points: Vec<Complex64> },
    /// Segment case without an invertible eigenfunction for `ψ(a)`.
    Unresolved,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumModel {
    pub kind: SpectrumKind,
    pub scale: Complex64,
    pub radius: Option<f64>,
    pub point_spectrum: PointSpectrum,
    pub notes: Vec<String>,
}

impl SpectrumModel {
    /// Model for `c·ψ` given the model for `ψ`.
    pub fn scaled(&self, c: Complex64) -> SpectrumModel {
        let point_spectrum = match &self.point_spectrum {
            PointSpectrum::Set { points } => PointSpectrum::Set { points: points.iter().map(|p| c * p).collect() },
            other => other.clone(),
        };
        SpectrumModel { scale: self.scale * c, point_spectrum, ..self.clone() }
    }

    /// Membership in the predicted spectrum, within `tol`.
    pub fn in_spectrum(&self, lambda: Complex64, tol: f64) -> Option<bool> {
        let u = lambda / self.scale;
        let tol = tol / self.scale.norm();
        match self.kind {
            SpectrumKind::ScaledDisk => Some(u.norm() <= self.radius? + tol),
            SpectrumKind::Segment => Some(u.im.abs() <= tol && u.re >= -tol && u.re <= 1.0 + tol),
            SpectrumKind::FiniteSet | SpectrumKind::Unknown => None,
        }
    }

    pub fn in_point_spectrum(&self, lambda: Complex64) -> Option<bool> {
        let u = lambda / self.scale;
        match &self.point_spectrum {
            PointSpectrum::PuncturedDisk { radius } => Some(u.norm() > 0.0 && u.norm() < *radius),
            PointSpectrum::OpenSegment => Some(u.im == 0.0 && u.re > 0.0 && u.re < 1.0),
            PointSpectrum::Set { points } => Some(points.contains(&lambda)),
            PointSpectrum::Unresolved | PointSpectrum::Unknown => None,
        }
    }

    /// Seeded samples from the point-spectrum descriptor, with moduli (relative
    /// to `radius · |scale|`) drawn from `[lo, hi]` for the disk form.
    pub fn sample_point_spectrum(&self, count: usize, lo: f64, hi: f64, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match &self.point_spectrum {
            PointSpectrum::PuncturedDisk { radius } => (0..count)
                .map(|_| {
                    let r = radius * rng.gen_range(lo..hi);
                    self.scale * Complex64::from_polar(r, rng.gen_range(-PI..PI))
                })
                .collect(),
            PointSpectrum::OpenSegment => (0..count).map(|_| self.scale * rng.gen_range(lo.max(1e-9)..hi.min(1.0))).collect(),
            PointSpectrum::Set { points } => points.iter().cycle().take(count).cloned().collect(),
            _ => vec![],
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization is infallible")
    }
}

/// `ψ(a)` for the Denjoy-Wolff point of `φ`.
pub fn weight_at_dw_point(psi: &Symbol, phi: &Symbol) -> Result<Complex64> {
    let dw = classify(phi)?;
    let alpha = psi.eval(dw.point)?;
    if alpha.norm() < SCALE_FLOOR {
        return Err(Error::ZeroAtFixedPoint(alpha.norm()));
    }
    Ok(alpha)
}

pub fn predict(psi: &Symbol, phi: &Symbol) -> Result<SpectrumModel> {
    predict_with_eigenfunction(psi, phi, None)
}

/// As [`predict`]; in the parabolic case an eigenfunction `h` of `W` for `ψ(a)`
/// that is bounded away from zero on the circle resolves the point spectrum.
pub fn predict_with_eigenfunction(psi: &Symbol, phi: &Symbol, h: Option<&Symbol>) -> Result<SpectrumModel> {
    let cert = uci_certify(phi)?;
    if cert.verdict != Verdict::Certified {
        return Err(Error::Uncertified(format!("{:?} via {:?}", cert.verdict, cert.mechanism)));
    }
    let dw = &cert.dw;
    let alpha = psi.eval(dw.point)?;
    if alpha.norm() < SCALE_FLOOR {
        return Err(Error::ZeroAtFixedPoint(alpha.norm()));
    }
    let mut notes = Vec::new();
    let model = match dw.klass {
        DWClass::BoundaryHyperbolic => {
            let r = dw.multiplier.re.powf(-0.5);
            notes.push("point spectrum stored as a punctured disk; the interval reading is also possible".into());
            SpectrumModel {
                kind: SpectrumKind::ScaledDisk,
                scale: alpha,
                radius: Some(r),
                point_spectrum: PointSpectrum::PuncturedDisk { radius: r },
                notes,
            }
        }
        DWClass::BoundaryParabolic => {
            let m = phi.as_mobius().ok_or_else(|| Error::Uncertified("parabolic symbol is not linear fractional".into()))?;
            let tau = parabolic_translation(m, dw.point)?;
            if tau.im.abs() > 1e-12 * tau.norm() {
                notes.push(format!("complex half-plane translation {tau}: spectrum is a spiral, not cataloged"));
                SpectrumModel { kind: SpectrumKind::Unknown, scale: alpha, radius: None, point_spectrum: PointSpectrum::Unknown, notes }
            } else {
                let resolved = match (psi.constant_value(), h) {
                    (Some(_), _) => {
                        notes.push("constant weight: h = 1 is an invertible eigenfunction".into());
                        true
                    }
                    (None, Some(h)) => invertible_eigenfunction(psi, phi, h, alpha)?,
                    (None, None) => false,
                };
                SpectrumModel {
                    kind: SpectrumKind::Segment,
                    scale: alpha,
                    radius: None,
                    point_spectrum: if resolved { PointSpectrum::OpenSegment } else { PointSpectrum::Unresolved },
                    notes,
                }
            }
        }
        DWClass::InteriorFixed => {
            notes.push("interior Denjoy-Wolff point: compact-case spectrum not modeled".into());
            SpectrumModel { kind: SpectrumKind::Unknown, scale: alpha, radius: None, point_spectrum: PointSpectrum::Unknown, notes }
        }
    };
    Ok(model)
}

fn invertible_eigenfunction(psi: &Symbol, phi: &Symbol, h: &Symbol, alpha: Complex64) -> Result<bool> {
    let n = 64;
    let wh = crate::hardy::apply_exact(psi, phi, h, n)?;
    let hv = crate::hardy::H2Vector::from_symbol(h, n)?;
    let res = crate::hardy::h2_norm(&wh.sub(&hv.scale(alpha))?);
    let inf = crate::symbol::boundary_circle(4096)
        .map(|z| h.eval(z).map(|v| v.norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(res < 1e-8 && inf > 1e-9)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixSpectrum {
    pub values: Vec<Complex64>,
    pub backward_errors: Vec<f64>,
    pub converged: bool,
}

/// All eigenvalues of a compression, sorted by modulus then argument.
pub fn matrix_spectrum(m: &OperatorMatrix) -> Result<MatrixSpectrum> {
    dense_spectrum(&m.entries)
}

pub fn dense_spectrum(m: &CMatrix) -> Result<MatrixSpectrum> {
    let e = eigen(m)?;
    Ok(MatrixSpectrum { values: e.values, backward_errors: e.backward_errors, converged: e.converged })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conclusion {
    PlausiblyInApproxPointSpectrum,
    ResolventSide,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoPoint {
    pub lambda: Complex64,
    pub s_min: f64,
    pub conclusion: Conclusion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudospectrumReport {
    pub degree: usize,
    pub scale: Option<Complex64>,
    pub points: Vec<PseudoPoint>,
    /// Adjacent grid pairs breaking `|Δs| ≤ |Δλ| + 1e-9`.
    pub lipschitz_violations: usize,
}

impl PseudospectrumReport {
    pub fn s_min(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.s_min).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["lambda_re", "lambda_im", "s_min"])?;
        for p in &self.points {
            wr.write_record([p.lambda.re.to_string(), p.lambda.im.to_string(), p.s_min.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PseudoOptions {
    pub ap_threshold: f64,
    /// Resolvent side when `s_min > factor · |ψ(a)|`.
    pub resolvent_factor: f64,
}

impl Default for PseudoOptions {
    fn default() -> Self {
        PseudoOptions { ap_threshold: 1e-6, resolvent_factor: 0.1 }
    }
}

pub fn pseudospectrum(psi: &Symbol, phi: &Symbol, grid: &[Complex64], degree: usize) -> Result<PseudospectrumReport> {
    pseudospectrum_with(psi, phi, grid, degree, &PseudoOptions::default())
}

pub fn pseudospectrum_with(
    psi: &Symbol,
    phi: &Symbol,
    grid: &[Complex64],
    degree: usize,
    opts: &PseudoOptions,
) -> Result<PseudospectrumReport> {
    let m = wco_matrix(psi, phi, degree)?;
    let scale = weight_at_dw_point(psi, phi).ok();
    let s: Vec<f64> = grid.par_iter().map(|&l| s_min(&m.entries, l)).collect();
    let points: Vec<PseudoPoint> = grid
        .iter()
        .zip(&s)
        .map(|(&lambda, &s_min)| {
            let conclusion = if s_min < opts.ap_threshold {
                Conclusion::PlausiblyInApproxPointSpectrum
            } else if scale.is_some_and(|a| s_min > opts.resolvent_factor * a.norm()) {
                Conclusion::ResolventSide
            } else {
                Conclusion::Undetermined
            };
            PseudoPoint { lambda, s_min, conclusion }
        })
        .collect();
    let lipschitz_violations = points
        .windows(2)
        .filter(|w| (w[0].s_min - w[1].s_min).abs() > (w[0].lambda - w[1].lambda).norm() + 1e-9)
        .count();
    Ok(PseudospectrumReport { degree, scale, points, lipschitz_violations })
}

/// Smallest singular value of `M - λI`.
pub fn s_min(m: &CMatrix, lambda: Complex64) -> f64 {
    let mut shifted = m.clone();
    for i in 0..m.nrows().min(m.ncols()) {
        shifted[(i, i)] -= lambda;
    }
    smallest_singular_value(&shifted)
}

/// `count` points on `|λ - center| = radius`, starting at angle 0.
pub fn circle_grid(center: Complex64, radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|j| center + Complex64::from_polar(radius, 2.0 * PI * j as f64 / count as f64))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpnormRow {
    pub n: usize,
    /// `‖P(T_{ψ(a)} C_φ - T_{ψ∘φ_n} C_φ)P‖₂` at the given degree.
    pub compressed: f64,
    /// `sup|ψ(a) - ψ∘φ_n| · √((1+|φ(0)|)/(1-|φ(0)|))`.
    pub bound: f64,
}

pub fn opnorm_convergence(psi: &Symbol, phi: &Symbol, n_max: usize, degree: usize) -> Result<Vec<OpnormRow>> {
    let cert = uci_certify(phi)?;
    if cert.verdict != Verdict::Certified {
        return Err(Error::Uncertified(format!("{:?} via {:?}", cert.verdict, cert.mechanism)));
    }
    let alpha = psi.eval(cert.dw.point)?;
    let cphi = composition_norm_bound(phi)?;
    (1..=n_max)
        .map(|n| {
            let diff = Symbol::difference(Symbol::constant(alpha), Symbol::compose(psi.clone(), iterate(phi, n)?)?);
            let compressed = match diff.constant_value() {
                Some(v) if v == Complex64::new(0.0, 0.0) => 0.0,
                _ => spectral_norm(&wco_matrix(&diff, phi, degree)?.entries),
            };
            let sup = match diff.constant_value() {
                Some(v) => v.norm(),
                None => boundary_sup(&diff)?,
            };
            Ok(OpnormRow { n, compressed, bound: sup * cphi })
        })
        .collect()
}
