//! Companion self-adjoint weights, the `⟨h, zⁿh⟩` probe, and finite-section
//! evidence against hyponormality.
//!
//! Verdicts are conclusions about a truncation, never proofs; the strongest
//! positive verdict is "consistent with normal".

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{check_composition_eigen, eigenfunction_series, one_minus_z_power, DEFAULT_TERMS};
use crate::error::{Error, Result};
use crate::hardy::{h2_inner, h2_norm, wco_matrix, H2Vector};
use crate::linalg::{hermitian_defect, hermitian_eigenvalues, spectral_norm, CMatrix};
use crate::symbol::{classify, DWClass, MobiusMap, Symbol};

/// Relative threshold `δ = 1e-4 ‖W‖²` for negative commutator eigenvalues.
pub const DELTA_FACTOR: f64 = 1e-4;
/// Buffers differing by this relative amount make the probe inconclusive.
pub const BUFFER_TOLERANCE: f64 = 0.1;
const DEVIATION_FACTOR: f64 = 0.01;
const GRAM_FACTOR: f64 = 0.01;

/// `p · K_{σ(0)}` for a parabolic non-automorphism `φ` with Cowen map `σ`.
pub fn selfadjoint_weight(phi: &MobiusMap, p: f64) -> Result<Symbol> {
    if p == 0.0 || !p.is_finite() {
        return Err(Error::NonPositive { name: "|p|", value: p.abs() });
    }
    let dw = classify(&Symbol::mobius(*phi))?;
    if dw.klass != DWClass::BoundaryParabolic || dw.is_automorphism {
        let found = if dw.is_automorphism { format!("{:?} automorphism", dw.klass) } else { format!("{:?}", dw.klass) };
        return Err(Error::WrongClass { expected: "boundary-parabolic non-automorphism", found });
    }
    let sigma = phi.cowen_sigma()?;
    let k = Symbol::kernel(sigma.eval(Complex64::new(0.0, 0.0))?)?;
    Ok(if p == 1.0 { k } else { Symbol::scale(Complex64::new(p, 0.0), k) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InprodRow {
    pub n: usize,
    /// `⟨h, zⁿh⟩`.
    pub inner: Complex64,
    /// `⟨h, h⟩`.
    pub norm_sq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InprodTable {
    pub rows: Vec<InprodRow>,
    /// `max_n |⟨h, zⁿh⟩ - ⟨h, h⟩|`.
    pub deviation: f64,
    /// First `n` with deviation above `0.01 ‖h‖²`.
    pub first_n: Option<usize>,
}

impl InprodTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "inner_re", "inner_im", "norm_sq"])?;
        for r in &self.rows {
            wr.write_record([r.n.to_string(), r.inner.re.to_string(), r.inner.im.to_string(), r.norm_sq.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn inprod_probe(h: &H2Vector, n_max: usize) -> Result<InprodTable> {
    let norm_sq = h2_norm(h).powi(2);
    if norm_sq == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut rows = Vec::with_capacity(n_max);
    let mut deviation: f64 = 0.0;
    let mut first_n = None;
    for n in 1..=n_max {
        let inner = h2_inner(h, &h.shift(n))?;
        let dev = (inner - norm_sq).norm();
        deviation = deviation.max(dev);
        if first_n.is_none() && dev > DEVIATION_FACTOR * norm_sq {
            first_n = Some(n);
        }
        rows.push(InprodRow { n, inner, norm_sq });
    }
    Ok(InprodTable { rows, deviation, first_n })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    pub eigenvalues: Vec<Complex64>,
    pub gram: Vec<Vec<Complex64>>,
    /// Largest `|⟨v_i, v_j⟩| / (‖v_i‖ ‖v_j‖)` over `i ≠ j`.
    pub max_cosine: f64,
    pub non_orthogonal: bool,
}

impl GramReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["i", "j", "re", "im"])?;
        for (i, row) in self.gram.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                wr.write_record([i.to_string(), j.to_string(), v.re.to_string(), v.im.to_string()])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalityVerdict {
    ConsistentWithNormal,
    NotHyponormalEvidence,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorProbe {
    pub buffer_degree: usize,
    pub min_eig: f64,
    pub max_eig: f64,
    pub max_abs: f64,
    /// `max |B - B*|` of the block before symmetrization.
    pub asymmetry: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalityReport {
    pub psi: Symbol,
    pub phi: Symbol,
    pub degree: usize,
    pub tests_run: Vec<String>,
    pub w_norm: f64,
    pub delta: f64,
    pub commutator_min_eig: f64,
    pub probe: CommutatorProbe,
    pub probe_wide: CommutatorProbe,
    pub buffer_relative_change: f64,
    pub inprod_table: Option<InprodTable>,
    pub orthogonality_table: Option<GramReport>,
    pub verdict: NormalityVerdict,
    pub notes: Vec<String>,
}

impl NormalityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

/// Top-left `(N+1)²` block of `W*W - WW*` computed at a larger degree.
pub fn commutator_block(w: &CMatrix, degree: usize) -> (CMatrix, f64) {
    let full = w.adjoint() * w - w * w.adjoint();
    let block = full.view((0, 0), (degree + 1, degree + 1)).into_owned();
    let asym = hermitian_defect(&block);
    let sym = (&block + block.adjoint()) * Complex64::new(0.5, 0.0);
    (sym, asym)
}

fn probe_at(psi: &Symbol, phi: &Symbol, degree: usize, buffer: usize) -> Result<(CommutatorProbe, f64)> {
    let w = wco_matrix(psi, phi, buffer)?.entries;
    let (block, asymmetry) = commutator_block(&w, degree);
    let eig = hermitian_eigenvalues(&block);
    let max_abs = block.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let probe = CommutatorProbe {
        buffer_degree: buffer,
        min_eig: eig.first().copied().unwrap_or(0.0),
        max_eig: eig.last().copied().unwrap_or(0.0),
        max_abs,
        asymmetry,
    };
    Ok((probe, spectral_norm(&w)))
}

/// Self-commutator probe with buffers `2N` and `3N`, plus the inner-product and
/// eigenvector-orthogonality tables when a series eigenfunction exists.
pub fn hyponormal_probe(psi: &Symbol, phi: &Symbol, degree: usize) -> Result<NormalityReport> {
    let mut tests_run = vec!["self-commutator-2N".to_string(), "self-commutator-3N".to_string()];
    let mut notes = Vec::new();
    let (probe, w_norm) = probe_at(psi, phi, degree, 2 * degree)?;
    let (probe_wide, _) = probe_at(psi, phi, degree, 3 * degree)?;
    let delta = DELTA_FACTOR * w_norm * w_norm;
    let scale = probe.min_eig.abs().max(probe_wide.min_eig.abs());
    let buffer_relative_change = if scale < delta {
        0.0
    } else {
        (probe.min_eig - probe_wide.min_eig).abs() / scale
    };
    let verdict = if buffer_relative_change >= BUFFER_TOLERANCE {
        notes.push("commutator eigenvalue moves by >= 10% between buffers".into());
        NormalityVerdict::Inconclusive
    } else if probe.min_eig < -delta {
        NormalityVerdict::NotHyponormalEvidence
    } else if probe.max_eig.abs() <= delta && probe.min_eig.abs() <= delta {
        NormalityVerdict::ConsistentWithNormal
    } else {
        NormalityVerdict::Inconclusive
    };

    let mut inprod_table = None;
    let mut orthogonality_table = None;
    match eigenfunction_series(psi, phi, DEFAULT_TERMS, degree) {
        Ok(cert) => {
            tests_run.push("inprod".into());
            inprod_table = Some(inprod_probe(&cert.coefficients, 32.min(degree.max(1)))?);
            let s = cert.multiplier;
            let mut vectors = Vec::new();
            let mut eigenvalues = Vec::new();
            for k in 0..3 {
                let f = one_minus_z_power(k);
                let lam = Complex64::new(s.powi(k as i32), 0.0);
                if check_composition_eigen(phi, &f, lam, degree).is_err() {
                    notes.push(format!("(1-z)^{k} is not an eigenfunction of C_phi; orthogonality test stops"));
                    break;
                }
                vectors.push(H2Vector::from_symbol(&Symbol::product(cert.eigenfunction.clone(), f), degree)?);
                eigenvalues.push(cert.eigenvalue * lam);
            }
            if vectors.len() >= 2 {
                tests_run.push("eigenvector-orthogonality".into());
                orthogonality_table = Some(gram(&vectors, eigenvalues)?);
            }
        }
        Err(e) => notes.push(format!("no series eigenfunction: {e}")),
    }

    Ok(NormalityReport {
        psi: psi.clone(),
        phi: phi.clone(),
        degree,
        tests_run,
        w_norm,
        delta,
        commutator_min_eig: probe.min_eig,
        probe,
        probe_wide,
        buffer_relative_change,
        inprod_table,
        orthogonality_table,
        verdict,
        notes,
    })
}

pub fn gram(vectors: &[H2Vector], eigenvalues: Vec<Complex64>) -> Result<GramReport> {
    let n = vectors.len();
    let mut g = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut max_cosine: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            g[i][j] = h2_inner(&vectors[i], &vectors[j])?;
            if i != j {
                max_cosine = max_cosine.max(g[i][j].norm() / (h2_norm(&vectors[i]) * h2_norm(&vectors[j])));
            }
        }
    }
    Ok(GramReport { eigenvalues, gram: g, max_cosine, non_orthogonal: max_cosine > GRAM_FACTOR })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn para() -> MobiusMap {
        MobiusMap::from_real(0.0, 1.0, -1.0, 2.0).unwrap()
    }

    #[test]
    fn companion_weight() {
        let k = selfadjoint_weight(&para(), 1.0).unwrap();
        assert_eq!(k.to_json(), Symbol::kernel(c(0.5)).unwrap().to_json());
        let phi = Symbol::mobius(para());
        let m1 = wco_matrix(&k, &phi, 64).unwrap();
        assert!(m1.is_hermitian(1e-10));
        let m2 = wco_matrix(&selfadjoint_weight(&para(), 2.0).unwrap(), &phi, 64).unwrap();
        assert_eq!(m2.entries, &m1.entries * c(2.0));
        let hyper = MobiusMap::from_real(0.5, 0.5, 0.0, 1.0).unwrap();
        assert!(matches!(selfadjoint_weight(&hyper, 1.0), Err(Error::WrongClass { .. })));
        assert!(selfadjoint_weight(&para(), 0.0).is_err());
    }

    #[test]
    fn inprod_examples() {
        let t = inprod_probe(&H2Vector::monomial(0, 8), 4).unwrap();
        assert_eq!(t.first_n, Some(1));
        let k = H2Vector::from_symbol(&Symbol::kernel(c(0.5)).unwrap(), 128).unwrap();
        let t = inprod_probe(&k, 6).unwrap();
        assert_eq!(t.first_n, Some(1));
        for r in &t.rows {
            assert!((r.inner - c(0.5f64.powi(r.n as i32) * 4.0 / 3.0)).norm() < 1e-12);
        }
        let e = H2Vector::from_symbol(&Symbol::exp(Symbol::poly_real(&[2.0, -2.0])), 128).unwrap();
        assert!(inprod_probe(&e, 4).unwrap().first_n.is_some());
        assert!(matches!(inprod_probe(&H2Vector::zeros(4), 3), Err(Error::ZeroVector)));
    }

    #[test]
    fn diagonal_case_is_normal() {
        let phi = Symbol::mobius(MobiusMap::from_real(0.5, 0.0, 0.0, 1.0).unwrap());
        let r = hyponormal_probe(&Symbol::real(1.0), &phi, 16).unwrap();
        assert!(r.probe.max_abs < 1e-14);
        assert_eq!(r.verdict, NormalityVerdict::ConsistentWithNormal);
    }

    #[test]
    fn selfadjoint_pair_is_consistent_with_normal() {
        let phi = Symbol::mobius(para());
        let r = hyponormal_probe(&Symbol::kernel(c(0.5)).unwrap(), &phi, 32).unwrap();
        assert!(r.probe.max_abs < 1e-8, "{}", r.probe.max_abs);
        assert_eq!(r.verdict, NormalityVerdict::ConsistentWithNormal);
    }

    #[test]
    fn hyperbolic_example_is_not_hyponormal() {
        let psi = Symbol::exp(Symbol::poly_real(&[2.0, -1.0]));
        let phi = Symbol::mobius(MobiusMap::from_real(0.5, 0.5, 0.0, 1.0).unwrap());
        let r = hyponormal_probe(&psi, &phi, 48).unwrap();
        assert_eq!(r.verdict, NormalityVerdict::NotHyponormalEvidence);
        assert!(r.probe.asymmetry < 1e-9);
        let g = r.orthogonality_table.unwrap();
        assert!(g.non_orthogonal);
        let scaled = hyponormal_probe(&Symbol::scale(c(3.0), psi), &phi, 48).unwrap();
        assert_eq!(scaled.verdict, r.verdict);
    }
}
