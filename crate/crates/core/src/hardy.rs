//! H² coefficient vectors and finite sections of `T_ψ`, `C_φ` and `T_ψ C_φ`
//! in the monomial basis.
//!
//! Finite sections of non-normal operators can have spurious spectra; spectral
//! claims go through [`crate::spectra::pseudospectrum`].

use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::iterate;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, CMatrix};
use crate::symbol::{boundary_circle, taylor, Contour, Symbol};

/// Default truncation degree.
pub const DEFAULT_DEGREE: usize = 128;
const COLUMN_CHUNK: usize = 32;
const SELF_MAP_TOL: f64 = 1e-9;

/// `Σ c_k z^k`, truncated at degree `N = len - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct H2Vector {
    pub coeffs: Vec<Complex64>,
}

impl H2Vector {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        H2Vector { coeffs }
    }

    pub fn zeros(degree: usize) -> Self {
        H2Vector { coeffs: vec![Complex64::new(0.0, 0.0); degree + 1] }
    }

    pub fn monomial(k: usize, degree: usize) -> Self {
        let mut v = Self::zeros(degree);
        if k <= degree {
            v.coeffs[k] = Complex64::new(1.0, 0.0);
        }
        v
    }

    /// Real coefficients, padded with zeros to `degree`.
    pub fn from_real(values: &[f64], degree: usize) -> Self {
        let mut v = Self::zeros(degree);
        for (c, &x) in v.coeffs.iter_mut().zip(values) {
            *c = Complex64::new(x, 0.0);
        }
        v
    }

    pub fn from_symbol(s: &Symbol, degree: usize) -> Result<Self> {
        Ok(H2Vector { coeffs: taylor(s, degree)? })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Multiplication by `z^n`, truncated at the same degree.
    pub fn shift(&self, n: usize) -> Self {
        let mut out = Self::zeros(self.degree());
        for (k, c) in self.coeffs.iter().enumerate() {
            if k + n < out.coeffs.len() {
                out.coeffs[k + n] = *c;
            }
        }
        out
    }

    pub fn scale(&self, k: Complex64) -> Self {
        H2Vector { coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    pub fn sub(&self, other: &H2Vector) -> Result<Self> {
        check_degree(self, other)?;
        Ok(H2Vector { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect() })
    }

    pub fn as_column(&self) -> nalgebra::DVector<Complex64> {
        nalgebra::DVector::from_vec(self.coeffs.clone())
    }
}

fn check_degree(f: &H2Vector, g: &H2Vector) -> Result<()> {
    if f.coeffs.len() != g.coeffs.len() {
        return Err(Error::DimensionMismatch { left: f.coeffs.len(), right: g.coeffs.len() });
    }
    Ok(())
}

/// `⟨f, g⟩ = Σ f_k conj(g_k)`.
pub fn h2_inner(f: &H2Vector, g: &H2Vector) -> Result<Complex64> {
    check_degree(f, g)?;
    Ok(f.coeffs.iter().zip(&g.coeffs).map(|(a, b)| a * b.conj()).sum())
}

pub fn h2_norm(f: &H2Vector) -> f64 {
    f.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Wco,
    Toeplitz,
    Composition,
}

/// `(N+1)×(N+1)` compression with entry `(i, j) = ⟨W z^j, z^i⟩`.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub entries: CMatrix,
    pub degree: usize,
    pub psi: Symbol,
    pub phi: Symbol,
    pub kind: MatrixKind,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.entries)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() < tol
    }

    /// `u64` rows, `u64` cols, then row-major `(re, im)` pairs, all little-endian.
    pub fn write_binary<W: Write>(&self, w: W) -> Result<()> {
        write_matrix_binary(&self.entries, w)
    }

    /// Long format `i,j,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["i", "j", "re", "im"])?;
        for i in 0..self.entries.nrows() {
            for j in 0..self.entries.ncols() {
                let v = self.entries[(i, j)];
                wr.write_record([i.to_string(), j.to_string(), v.re.to_string(), v.im.to_string()])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn write_matrix_binary<W: Write>(m: &CMatrix, mut w: W) -> Result<()> {
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_matrix_binary<R: Read>(mut r: R) -> Result<CMatrix> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            r.read_exact(&mut word)?;
            let re = f64::from_le_bytes(word);
            r.read_exact(&mut word)?;
            let im = f64::from_le_bytes(word);
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

fn require_radius(s: &Symbol) -> Result<()> {
    if s.analyticity_radius() <= 1.0 {
        return Err(Error::RadiusTooSmall { radius: s.analyticity_radius(), required: 1.0 });
    }
    Ok(())
}

/// Sup of `|φ|` on the unit circle (exact for Möbius maps).
pub fn boundary_sup(s: &Symbol) -> Result<f64> {
    if let Some(m) = s.as_mobius() {
        return Ok(m.boundary_sup());
    }
    require_radius(s)?;
    let vals: Vec<f64> = boundary_circle(4096).map(|z| s.eval(z).map(|w| w.norm())).collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

fn require_self_map(phi: &Symbol) -> Result<()> {
    let sup = boundary_sup(phi)?;
    if sup > 1.0 + SELF_MAP_TOL {
        return Err(Error::NotSelfMap { sup });
    }
    Ok(())
}

/// Compression of `T_ψ C_φ`: column `j` is `taylor(ψ φ^j, N)`. Both symbols are
/// sampled once on a shared contour; powers are accumulated pointwise.
pub fn wco_matrix(psi: &Symbol, phi: &Symbol, degree: usize) -> Result<OperatorMatrix> {
    build(psi, phi, degree, MatrixKind::Wco)
}

pub fn toeplitz_matrix(psi: &Symbol, degree: usize) -> Result<OperatorMatrix> {
    build(psi, &Symbol::identity(), degree, MatrixKind::Toeplitz)
}

pub fn composition_matrix(phi: &Symbol, degree: usize) -> Result<OperatorMatrix> {
    build(&Symbol::real(1.0), phi, degree, MatrixKind::Composition)
}

fn build(psi: &Symbol, phi: &Symbol, degree: usize, kind: MatrixKind) -> Result<OperatorMatrix> {
    require_radius(psi)?;
    require_radius(phi)?;
    require_self_map(phi)?;
    let rho = psi.analyticity_radius().min(phi.analyticity_radius());
    let contour = Contour::for_degree(rho, degree)?;
    let psi_s = contour.sample(psi)?;
    let phi_s = contour.sample(phi)?;
    let dim = degree + 1;
    let mut entries = CMatrix::zeros(dim, dim);
    let mut power = psi_s;
    let mut j0 = 0;
    while j0 < dim {
        let width = COLUMN_CHUNK.min(dim - j0);
        let mut block = Vec::with_capacity(width);
        for _ in 0..width {
            block.push(power.clone());
            for (p, f) in power.iter_mut().zip(&phi_s) {
                *p *= f;
            }
        }
        let cols: Vec<Vec<Complex64>> = block.par_iter().map(|s| contour.coefficients(s, degree)).collect();
        for (k, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                entries[(i, j0 + k)] = *v;
            }
        }
        j0 += width;
    }
    Ok(OperatorMatrix { entries, degree, psi: psi.clone(), phi: phi.clone(), kind })
}

pub fn apply(m: &OperatorMatrix, f: &H2Vector) -> Result<H2Vector> {
    apply_matrix(&m.entries, f)
}

pub fn apply_matrix(m: &CMatrix, f: &H2Vector) -> Result<H2Vector> {
    if m.ncols() != f.coeffs.len() {
        return Err(Error::DimensionMismatch { left: m.ncols(), right: f.coeffs.len() });
    }
    let out = m * f.as_column();
    Ok(H2Vector { coeffs: out.iter().cloned().collect() })
}

/// Coefficients of `ψ · (f ∘ φ)` without compressing `W`.
pub fn apply_exact(psi: &Symbol, phi: &Symbol, f: &Symbol, degree: usize) -> Result<H2Vector> {
    let image = Symbol::product(psi.clone(), Symbol::compose(f.clone(), phi.clone())?);
    H2Vector::from_symbol(&image, degree)
}

/// `ζ_N = ψ (ψ∘φ) ⋯ (ψ∘φ_{N-1})`.
pub fn iterated_weight(psi: &Symbol, phi: &Symbol, n: usize) -> Result<Symbol> {
    if n == 0 {
        return Err(Error::NonPositive { name: "N", value: 0.0 });
    }
    let mut factors = vec![psi.clone()];
    for k in 1..n {
        factors.push(Symbol::compose(psi.clone(), iterate(phi, k)?)?);
    }
    Ok(Symbol::product_of(factors))
}

/// `√((1 + |φ(0)|) / (1 - |φ(0)|))`, the classical bound on `‖C_φ‖`.
pub fn composition_norm_bound(phi: &Symbol) -> Result<f64> {
    let p0 = phi.eval(Complex64::new(0.0, 0.0))?.norm();
    if p0 >= 1.0 {
        return Err(Error::NotSelfMap { sup: p0 });
    }
    Ok(((1.0 + p0) / (1.0 - p0)).sqrt())
}
