//! Dense complex linear algebra: eigenpairs by Hessenberg reduction and
//! single-shift QR, plus thin wrappers over nalgebra's SVD and Hermitian solver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const ITERATIONS_PER_EIGENVALUE: usize = 60;

/// Eigenpairs of a dense complex matrix, sorted by modulus then argument.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    /// Unit eigenvectors as columns, aligned with `values`.
    pub vectors: CMatrix,
    /// `‖Av - λv‖ / (‖A‖_F ‖v‖)` per pair.
    pub backward_errors: Vec<f64>,
    /// False when the iteration cap was hit; unconverged values are still returned.
    pub converged: bool,
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

pub fn smallest_singular_value(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of a Hermitian matrix (taken from its lower triangle), ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().cloned().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Max entry of `|M - M*|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Sort key: modulus rounded to 1e-9, then argument.
pub fn eigen_order(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    let ka = (a.norm() * 1e9).round();
    let kb = (b.norm() * 1e9).round();
    ka.total_cmp(&kb).then(a.arg().total_cmp(&b.arg()))
}

fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    // [c s; -conj(s) c] [x; y] = [r; 0]
    let nx = x.norm();
    let ny = y.norm();
    if ny == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if nx == 0.0 {
        return (0.0, (y / ny).conj());
    }
    let r = nx.hypot(ny);
    let c = nx / r;
    let s = (x / nx) * y.conj() / r;
    (c, s)
}

fn rotate_rows(h: &mut CMatrix, i: usize, c: f64, s: Complex64, cols: std::ops::Range<usize>) {
    for j in cols {
        let a = h[(i, j)];
        let b = h[(i + 1, j)];
        h[(i, j)] = a * c + s * b;
        h[(i + 1, j)] = -s.conj() * a + b * c;
    }
}

fn rotate_cols(h: &mut CMatrix, i: usize, c: f64, s: Complex64, rows: std::ops::Range<usize>) {
    for r in rows {
        let a = h[(r, i)];
        let b = h[(r, i + 1)];
        h[(r, i)] = a * c + b * s.conj();
        h[(r, i + 1)] = -a * s + b * c;
    }
}

fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    // eigenvalue of [a b; c d] closer to d
    let tr = 0.5 * (a + d);
    let det = a * d - b * c;
    let disc = (tr * tr - det).sqrt();
    let l1 = tr + disc;
    let l2 = tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur form `A = Z T Z*` with `T` upper triangular.
fn schur(a: &CMatrix) -> (CMatrix, CMatrix, bool) {
    let n = a.nrows();
    let hess = a.clone().hessenberg();
    let (q, h) = hess.unpack();
    let mut z = q;
    let mut t = h;
    for i in 2..n {
        for j in 0..i - 1 {
            t[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    if n < 2 {
        return (z, t, true);
    }
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0;
    let mut stalled = 0;
    let cap = ITERATIONS_PER_EIGENVALUE * n;
    let mut converged = true;
    while hi > 0 {
        // deflation search
        let mut l = hi;
        while l > 0 {
            let sub = t[(l, l - 1)].norm();
            let diag = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
            let floor = if diag == 0.0 { frobenius(&t) } else { diag };
            if sub <= eps * floor {
                t[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            stalled = 0;
            continue;
        }
        if iter >= cap {
            converged = false;
            break;
        }
        iter += 1;
        stalled += 1;
        let mut mu = wilkinson(t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)]);
        if stalled % 11 == 10 {
            // exceptional shift
            mu = t[(hi, hi)] + Complex64::new(t[(hi, hi - 1)].norm() * 1.5, 0.0);
        }
        let (c, s) = givens(t[(l, l)] - mu, t[(l + 1, l)]);
        rotate_rows(&mut t, l, c, s, l..n);
        rotate_cols(&mut t, l, c, s, 0..(l + 3).min(hi + 1));
        rotate_cols(&mut z, l, c, s, 0..n);
        for k in l + 1..hi {
            let (c, s) = givens(t[(k, k - 1)], t[(k + 1, k - 1)]);
            rotate_rows(&mut t, k, c, s, k - 1..n);
            t[(k + 1, k - 1)] = Complex64::new(0.0, 0.0);
            rotate_cols(&mut t, k, c, s, 0..(k + 3).min(hi + 1));
            rotate_cols(&mut z, k, c, s, 0..n);
        }
    }
    (z, t, converged)
}

/// All eigenpairs of a square complex matrix.
pub fn eigen(a: &CMatrix) -> Result<EigenDecomposition> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch { left: n, right: a.ncols() });
    }
    if a.iter().any(|z| !z.is_finite()) {
        return Err(Error::Parse("matrix has non-finite entries".into()));
    }
    if n == 0 {
        return Ok(EigenDecomposition { values: vec![], vectors: CMatrix::zeros(0, 0), backward_errors: vec![], converged: true });
    }
    let (z, t, converged) = schur(a);
    let tnorm = frobenius(&t).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut vectors = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = CVector::zeros(n);
        y[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * y[j];
            }
            let mut den = t[(i, i)] - lambda;
            if den.norm() < small {
                den = Complex64::new(small, 0.0);
            }
            y[i] = -acc / den;
            // rescale to avoid overflow in nearly defective cases
            let m = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if m > 1e100 {
                y /= Complex64::new(m, 0.0);
            }
        }
        let v = &z * y;
        let nv = v.norm();
        vectors.set_column(k, &(v / Complex64::new(nv, 0.0)));
    }
    let values: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();
    let anorm = frobenius(a).max(f64::MIN_POSITIVE);
    let backward_errors: Vec<f64> = (0..n)
        .map(|k| {
            let v = vectors.column(k);
            let r = a * v - v * values[k];
            r.norm() / (anorm * v.norm())
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eigen_order(&values[i], &values[j]).then(i.cmp(&j)));
    let mut sorted_vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted_vectors.set_column(dst, &vectors.column(src));
    }
    Ok(EigenDecomposition {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: sorted_vectors,
        backward_errors: order.iter().map(|&i| backward_errors[i]).collect(),
        converged,
    })
}
