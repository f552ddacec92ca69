//! Dense complex kernels (eigendecomposition, SVD extremes, linear solve)
//! on top of faer. This layer is f64-only: the generic front end downcasts
//! before calling in, and results are lifted back by the caller.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use faer::complex_native::c64;
use faer::prelude::SpSolver;
use faer::Mat;
use num_complex::Complex64;

pub fn csr_to_dense(a: &CsrMatrix<f64>) -> Mat<c64> {
    let n = a.n;
    let mut m = Mat::<c64>::zeros(n, n);
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (c, v) in cols.iter().zip(vals) {
            m[(i, *c)] = c64::new(v.re, v.im);
        }
    }
    m
}

pub fn to_faer(rows: usize, cols: usize, data: &[Complex64]) -> Mat<c64> {
    // row-major input
    Mat::from_fn(rows, cols, |i, j| {
        let v = data[i * cols + j];
        c64::new(v.re, v.im)
    })
}

pub fn from_faer(m: &Mat<c64>) -> Vec<Complex64> {
    let (r, c) = (m.nrows(), m.ncols());
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            let v = m[(i, j)];
            out.push(Complex64::new(v.re, v.im));
        }
    }
    out
}

/// All eigenvalues of a dense complex matrix.
pub fn eigenvalues(m: &Mat<c64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    let evd = m
        .eigendecomposition::<c64>();
    let s = evd.s().column_vector();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let v = s[i];
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Numerical(
                "dense eigensolver produced non-finite eigenvalue".into(),
            ));
        }
        out.push(Complex64::new(v.re, v.im));
    }
    Ok(out)
}

/// Eigenvalues and right eigenvectors (columns, column-major).
pub fn eigenpairs(m: &Mat<c64>) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n = m.nrows();
    let evd = m.eigendecomposition::<c64>();
    let s = evd.s().column_vector();
    let u = evd.u();
    let mut vals = Vec::with_capacity(n);
    let mut vecs = Vec::with_capacity(n * n);
    for j in 0..n {
        let v = s[j];
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Numerical(
                "dense eigensolver produced non-finite eigenvalue".into(),
            ));
        }
        vals.push(Complex64::new(v.re, v.im));
        for i in 0..n {
            let w = u[(i, j)];
            vecs.push(Complex64::new(w.re, w.im));
        }
    }
    Ok((vals, vecs))
}

/// Extremal singular values (sigma_max, sigma_min).
pub fn singular_extremes(m: &Mat<c64>) -> Result<(f64, f64)> {
    let svd = m.svd();
    let s = svd.s_diagonal();
    let k = s.nrows();
    if k == 0 {
        return Err(Error::Precondition("empty matrix in SVD".into()));
    }
    let smax = s[0].re;
    let smin = s[k - 1].re;
    if !smax.is_finite() || !smin.is_finite() {
        return Err(Error::Numerical("SVD produced non-finite values".into()));
    }
    Ok((smax, smin))
}

/// Operator 2-norm.
pub fn operator_norm(m: &Mat<c64>) -> Result<f64> {
    Ok(singular_extremes(m)?.0)
}

/// Solve M X = B for dense M via partial-pivot LU.
pub fn solve(m: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    m.partial_piv_lu().solve(b)
}

pub fn identity(n: usize) -> Mat<c64> {
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            c64::new(1.0, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    })
}
