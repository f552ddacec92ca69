//! Minimal complex CSR matrix: assembly from triplets, matvec, and a
//! MatrixMarket-compatible coordinate dump.

use crate::error::Result;
use crate::Real;
use num_complex::Complex;
use std::io::Write;

#[derive(Debug, Clone)]
pub struct CsrMatrix<F> {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<Complex<F>>,
}

impl<F: Real> CsrMatrix<F> {
    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, Complex<F>)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex<F>> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            debug_assert!(r < n && c < n);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indices.push(c);
            values.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        Self {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[Complex<F>]) {
        let (lo, hi) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    pub fn matvec(&self, x: &[Complex<F>], y: &mut [Complex<F>]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            let mut acc = Complex::new(F::zero(), F::zero());
            for (c, v) in cols.iter().zip(vals) {
                acc += *v * x[*c];
            }
            y[r] = acc;
        }
    }

    pub fn matvec_alloc(&self, x: &[Complex<F>]) -> Vec<Complex<F>> {
        let mut y = vec![Complex::new(F::zero(), F::zero()); self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Elementwise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            n: self.n,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// Maximum |i - j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut b = 0usize;
        for r in 0..self.n {
            for &c in self.row(r).0 {
                b = b.max(r.abs_diff(c));
            }
        }
        b
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<F> {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => Complex::new(F::zero(), F::zero()),
        }
    }

    /// Coordinate-format text dump (1-indexed, "row col re im" per line).
    pub fn write_coordinate<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate complex general")?;
        writeln!(w, "{} {} {}", self.n, self.n, self.nnz())?;
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                writeln!(
                    w,
                    "{} {} {:.16e} {:.16e}",
                    r + 1,
                    c + 1,
                    v.re.to_f64_(),
                    v.im.to_f64_()
                )?;
            }
        }
        Ok(())
    }
}
