//! LDL^T factorization of complex *symmetric* (not Hermitian) banded
//! matrices, without pivoting. The assembled operators L + iD - sigma*I are
//! complex symmetric with bandwidth 1 (intervals) or nx (rectangles), so a
//! band factorization is the natural sparse direct solver here. A pivot
//! whose magnitude falls below the breakdown threshold aborts the
//! factorization (the caller perturbs the shift and retries).

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::Real;
use num_complex::Complex;

pub struct BandedLdl<F> {
    pub n: usize,
    pub bandwidth: usize,
    /// strictly-lower factors, column-major: lower[(j * bandwidth) + (i - j - 1)] = L[i][j]
    lower: Vec<Complex<F>>,
    diag: Vec<Complex<F>>,
}

impl<F: Real> BandedLdl<F> {
    /// Factor A - shift*I where A is given in CSR form and assumed complex
    /// symmetric with the stated bandwidth.
    pub fn factor(a: &CsrMatrix<F>, shift: Complex<F>) -> Result<Self> {
        let n = a.n;
        let b = a.bandwidth().max(1);
        let zero = Complex::new(F::zero(), F::zero());
        let mut lower = vec![zero; n * b];
        let mut diag = vec![zero; n];

        // breakdown threshold relative to the largest matrix entry
        let mut amax = F::zero();
        for v in &a.values {
            amax = amax.max(v.norm());
        }
        amax = amax.max(shift.norm()).max(F::one());
        let tiny = F::from_f64_(1e-14) * amax;

        // work buffer for the active column (dense within the band)
        let mut work = vec![zero; b + 1];
        for j in 0..n {
            let hi = (j + b).min(n - 1);
            let width = hi - j;
            for w in work.iter_mut().take(width + 1) {
                *w = zero;
            }
            let (cols, vals) = a.row(j);
            for (c, v) in cols.iter().zip(vals) {
                if *c >= j && *c <= hi {
                    work[c - j] = *v;
                }
            }
            work[0] -= shift;

            // left-looking update from columns k in [j-b, j)
            let klo = j.saturating_sub(b);
            for k in klo..j {
                let ljk = lower[k * b + (j - k - 1)];
                if ljk == zero {
                    continue;
                }
                let lam = ljk * diag[k];
                let khi = (k + b).min(n - 1);
                for i in j..=khi {
                    let lik = lower[k * b + (i - k - 1)];
                    work[i - j] -= lik * lam;
                }
            }

            let d = work[0];
            if d.norm() < tiny {
                return Err(Error::Numerical(format!(
                    "banded factorization breakdown at column {j}: |pivot| = {}",
                    d.norm()
                )));
            }
            diag[j] = d;
            for i in (j + 1)..=hi {
                lower[j * b + (i - j - 1)] = work[i - j] / d;
            }
        }

        Ok(Self {
            n,
            bandwidth: b,
            lower,
            diag,
        })
    }

    /// Solve (A - shift I) x = rhs in place.
    pub fn solve_in_place(&self, x: &mut [Complex<F>]) {
        let (n, b) = (self.n, self.bandwidth);
        // forward: L y = rhs
        for j in 0..n {
            let xj = x[j];
            let hi = (j + b).min(n - 1);
            for i in (j + 1)..=hi {
                let l = self.lower[j * b + (i - j - 1)];
                x[i] -= l * xj;
            }
        }
        // diagonal
        for j in 0..n {
            x[j] /= self.diag[j];
        }
        // backward: L^T x = y
        for j in (0..n).rev() {
            let hi = (j + b).min(n - 1);
            let mut acc = x[j];
            for i in (j + 1)..=hi {
                acc -= self.lower[j * b + (i - j - 1)] * x[i];
            }
            x[j] = acc;
        }
    }

    pub fn solve(&self, rhs: &[Complex<F>]) -> Vec<Complex<F>> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Solve the conjugate system (A - shift I)^H x = rhs, using
    /// M^H = conj(M) for complex symmetric M.
    pub fn solve_adjoint(&self, rhs: &[Complex<F>]) -> Vec<Complex<F>> {
        let mut x: Vec<Complex<F>> = rhs.iter().map(|v| v.conj()).collect();
        self.solve_in_place(&mut x);
        for v in &mut x {
            *v = v.conj();
        }
        x
    }
}
