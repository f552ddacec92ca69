//! Resolvent norms and pseudospectral diagnostics: point samples of
//! ||(A - z)^{-1}||, the sup over a vertical strip boundary, and a sampled
//! field over a complex rectangle.

use crate::discretize::AssembledOperator;
use crate::eigensolve::SpectrumResult;
use crate::error::{Error, Result};
use crate::linalg::banded::BandedLdl;
use crate::linalg::dense;
use crate::sparse::CsrMatrix;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use std::io::Write;

/// Below this size sigma_min comes from a dense SVD; above it, from inverse
/// power iteration on a banded factorization. The crossover is set low
/// because a field scan takes thousands of samples and the banded path is
/// orders of magnitude cheaper already at a few hundred unknowns.
pub const DENSE_SVD_CAP: usize = 128;
pub const NU_SAMPLES_DEFAULT: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventMethod {
    DenseSvd,
    IterativeSmallestSingular,
}

#[derive(Debug, Clone, Copy)]
pub struct ResolventSample {
    pub z: C,
    pub norm: f64,
    pub method: ResolventMethod,
}

/// sigma_min(A - zI) by inverse power iteration on (M^H M)^{-1}; M is
/// complex symmetric, so the M^H solve reuses the factorization through
/// conjugation.
fn sigma_min_iterative(m: &CsrMatrix<f64>, z: C) -> Result<f64> {
    let fact = BandedLdl::factor(m, z)?;
    let n = m.n;
    // deterministic start
    let mut v: Vec<C> = (0..n)
        .map(|i| {
            let t = (i as f64 + 1.0) / (n as f64 + 1.0);
            C::new(1.0 + (3.3 * t).sin(), (1.7 * t).cos())
        })
        .collect();
    normalize(&mut v);
    let mut prev = f64::INFINITY;
    for _ in 0..500 {
        // w = (M^H M)^{-1} v = M^{-1} M^{-H} v
        let u = fact.solve_adjoint(&v);
        let mut w = fact.solve(&u);
        let growth = norm2(&w);
        if !growth.is_finite() || growth == 0.0 {
            return Err(Error::Numerical(
                "inverse iteration for sigma_min broke down".into(),
            ));
        }
        let est = growth.powf(-0.5); // sigma_min estimate
        for x in &mut w {
            *x /= growth;
        }
        v = w;
        if (est - prev).abs() <= 1e-8 * est.abs() {
            return Ok(est);
        }
        prev = est;
    }
    Ok(prev)
}

fn norm2(v: &[C]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [C]) {
    let n = norm2(v);
    for x in v.iter_mut() {
        *x /= n;
    }
}

/// ||(A - z)^{-1}||_2 = 1/sigma_min(A - zI).
pub fn resolvent_norm(op: &AssembledOperator<f64>, z: C) -> Result<ResolventSample> {
    let n = op.size();
    if n <= DENSE_SVD_CAP {
        let mut m = dense::csr_to_dense(&op.matrix);
        for i in 0..n {
            let d = m[(i, i)];
            m[(i, i)] = faer::complex_native::c64::new(d.re - z.re, d.im - z.im);
        }
        let (_, smin) = dense::singular_extremes(&m)?;
        if smin <= f64::EPSILON * 100.0 {
            return Err(Error::Precondition(format!(
                "z = {z} coincides with an eigenvalue (sigma_min = {smin})"
            )));
        }
        Ok(ResolventSample {
            z,
            norm: 1.0 / smin,
            method: ResolventMethod::DenseSvd,
        })
    } else {
        let smin = sigma_min_iterative(&op.matrix, z).map_err(|e| match e {
            Error::Numerical(msg) if msg.contains("breakdown") => Error::Precondition(format!(
                "z = {z} coincides with an eigenvalue: {msg}"
            )),
            other => other,
        })?;
        Ok(ResolventSample {
            z,
            norm: 1.0 / smin,
            method: ResolventMethod::IterativeSmallestSingular,
        })
    }
}

/// Sup of the resolvent norm over the strip {Re z <= gamma_max}, evaluated
/// on the boundary line Re z = gamma_max with `nu_samples` points over
/// `nu_range`, refined around the three largest samples. The spectrum must
/// stay strictly right of the line.
pub fn strip_sup(
    op: &AssembledOperator<f64>,
    spectrum: &SpectrumResult,
    gamma_max: f64,
    nu_range: (f64, f64),
    nu_samples: usize,
) -> Result<f64> {
    if nu_samples < 3 {
        return Err(Error::Precondition("nu_samples must be >= 3".into()));
    }
    if let Some(bad) = spectrum.eigenvalues.iter().find(|l| l.re <= gamma_max) {
        return Err(Error::Regime(format!(
            "eigenvalue {bad} lies inside the strip Re z <= {gamma_max}"
        )));
    }
    let (lo, hi) = nu_range;
    if !(hi > lo) {
        return Err(Error::Precondition("empty nu_range".into()));
    }
    let line = |i: usize, n: usize| lo + (hi - lo) * (i as f64) / ((n - 1) as f64);
    let nus: Vec<f64> = (0..nu_samples).map(|i| line(i, nu_samples)).collect();
    let coarse: Vec<(f64, f64)> = nus
        .par_iter()
        .map(|&nu| {
            resolvent_norm(op, C::new(gamma_max, nu)).map(|s| (nu, s.norm))
        })
        .collect::<Result<_>>()?;

    // indices of the three largest samples, each refined by an iterative
    // local search: the peak width scales with dist(line, spectrum) and can
    // be far below the coarse step, so a single subdivision is not enough
    let mut order: Vec<usize> = (0..coarse.len()).collect();
    order.sort_by(|&a, &b| coarse[b].1.partial_cmp(&coarse[a].1).unwrap());
    let step = (hi - lo) / ((nu_samples - 1) as f64);
    let mut best = coarse.iter().fold(0.0_f64, |a, s| a.max(s.1));
    for &idx in order.iter().take(3) {
        let mut center = coarse[idx].0;
        let mut width = step;
        // each round samples 8 points across [center - width, center + width]
        // and recenters on the max; 14 rounds shrink the step by 4^14
        for _ in 0..14 {
            let refined: Vec<(f64, f64)> = (-4..=4)
                .into_par_iter()
                .filter(|&j| j != 0)
                .map(|j| {
                    let nu = center + width * (j as f64 / 4.0);
                    resolvent_norm(op, C::new(gamma_max, nu)).map(|s| (nu, s.norm))
                })
                .collect::<Result<_>>()?;
            let mut local_best = (center, best);
            for (nu, v) in refined {
                if v > local_best.1 {
                    local_best = (nu, v);
                }
            }
            best = best.max(local_best.1);
            center = local_best.0;
            width /= 4.0;
        }
    }
    Ok(best)
}

pub fn default_nu_range(op: &AssembledOperator<f64>) -> (f64, f64) {
    let (vmin, vmax) = op.v_min_max();
    (vmin - 1.0, vmax + 1.0)
}

#[derive(Debug, Clone)]
pub struct PseudospectrumField {
    /// (re_lo, re_hi, im_lo, im_hi)
    pub region: (f64, f64, f64, f64),
    /// row-major, rows over im, columns over re; +infinity marks samples
    /// that coincide with an eigenvalue
    pub samples: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
}

impl PseudospectrumField {
    pub fn z_at(&self, ix: usize, iy: usize) -> C {
        let (alo, ahi, blo, bhi) = self.region;
        let fx = if self.nx > 1 {
            ix as f64 / (self.nx - 1) as f64
        } else {
            0.5
        };
        let fy = if self.ny > 1 {
            iy as f64 / (self.ny - 1) as f64
        } else {
            0.5
        };
        C::new(alo + (ahi - alo) * fx, blo + (bhi - blo) * fy)
    }

    /// Number of samples with norm >= 1/eps; monotone in eps by definition.
    pub fn level_count(&self, eps: f64) -> usize {
        self.samples.iter().filter(|&&s| s >= 1.0 / eps).count()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "re,im,resolvent_norm")?;
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let z = self.z_at(ix, iy);
                let s = self.samples[iy * self.nx + ix];
                if s.is_infinite() {
                    writeln!(w, "{:.16e},{:.16e},inf", z.re, z.im)?;
                } else {
                    writeln!(w, "{:.16e},{:.16e},{:.16e}", z.re, z.im, s)?;
                }
            }
        }
        Ok(())
    }
}

/// Resolvent norm over a complex rectangle; samples landing on an
/// eigenvalue become +infinity markers rather than errors.
pub fn field(
    op: &AssembledOperator<f64>,
    region: (f64, f64, f64, f64),
    nx: usize,
    ny: usize,
) -> Result<PseudospectrumField> {
    if nx == 0 || ny == 0 {
        return Err(Error::Precondition("field needs nx, ny >= 1".into()));
    }
    let (alo, ahi, blo, bhi) = region;
    if !(alo.is_finite() && ahi.is_finite() && blo.is_finite() && bhi.is_finite()) {
        return Err(Error::Precondition("field region must be finite".into()));
    }
    let mut fld = PseudospectrumField {
        region,
        samples: vec![0.0; nx * ny],
        nx,
        ny,
    };
    let zs: Vec<(usize, C)> = (0..nx * ny)
        .map(|i| (i, fld.z_at(i % nx, i / nx)))
        .collect();
    let vals: Vec<(usize, f64)> = zs
        .par_iter()
        .map(|&(i, z)| {
            let v = match resolvent_norm(op, z) {
                Ok(s) => s.norm,
                Err(Error::Precondition(_)) => f64::INFINITY,
                Err(_) => f64::INFINITY,
            };
            (i, v)
        })
        .collect();
    for (i, v) in vals {
        fld.samples[i] = v;
    }
    Ok(fld)
}
