//! Eigenvalue extraction for the assembled non-normal operators: a dense
//! full-spectrum path for moderate sizes, a multi-shift shift-invert Arnoldi
//! path for large ones, and a grid-refinement filter that discards
//! discretization artifacts.

use crate::discretize::AssembledOperator;
use crate::error::{Error, Result};
use crate::linalg::{arnoldi, dense};
use crate::sparse::CsrMatrix;
use num_complex::Complex64 as C;

pub const DENSE_CAP_DEFAULT: usize = 3000;

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Dense,
    ShiftInvert { shifts: Vec<C> },
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<C>,
    /// relative residual ||Av - lambda v|| / max(|lambda|, 1) per pair
    pub residuals: Vec<f64>,
    pub method: Method,
    pub grid_id: String,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Shift-invert work plan. Shifts sit on (or right of) the imaginary axis,
/// left of the spectrum of L + iD, so each factorization is well posed.
#[derive(Debug, Clone)]
pub struct ShiftPlan {
    pub shifts: Vec<C>,
    pub k_per_shift: usize,
    pub tol: f64,
    pub max_iterations: usize,
}

impl ShiftPlan {
    /// Shifts i*q at the {0, 25, 50, 75, 100} percentiles q of V over the
    /// grid, covering the strip that contains the spectrum's imaginary part.
    pub fn default_for(op: &AssembledOperator<f64>) -> Result<Self> {
        let mut v = op.v_diag.clone();
        if v.is_empty() {
            return Err(Error::Precondition("operator has no grid nodes".into()));
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pick = |p: f64| {
            let idx = ((v.len() - 1) as f64 * p / 100.0).round() as usize;
            v[idx]
        };
        let mut shifts: Vec<C> = [0.0, 25.0, 50.0, 75.0, 100.0]
            .iter()
            .map(|&p| C::new(0.0, pick(p)))
            .collect();
        shifts.dedup();
        Ok(Self {
            shifts,
            k_per_shift: 8,
            tol: 1e-9,
            max_iterations: 4,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.shifts.iter().any(|s| s.re < 0.0) {
            return Err(Error::Precondition(
                "shift-invert shifts must have nonnegative real part".into(),
            ));
        }
        if self.shifts.is_empty() || self.k_per_shift == 0 {
            return Err(Error::Precondition("empty shift plan".into()));
        }
        Ok(())
    }

    pub fn subspace(&self) -> usize {
        4 * self.k_per_shift
    }
}

fn residual_of(a: &CsrMatrix<f64>, lam: C, v: &[C]) -> f64 {
    let mut r = a.matvec_alloc(v);
    let mut rn = 0.0;
    let mut vn = 0.0;
    for (ri, vi) in r.iter_mut().zip(v) {
        *ri -= lam * vi;
        rn += ri.norm_sqr();
        vn += vi.norm_sqr();
    }
    (rn / vn).sqrt() / lam.norm().max(1.0)
}

/// Full dense spectrum with per-pair residuals recomputed by one sparse
/// matvec each.
pub fn dense_spectrum(op: &AssembledOperator<f64>) -> Result<SpectrumResult> {
    dense_spectrum_capped(op, DENSE_CAP_DEFAULT)
}

pub fn dense_spectrum_capped(op: &AssembledOperator<f64>, cap: usize) -> Result<SpectrumResult> {
    let n = op.size();
    if n > cap {
        return Err(Error::Precondition(format!(
            "problem size {n} exceeds the dense cap {cap}; use shift_invert_leftmost"
        )));
    }
    let m = dense::csr_to_dense(&op.matrix);
    let (vals, vecs) = dense::eigenpairs(&m)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| {
        (vals[p].re, vals[p].im)
            .partial_cmp(&(vals[q].re, vals[q].im))
            .unwrap()
    });
    let mut eigenvalues = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for &j in &order {
        let v = &vecs[j * n..(j + 1) * n];
        eigenvalues.push(vals[j]);
        residuals.push(residual_of(&op.matrix, vals[j], v));
    }
    Ok(SpectrumResult {
        eigenvalues,
        residuals,
        method: Method::Dense,
        grid_id: op.grid.id(),
    })
}

/// Shift-invert Arnoldi at every shift of the plan; results are merged,
/// deduplicated (keeping the smaller residual), and residual-filtered.
pub fn shift_invert_leftmost(
    op: &AssembledOperator<f64>,
    plan: &ShiftPlan,
) -> Result<SpectrumResult> {
    plan.validate()?;
    let mut found: Vec<(C, f64)> = Vec::new();
    for &sigma in &plan.shifts {
        let run = |s: C| {
            arnoldi::shift_invert(
                &op.matrix,
                s,
                plan.k_per_shift,
                plan.subspace(),
                plan.tol,
                plan.max_iterations,
            )
        };
        // a shift that lands on an eigenvalue breaks the factorization:
        // perturb once by tol and retry
        let pairs = match run(sigma) {
            Ok(p) => p,
            Err(Error::Numerical(_)) => {
                let nudge = plan.tol * (1.0 + sigma.norm());
                run(sigma + C::new(nudge, nudge))?
            }
            Err(e) => return Err(e),
        };
        for p in pairs {
            found.push((p.value, p.residual));
        }
    }
    // dedupe by pairwise distance, keep the smaller residual
    found.sort_by(|a, b| {
        (a.0.re, a.0.im, a.1)
            .partial_cmp(&(b.0.re, b.0.im, b.1))
            .unwrap()
    });
    let mut kept: Vec<(C, f64)> = Vec::new();
    for (lam, res) in found {
        if res > plan.tol {
            continue;
        }
        let scale = 1.0 + lam.norm();
        if let Some(slot) = kept
            .iter_mut()
            .find(|(l, _)| (*l - lam).norm() < plan.tol.max(1e-8) * scale)
        {
            if res < slot.1 {
                *slot = (lam, res);
            }
        } else {
            kept.push((lam, res));
        }
    }
    Ok(SpectrumResult {
        eigenvalues: kept.iter().map(|p| p.0).collect(),
        residuals: kept.iter().map(|p| p.1).collect(),
        method: Method::ShiftInvert {
            shifts: plan.shifts.clone(),
        },
        grid_id: op.grid.id(),
    })
}

/// Spectrum by the appropriate path for the problem size.
pub fn spectrum_auto(op: &AssembledOperator<f64>, dense_cap: usize) -> Result<SpectrumResult> {
    if op.size() <= dense_cap {
        dense_spectrum_capped(op, dense_cap)
    } else {
        shift_invert_leftmost(op, &ShiftPlan::default_for(op)?)
    }
}

/// Eigenvalue of minimal real part; ties by smaller |Im|, then smaller Im.
/// Real parts within 1e-9 relative of the minimum count as tied, so that
/// physically degenerate branches (e.g. the two boundary families of a
/// truncated model) are resolved by the imaginary rule instead of noise.
pub fn leftmost(spec: &SpectrumResult) -> Result<C> {
    let re_min = spec
        .eigenvalues
        .iter()
        .map(|l| l.re)
        .fold(f64::INFINITY, f64::min);
    let tie = 1e-9 * (1.0 + re_min.abs());
    spec.eigenvalues
        .iter()
        .copied()
        .filter(|l| l.re <= re_min + tie)
        .min_by(|a, b| {
            (a.im.abs(), a.im)
                .partial_cmp(&(b.im.abs(), b.im))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .ok_or_else(|| Error::Precondition("empty spectrum has no leftmost eigenvalue".into()))
}

#[derive(Debug, Clone)]
pub struct RefinedSpectrum {
    /// finest-level values that persisted across every level
    pub spectrum: SpectrumResult,
    pub per_level_leftmost: Vec<C>,
    /// Richardson extrapolation of the leftmost value from the two finest
    /// levels (the scheme is second order, so (4*fine - coarse) / 3)
    pub leftmost_extrapolated: C,
}

/// Run the builder at resolutions n, 2n, 4n, ... and keep only eigenvalues
/// that persist at every level within match_tol; values reported from the
/// finest level. An unstable leftmost eigenvalue is an instability error.
pub fn refine_filter<B>(
    builder: B,
    base_n: usize,
    levels: usize,
    match_tol: impl Fn(C) -> f64,
    dense_cap: usize,
) -> Result<RefinedSpectrum>
where
    B: Fn(usize) -> Result<AssembledOperator<f64>>,
{
    if levels < 2 {
        return Err(Error::Precondition("refine_filter needs >= 2 levels".into()));
    }
    let mut specs = Vec::with_capacity(levels);
    for l in 0..levels {
        let op = builder(base_n << l)?;
        specs.push(spectrum_auto(&op, dense_cap)?);
    }

    let finest = &specs[levels - 1];
    let mut eigenvalues = Vec::new();
    let mut residuals = Vec::new();
    for (i, &lam) in finest.eigenvalues.iter().enumerate() {
        let tol = match_tol(lam);
        let everywhere = specs[..levels - 1].iter().all(|s| {
            s.eigenvalues
                .iter()
                .any(|&mu| (mu - lam).norm() <= tol)
        });
        if everywhere {
            eigenvalues.push(lam);
            residuals.push(finest.residuals[i]);
        }
    }

    let per_level_leftmost: Vec<C> = specs
        .iter()
        .map(leftmost)
        .collect::<Result<_>>()?;
    let lm_fine = per_level_leftmost[levels - 1];
    let lm_coarse = per_level_leftmost[levels - 2];
    let stable = per_level_leftmost
        .iter()
        .all(|&lm| (lm - lm_fine).norm() <= match_tol(lm_fine));
    if !stable || eigenvalues.is_empty() {
        return Err(Error::Instability(format!(
            "leftmost eigenvalue not stable across refinement levels: {}",
            per_level_leftmost
                .iter()
                .map(|l| format!("{l}"))
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    let leftmost_extrapolated = (4.0 * lm_fine - lm_coarse) / 3.0;

    Ok(RefinedSpectrum {
        spectrum: SpectrumResult {
            eigenvalues,
            residuals,
            method: finest.method.clone(),
            grid_id: finest.grid_id.clone(),
        },
        per_level_leftmost,
        leftmost_extrapolated,
    })
}

/// Default refinement match tolerance: absolute + relative mix.
pub fn default_match_tol(lam: C) -> f64 {
    1e-4 * (1.0 + lam.norm())
}

/// Relaxed tolerance for sweep rows, where modest leftmost drift between
/// levels reflects resolution, not artifacts.
pub fn sweep_match_tol(lam: C) -> f64 {
    (1e-4 * (1.0 + lam.norm())).max(2e-3 * lam.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{assemble_model, ModelKind};
    use crate::sparse::CsrMatrix;
    use crate::{Domain, Grid};

    fn diag_op(values: &[C]) -> AssembledOperator<f64> {
        let n = values.len();
        let triplets = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, i, v))
            .collect::<Vec<_>>();
        AssembledOperator {
            matrix: CsrMatrix::from_triplets(n, triplets),
            grid: Grid::new(&Domain::Interval { a: 0.0, b: 1.0 }, &[n]),
            h: 1.0,
            potential_tag: "diag".into(),
            model_tag: None,
            v_diag: values.iter().map(|v| v.im).collect(),
        }
    }

    #[test]
    fn dense_diagonal() {
        let op = diag_op(&[C::new(1.0, 2.0), C::new(3.0, 0.0)]);
        let s = dense_spectrum(&op).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.eigenvalues[0] - C::new(1.0, 2.0)).norm() < 1e-12);
        assert!((s.eigenvalues[1] - C::new(3.0, 0.0)).norm() < 1e-12);
        assert!(s.residuals.iter().all(|&r| r < 1e-12));
    }

    #[test]
    fn dense_cap_enforced() {
        let vals: Vec<C> = (0..5).map(|i| C::new(i as f64, 0.0)).collect();
        let op = diag_op(&vals);
        assert!(dense_spectrum_capped(&op, 4).is_err());
    }

    #[test]
    fn leftmost_tiebreak() {
        let spec = SpectrumResult {
            eigenvalues: vec![C::new(1.0, 2.0), C::new(1.0, -2.0), C::new(2.0, 0.0)],
            residuals: vec![0.0; 3],
            method: Method::Dense,
            grid_id: "t".into(),
        };
        assert_eq!(leftmost(&spec).unwrap(), C::new(1.0, -2.0));
        let single = SpectrumResult {
            eigenvalues: vec![C::new(3.0, 0.0)],
            residuals: vec![0.0],
            method: Method::Dense,
            grid_id: "t".into(),
        };
        assert_eq!(leftmost(&single).unwrap(), C::new(3.0, 0.0));
    }

    #[test]
    fn empty_spectrum_is_error() {
        let spec = SpectrumResult {
            eigenvalues: vec![],
            residuals: vec![],
            method: Method::Dense,
            grid_id: "t".into(),
        };
        assert!(leftmost(&spec).is_err());
    }

    #[test]
    fn shift_invert_recovers_diagonal() {
        let op = diag_op(&[C::new(1.0, 0.0), C::new(2.0, 1.0)]);
        let plan = ShiftPlan {
            shifts: vec![C::new(0.0, 0.0)],
            k_per_shift: 2,
            tol: 1e-9,
            max_iterations: 3,
        };
        let s = shift_invert_leftmost(&op, &plan).unwrap();
        assert_eq!(s.len(), 2);
        let lm = leftmost(&s).unwrap();
        assert!((lm - C::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn negative_real_shift_rejected() {
        let plan = ShiftPlan {
            shifts: vec![C::new(-1.0, 0.0)],
            k_per_shift: 2,
            tol: 1e-9,
            max_iterations: 3,
        };
        assert!(plan.validate().is_err());
    }

    #[test]
    fn oscillator_dense_vs_shift_invert() {
        let op = assemble_model(
            ModelKind::Oscillator {
                alpha: 1.0,
                length: 12.0,
            },
            &[400],
        )
        .unwrap();
        let d = dense_spectrum(&op).unwrap();
        let lm_dense = leftmost(&d).unwrap();
        let plan = ShiftPlan::default_for(&op).unwrap();
        let s = shift_invert_leftmost(&op, &plan).unwrap();
        let lm_si = leftmost(&s).unwrap();
        assert!(
            (lm_dense - lm_si).norm() < 1e-8,
            "dense {lm_dense} vs shift-invert {lm_si}"
        );
    }

    #[test]
    fn refine_filter_davies_stable() {
        let r = refine_filter(
            |n| {
                assemble_model(
                    ModelKind::Oscillator {
                        alpha: 1.0,
                        length: 12.0,
                    },
                    &[n],
                )
            },
            500,
            2,
            default_match_tol,
            DENSE_CAP_DEFAULT,
        )
        .unwrap();
        let lm = leftmost(&r.spectrum).unwrap();
        // Davies oracle: leftmost = (1+i)/sqrt(2)
        let want = C::new(0.7071067811865476, 0.7071067811865476);
        assert!((lm - want).norm() < 1e-3);
        assert!((r.leftmost_extrapolated - want).norm() < 1e-5);
    }

    #[test]
    fn refine_filter_diagonal_identical_levels() {
        let vals: Vec<C> = (0..6).map(|i| C::new(1.0 + i as f64, 0.5)).collect();
        let inner = vals.clone();
        let r = refine_filter(
            move |_n| Ok(diag_op(&inner)),
            6,
            2,
            default_match_tol,
            DENSE_CAP_DEFAULT,
        )
        .unwrap();
        assert_eq!(r.spectrum.len(), 6);
        assert_eq!(r.leftmost_extrapolated, C::new(1.0, 0.5));
    }

    #[test]
    fn refine_filter_undersampled_fails() {
        // h tiny on a very coarse grid: leftmost moves between levels
        let r = refine_filter(
            |n| {
                assemble_model(
                    ModelKind::Oscillator {
                        alpha: 1.0,
                        length: 12.0,
                    },
                    &[n],
                )
            },
            20,
            2,
            |_| 1e-8,
            DENSE_CAP_DEFAULT,
        );
        assert!(matches!(r, Err(Error::Instability(_))));
    }
}

