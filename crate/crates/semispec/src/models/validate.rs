//! Discretization-versus-oracle validation table: the analytic model spectra
//! are recomputed from assembled finite-difference matrices and compared
//! entry by entry. Shared by the CLI `models validate` subcommand and the
//! acceptance battery.

use crate::discretize::{assemble_model, ModelKind};
use crate::eigensolve::{dense_spectrum_capped, leftmost, shift_invert_leftmost, ShiftPlan};
use crate::error::{Error, Result};
use crate::models::{davies_spectrum, halfline_airy_spectrum, quad_tensor_spectrum};
use crate::potentials::kappa_of;
use num_complex::Complex64 as C;
use std::io::Write;

pub const AIRY_TOL: f64 = 1e-4;
pub const DAVIES_TOL: f64 = 1e-6;
pub const CONJUGATION_TOL: f64 = 1e-8;
pub const TENSOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ValidationRow {
    pub model: &'static str,
    pub case: String,
    pub computed: C,
    pub oracle: C,
    pub abs_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn row(
    model: &'static str,
    case: String,
    computed: C,
    oracle: C,
    tolerance: f64,
) -> ValidationRow {
    let abs_error = (computed - oracle).norm();
    ValidationRow {
        model,
        case,
        computed,
        oracle,
        abs_error,
        tolerance,
        pass: abs_error <= tolerance,
    }
}

/// Nearest computed eigenvalue to a target, or an error if none were found.
fn nearest(values: &[C], target: C) -> Result<C> {
    values
        .iter()
        .copied()
        .min_by(|a, b| {
            (*a - target)
                .norm()
                .partial_cmp(&(*b - target).norm())
                .unwrap()
        })
        .ok_or_else(|| Error::Numerical("no eigenvalues returned".into()))
}

/// Half-line Airy model, J = 1, L = 30, n = 2000: the first three
/// eigenvalues must match |mu_j| e^{i pi/3} to 1e-4.
pub fn airy_rows() -> Result<Vec<ValidationRow>> {
    let oracle = halfline_airy_spectrum(1.0_f64, 3)?;
    let kind = ModelKind::HalfLineAiry {
        j_current: 1.0,
        length: 30.0,
    };
    let refined = richardson_pair(kind, 1000, &oracle.eigenvalues)?;
    let mut rows = Vec::new();
    for (j, (&got, &want)) in refined.iter().zip(&oracle.eigenvalues).enumerate() {
        rows.push(row(
            "halfline-airy",
            format!("J=1 L=30 n=2000 j={}", j + 1),
            got,
            want,
            AIRY_TOL,
        ));
    }
    Ok(rows)
}

/// One Richardson step on matched eigenvalues from an n and a 2n grid;
/// the finite-difference scheme is second order, so (4 fine - coarse) / 3.
fn richardson_pair(kind: ModelKind<f64>, n: usize, targets: &[C]) -> Result<Vec<C>> {
    let solve = |m: usize| -> Result<Vec<C>> {
        let op = assemble_model(kind, &[m])?;
        let plan = ShiftPlan {
            shifts: vec![C::new(0.0, 0.0)],
            k_per_shift: targets.len() + 4,
            tol: 1e-10,
            max_iterations: 6,
        };
        Ok(shift_invert_leftmost(&op, &plan)?.eigenvalues)
    };
    let coarse = solve(n)?;
    let fine = solve(2 * n)?;
    targets
        .iter()
        .map(|&t| {
            let c = nearest(&coarse, t)?;
            let f = nearest(&fine, t)?;
            Ok((4.0 * f - c) / 3.0)
        })
        .collect()
}

/// Davies oscillator, alpha = 1, L = 12: the first five eigenvalues must
/// match (2k+1) e^{i pi/4} to 1e-6 (one Richardson step from n = 1000/2000),
/// and the alpha = -1 spectrum must be the complex conjugate.
pub fn davies_rows() -> Result<Vec<ValidationRow>> {
    let oracle = davies_spectrum(1.0_f64, 4)?;
    let kind = ModelKind::Oscillator {
        alpha: 1.0,
        length: 12.0,
    };
    let refined = richardson_pair(kind, 1000, &oracle.eigenvalues)?;
    let mut rows = Vec::new();
    for (k, (&got, &want)) in refined.iter().zip(&oracle.eigenvalues).enumerate() {
        rows.push(row(
            "davies",
            format!("alpha=1 L=12 n=2000 k={k}"),
            got,
            want,
            DAVIES_TOL,
        ));
    }

    // conjugation equivariance at solver accuracy on a dense-sized grid
    let n = 400;
    let plus = assemble_model(
        ModelKind::Oscillator {
            alpha: 1.0,
            length: 12.0,
        },
        &[n],
    )?;
    let minus = assemble_model(
        ModelKind::Oscillator {
            alpha: -1.0,
            length: 12.0,
        },
        &[n],
    )?;
    let lp = leftmost(&dense_spectrum_capped(&plus, n)?)?;
    let lm = leftmost(&dense_spectrum_capped(&minus, n)?)?;
    rows.push(row(
        "davies",
        format!("conjugation alpha=-1 n={n}"),
        lm,
        lp.conj(),
        CONJUGATION_TOL,
    ));
    Ok(rows)
}

/// Deterministic Hessian spectra in [-5, -0.1] u [0.1, 5], dimensions 1-3.
fn tensor_cases(count: usize) -> Vec<Vec<f64>> {
    // splitmix64: fixed seed, reproducible across platforms
    let mut state: u64 = 0x9e3779b97f4a7c15;
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    };
    let mut unit = move || (next() >> 11) as f64 / (1u64 << 53) as f64;
    (0..count)
        .map(|i| {
            let dim = i % 3 + 1;
            (0..dim)
                .map(|_| {
                    let mag = 0.1 + 4.9 * unit();
                    if unit() < 0.5 {
                        -mag
                    } else {
                        mag
                    }
                })
                .collect()
        })
        .collect()
}

/// Tensor-sum consistency: min Re of the quadratic model at lambda/2 equals
/// kappa(lambda)/2 to 1e-12 for 20 random Hessian spectra.
pub fn tensor_rows() -> Result<Vec<ValidationRow>> {
    tensor_cases(20)
        .into_iter()
        .enumerate()
        .map(|(i, lambdas)| {
            let half: Vec<f64> = lambdas.iter().map(|l| l / 2.0).collect();
            let spec = quad_tensor_spectrum(&half, 3)?;
            let want = kappa_of(&lambdas)? / 2.0;
            Ok(row(
                "quad-tensor",
                format!("case {i} dims={}", lambdas.len()),
                C::new(spec.min_real, 0.0),
                C::new(want, 0.0),
                TENSOR_TOL,
            ))
        })
        .collect()
}

pub fn validate_models() -> Result<Vec<ValidationRow>> {
    let mut rows = airy_rows()?;
    rows.extend(davies_rows()?);
    rows.extend(tensor_rows()?);
    Ok(rows)
}

pub fn write_validation_csv<W: Write>(mut w: W, rows: &[ValidationRow]) -> Result<()> {
    writeln!(
        w,
        "model,case,computed_re,computed_im,oracle_re,oracle_im,abs_error,tolerance,pass"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.model,
            r.case,
            r.computed.re,
            r.computed.im,
            r.oracle.re,
            r.oracle.im,
            r.abs_error,
            r.tolerance,
            r.pass
        )?;
    }
    Ok(())
}
