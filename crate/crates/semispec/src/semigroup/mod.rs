//! Semigroup decay: propagator norms ||e^{-tA}||, least-squares decay-rate
//! fits, and the quantitative two-piece decay envelope built from a measured
//! resolvent bound.

use crate::discretize::AssembledOperator;
use crate::error::{Error, Result};
use crate::linalg::{dense, expm};
use rayon::prelude::*;
use std::io::Write;

pub const EXP_DENSE_CAP: usize = 3000;
pub const NORM_UNDERFLOW: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct DecayCurve {
    pub ts: Vec<f64>,
    pub norms: Vec<f64>,
    pub op_id: String,
}

#[derive(Debug, Clone)]
pub struct DecayEnvelope {
    pub m: f64,
    pub rate: f64,
    pub resolvent_bound: f64,
    pub omega: f64,
    pub c0: f64,
}

impl DecayEnvelope {
    pub fn at(&self, t: f64) -> f64 {
        self.m * (-self.rate * t).exp()
    }
}

/// ||e^{-tA}||_2 via dense scaling-and-squaring and an SVD.
pub fn propagator_norm(op: &AssembledOperator<f64>, t: f64) -> Result<f64> {
    if op.size() > EXP_DENSE_CAP {
        return Err(Error::Precondition(format!(
            "size {} exceeds the dense exponential cap {EXP_DENSE_CAP}",
            op.size()
        )));
    }
    if t < 0.0 {
        return Err(Error::Precondition("propagator time must be >= 0".into()));
    }
    let mut m = dense::csr_to_dense(&op.matrix);
    let n = op.size();
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            m[(i, j)] = faer::complex_native::c64::new(-t * v.re, -t * v.im);
        }
    }
    let e = expm::expm(&m)?;
    dense::operator_norm(&e)
}

/// Decay curve over the given times; samples run in parallel.
pub fn decay_curve(op: &AssembledOperator<f64>, ts: &[f64]) -> Result<DecayCurve> {
    let norms: Vec<f64> = ts
        .par_iter()
        .map(|&t| propagator_norm(op, t))
        .collect::<Result<_>>()?;
    Ok(DecayCurve {
        ts: ts.to_vec(),
        norms,
        op_id: op.grid.id(),
    })
}

/// Least-squares slope of -log(norm) against t over the window.
pub fn decay_rate_fit(curve: &DecayCurve, window: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve
        .ts
        .iter()
        .zip(&curve.norms)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(&t, &n)| (t, n))
        .collect();
    if pts.len() < 5 {
        return Err(Error::Precondition(format!(
            "decay fit needs >= 5 samples in the window, found {}",
            pts.len()
        )));
    }
    if let Some((t, n)) = pts.iter().find(|(_, n)| *n < NORM_UNDERFLOW) {
        return Err(Error::Instability(format!(
            "propagator norm {n} at t = {t} is below the underflow floor; shrink the window"
        )));
    }
    if pts.iter().any(|(_, n)| *n <= 0.0) {
        return Err(Error::Precondition("norms must be positive for the fit".into()));
    }
    let k = pts.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for (t, n) in &pts {
        let y = -n.ln();
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let denom = k * stt - st * st;
    if denom.abs() < 1e-30 {
        return Err(Error::Precondition("degenerate time window for the fit".into()));
    }
    Ok((k * sty - st * sy) / denom)
}

/// Default fit window skipping the non-normal transient.
pub fn default_fit_window(rate_guess: f64) -> (f64, f64) {
    (2.0 / rate_guess, 6.0 / rate_guess)
}

/// Quantitative decay envelope from a measured resolvent bound: the
/// two-piece construction M = max(M1, M2) with
/// M1 = 2*omega*bound/(1 - e^{-c0}) and M2 = e^{2 c0}.
pub fn gp_envelope(resolvent_bound: f64, omega: f64, c0: f64) -> Result<DecayEnvelope> {
    if !(omega > 0.0) || !(resolvent_bound > 0.0) || !(c0 > 0.0) {
        return Err(Error::Precondition(
            "gp_envelope needs omega, resolvent_bound, c0 > 0".into(),
        ));
    }
    let m1 = 2.0 * omega * resolvent_bound / (1.0 - (-c0).exp());
    let m2 = (2.0 * c0).exp();
    Ok(DecayEnvelope {
        m: m1.max(m2),
        rate: omega,
        resolvent_bound,
        omega,
        c0,
    })
}

pub fn write_decay_csv<W: Write>(
    mut w: W,
    curve: &DecayCurve,
    envelope: &DecayEnvelope,
) -> Result<()> {
    writeln!(w, "t,norm,envelope")?;
    for (&t, &n) in curve.ts.iter().zip(&curve.norms) {
        writeln!(w, "{:.16e},{:.16e},{:.16e}", t, n, envelope.at(t))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{assemble_model, ModelKind};
    use crate::sparse::CsrMatrix;
    use num_complex::Complex64 as C;
    use crate::{Domain, Grid};

    fn op_from(n: usize, triplets: Vec<(usize, usize, C)>) -> AssembledOperator<f64> {
        AssembledOperator {
            matrix: CsrMatrix::from_triplets(n, triplets),
            grid: Grid::new(&Domain::Interval { a: 0.0, b: 1.0 }, &[n]),
            h: 1.0,
            potential_tag: "test".into(),
            model_tag: None,
            v_diag: vec![0.0; n],
        }
    }

    #[test]
    fn identity_at_t0() {
        let op = op_from(
            2,
            vec![(0, 0, C::new(1.0, 0.0)), (1, 1, C::new(2.0, 1.0))],
        );
        assert!((propagator_norm(&op, 0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normal_diagonal_decay() {
        let op = op_from(
            2,
            vec![(0, 0, C::new(1.0, 0.0)), (1, 1, C::new(2.0, 1.0))],
        );
        let n = propagator_norm(&op, 1.0).unwrap();
        assert!((n - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn jordan_transient_growth() {
        // exp(-t [[1,10],[0,1]]) = e^{-t} [[1,-10t],[0,1]]: at t=1 the norm
        // is about 10 e^{-1}, far above the spectral decay e^{-1}
        let op = op_from(
            2,
            vec![
                (0, 0, C::new(1.0, 0.0)),
                (0, 1, C::new(10.0, 0.0)),
                (1, 1, C::new(1.0, 0.0)),
            ],
        );
        let n = propagator_norm(&op, 1.0).unwrap();
        assert!(n > (-1.0f64).exp());
        // hand value: e^{-1} * sigma_max([[1,-10],[0,1]])
        let s = (102.0f64 + (102.0f64 * 102.0 - 4.0).sqrt()).sqrt() / 2.0_f64.sqrt();
        assert!((n - (-1.0f64).exp() * s).abs() < 1e-9);
    }

    #[test]
    fn exact_exponential_fit() {
        let ts: Vec<f64> = (0..20).map(|i| 0.2 * i as f64).collect();
        let norms: Vec<f64> = ts.iter().map(|t| (-3.0 * t).exp()).collect();
        let curve = DecayCurve {
            ts,
            norms,
            op_id: "synthetic".into(),
        };
        let r = decay_rate_fit(&curve, (0.0, 4.0)).unwrap();
        assert!((r - 3.0).abs() < 1e-10);
        let flat = DecayCurve {
            ts: (0..10).map(|i| i as f64).collect(),
            norms: vec![1.0; 10],
            op_id: "flat".into(),
        };
        assert!(decay_rate_fit(&flat, (0.0, 9.0)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fit_window_too_small() {
        let curve = DecayCurve {
            ts: vec![0.0, 1.0, 2.0],
            norms: vec![1.0, 0.5, 0.25],
            op_id: "short".into(),
        };
        assert!(decay_rate_fit(&curve, (0.0, 2.0)).is_err());
    }

    #[test]
    fn underflow_detected() {
        let ts: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let norms: Vec<f64> = ts.iter().map(|t| (-20.0 * t).exp()).collect();
        let curve = DecayCurve {
            ts,
            norms,
            op_id: "steep".into(),
        };
        assert!(matches!(
            decay_rate_fit(&curve, (0.0, 9.0)),
            Err(Error::Instability(_))
        ));
    }

    #[test]
    fn davies_rate_matches_min_re() {
        let op = assemble_model(
            ModelKind::Oscillator {
                alpha: 1.0,
                length: 12.0,
            },
            &[400],
        )
        .unwrap();
        let want = 0.7071067811865476;
        let window = default_fit_window(want);
        let ts: Vec<f64> = (0..=12)
            .map(|i| window.0 + (window.1 - window.0) * i as f64 / 12.0)
            .collect();
        let curve = decay_curve(&op, &ts).unwrap();
        let rate = decay_rate_fit(&curve, window).unwrap();
        assert!((rate - want).abs() / want < 0.02, "rate = {rate}");
    }

    #[test]
    fn contraction_property() {
        let op = assemble_model(
            ModelKind::Oscillator {
                alpha: 1.0,
                length: 12.0,
            },
            &[200],
        )
        .unwrap();
        for &t in &[0.0, 0.3, 1.0, 2.5] {
            assert!(propagator_norm(&op, t).unwrap() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn semigroup_submultiplicative() {
        let op = assemble_model(
            ModelKind::Oscillator {
                alpha: 1.0,
                length: 12.0,
            },
            &[150],
        )
        .unwrap();
        for &(t1, t2) in &[(0.5, 0.5), (0.3, 1.1), (1.0, 2.0)] {
            let a = propagator_norm(&op, t1).unwrap();
            let b = propagator_norm(&op, t2).unwrap();
            let ab = propagator_norm(&op, t1 + t2).unwrap();
            assert!(ab <= a * b + 1e-10);
        }
    }

    #[test]
    fn envelope_construction() {
        let e = gp_envelope(1.0, 1.0, 1.0).unwrap();
        let m1 = 2.0 / (1.0 - (-1.0f64).exp());
        assert!((m1 - 3.1639534137386528).abs() < 1e-12);
        assert!((e.m - (2.0f64).exp()).abs() < 1e-12, "M = {}", e.m);
        assert!(e.at(0.0) >= 1.0);
        assert!(gp_envelope(1.0, 0.0, 1.0).is_err());
    }
}
