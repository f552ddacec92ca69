//! Analytic oracle catalog: exact spectra and decay envelopes of the model
//! operators (half-line complex Airy, complex harmonic oscillator, quadratic
//! tensor sums) plus the Ginzburg-Landau critical current.

pub mod airy;
pub mod validate;

use crate::error::{Error, Result};
use crate::Real;
use airy::airy_zeros;
use num_complex::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSource {
    AiryHalfline,
    Davies,
    QuadTensor,
}

/// Exact point spectrum of a model operator.
#[derive(Debug, Clone)]
pub struct ModelSpectrum<F> {
    pub eigenvalues: Vec<Complex<F>>,
    pub min_real: F,
    pub source: ModelSource,
}

/// Dirichlet half-line complex Airy operator -d^2/dx^2 + iJx:
/// eigenvalues e^{i pi/3} |mu_j| J^{2/3}, j = 1..k.
pub fn halfline_airy_spectrum<F: Real>(j_current: F, k: usize) -> Result<ModelSpectrum<F>> {
    if j_current <= F::zero() {
        return Err(Error::Precondition("halfline airy requires J > 0".into()));
    }
    let zeros = airy_zeros::<F>(k)?;
    let two_thirds = F::from_f64_(2.0 / 3.0);
    let scale = j_current.powf(two_thirds);
    let phase = Complex::from_polar(F::one(), F::PI() / F::from_f64_(3.0));
    let eigenvalues: Vec<Complex<F>> = zeros
        .zeros
        .iter()
        .map(|mu| phase * Complex::from(mu.abs() * scale))
        .collect();
    let min_real = zeros.mu1_abs() * scale / F::from_f64_(2.0); // cos(pi/3) = 1/2
    Ok(ModelSpectrum {
        eigenvalues,
        min_real,
        source: ModelSource::AiryHalfline,
    })
}

/// Complex harmonic oscillator -d^2/dx^2 + i alpha x^2:
/// eigenvalues (2k+1) sqrt(|alpha|) e^{i sign(alpha) pi/4}, k = 0..kmax.
pub fn davies_spectrum<F: Real>(alpha: F, kmax: usize) -> Result<ModelSpectrum<F>> {
    if alpha == F::zero() {
        return Err(Error::Precondition("davies oscillator requires alpha != 0".into()));
    }
    let sqrt_a = alpha.abs().sqrt();
    let sign = if alpha > F::zero() { F::one() } else { -F::one() };
    let phase = Complex::from_polar(F::one(), sign * F::PI() / F::from_f64_(4.0));
    let eigenvalues: Vec<Complex<F>> = (0..=kmax)
        .map(|k| phase * Complex::from(F::from_f64_((2 * k + 1) as f64) * sqrt_a))
        .collect();
    let min_real = sqrt_a / F::from_f64_(2.0).sqrt();
    Ok(ModelSpectrum {
        eigenvalues,
        min_real,
        source: ModelSource::Davies,
    })
}

/// Quadratic tensor model -Delta + i sum_j lambda_j x_j^2: all sums
/// sum_j (2k_j+1) sqrt(|lambda_j|) e^{i sign(lambda_j) pi/4}, k_j <= kmax.
/// min_real = sum_j sqrt(|lambda_j|/2).
pub fn quad_tensor_spectrum<F: Real>(lambdas: &[F], kmax: usize) -> Result<ModelSpectrum<F>> {
    if lambdas.is_empty() {
        return Err(Error::Precondition("tensor model needs at least one lambda".into()));
    }
    if lambdas.iter().any(|&l| l == F::zero()) {
        return Err(Error::Precondition("tensor model requires all lambda_j != 0".into()));
    }
    let mut sums: Vec<Complex<F>> = vec![Complex::from(F::zero())];
    for &lam in lambdas {
        let base = davies_spectrum(lam, kmax)?;
        let mut next = Vec::with_capacity(sums.len() * base.eigenvalues.len());
        for s in &sums {
            for e in &base.eigenvalues {
                next.push(*s + *e);
            }
        }
        sums = next;
    }
    let two = F::from_f64_(2.0);
    let min_real = lambdas
        .iter()
        .fold(F::zero(), |acc, &l| acc + (l.abs() / two).sqrt());
    Ok(ModelSpectrum {
        eigenvalues: sums,
        min_real,
        source: ModelSource::QuadTensor,
    })
}

/// Half-plane parallel-current decay envelope exp(-(n-1) t^3 / 12).
pub fn halfplane_decay_envelope<F: Real>(t: F, n: usize) -> Result<F> {
    if t < F::zero() {
        return Err(Error::Precondition("t must be >= 0".into()));
    }
    if n < 2 {
        return Err(Error::Precondition("envelope is defined for n >= 2".into()));
    }
    let twelve = F::from_f64_(12.0);
    let nm1 = F::from_f64_((n - 1) as f64);
    Ok((-nm1 * t * t * t / twelve).exp())
}

/// Critical-current verdict for the normal state: J_c = (2/|mu_1|)^{3/2};
/// stable iff the perpendicular boundary set is empty (`j_m = None`) or
/// J_m > J_c.
#[derive(Debug, Clone, Copy)]
pub struct GlStability<F> {
    pub j_c: F,
    pub stable: bool,
}

pub fn gl_stability<F: Real>(j_m: Option<F>) -> Result<GlStability<F>> {
    let mu1 = airy_zeros::<F>(1)?.mu1_abs();
    let j_c = (F::from_f64_(2.0) / mu1).powf(F::from_f64_(1.5));
    let stable = match j_m {
        None => true,
        Some(jm) => jm > j_c,
    };
    Ok(GlStability { j_c, stable })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-6;

    fn close(a: Complex<f64>, re: f64, im: f64) -> bool {
        (a.re - re).abs() < TOL && (a.im - im).abs() < TOL
    }

    #[test]
    fn airy_halfline_j1() {
        let s = halfline_airy_spectrum(1.0, 2).unwrap();
        // |mu_1| e^{i pi/3}, |mu_2| e^{i pi/3} from the zero oracle
        assert!(close(s.eigenvalues[0], 1.169054, 2.024860), "{:?}", s.eigenvalues[0]);
        assert!(close(s.eigenvalues[1], 2.043975, 3.540268), "{:?}", s.eigenvalues[1]);
        assert!((s.min_real - 1.169054).abs() < TOL);
    }

    #[test]
    fn airy_halfline_scaling() {
        // J^{2/3} = 4 for J = 8
        let s1 = halfline_airy_spectrum::<f64>(1.0, 1).unwrap();
        let s8 = halfline_airy_spectrum(8.0, 1).unwrap();
        assert!((s8.min_real - 4.0 * s1.min_real).abs() < 1e-12);
        assert!((s8.min_real - 4.676215).abs() < 1e-5);
    }

    #[test]
    fn davies_examples() {
        let s = davies_spectrum(1.0, 2).unwrap();
        assert!(close(s.eigenvalues[0], 0.707107, 0.707107));
        assert!(close(s.eigenvalues[1], 2.121320, 2.121320));
        assert!(close(s.eigenvalues[2], 3.535534, 3.535534));
        let neg = davies_spectrum(-1.0, 0).unwrap();
        assert!(close(neg.eigenvalues[0], 0.707107, -0.707107));
        let four = davies_spectrum(4.0, 0).unwrap();
        assert!(close(four.eigenvalues[0], 1.414214, 1.414214));
        assert!(davies_spectrum(0.0, 1).is_err());
    }

    #[test]
    fn davies_conjugation() {
        let plus = davies_spectrum(2.5, 4).unwrap();
        let minus = davies_spectrum(-2.5, 4).unwrap();
        for (a, b) in plus.eigenvalues.iter().zip(&minus.eigenvalues) {
            assert_eq!(a.conj(), *b);
        }
    }

    #[test]
    fn tensor_examples() {
        let s = quad_tensor_spectrum::<f64>(&[1.0, 2.0], 1).unwrap();
        assert!((s.min_real - 1.707107).abs() < TOL);
        // single lambda reduces to davies
        let t = quad_tensor_spectrum::<f64>(&[1.0], 0).unwrap();
        assert!(close(t.eigenvalues[0], 0.707107, 0.707107));
        // mixed signs: e^{i pi/4} + e^{-i pi/4} = sqrt(2)
        let m = quad_tensor_spectrum(&[1.0, -1.0], 0).unwrap();
        assert!(close(m.eigenvalues[0], 1.414214, 0.0));
        assert!(quad_tensor_spectrum(&[1.0, 0.0], 0).is_err());
    }

    #[test]
    fn tensor_reduces_to_davies() {
        let t = quad_tensor_spectrum::<f64>(&[3.7], 5).unwrap();
        let d = davies_spectrum(3.7, 5).unwrap();
        for (a, b) in t.eigenvalues.iter().zip(&d.eigenvalues) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!((t.min_real - d.min_real).abs() < 1e-14);
    }

    #[test]
    fn decay_envelope_values() {
        assert_eq!(halfplane_decay_envelope::<f64>(0.0, 2).unwrap(), 1.0);
        assert!((halfplane_decay_envelope::<f64>(1.0, 2).unwrap() - 0.920044).abs() < 1e-6);
        assert!((halfplane_decay_envelope::<f64>(1.0, 3).unwrap() - 0.846482).abs() < 1e-6);
        assert!(halfplane_decay_envelope::<f64>(-1.0, 2).is_err());
        assert!(halfplane_decay_envelope(1.0, 1).is_err());
    }

    #[test]
    fn gl_stability_examples() {
        let g = gl_stability::<f64>(None).unwrap();
        assert!(g.stable);
        let g1 = gl_stability::<f64>(Some(1.0)).unwrap();
        assert!((g1.j_c - 0.791126).abs() < 1e-5);
        assert!(g1.stable);
        let g05 = gl_stability(Some(0.5)).unwrap();
        assert!(!g05.stable);
    }
}
