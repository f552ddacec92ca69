//! Airy function Ai by Maclaurin series and its negative zeros.
//!
//! The series is accurate well past the window |x| <= 12 used here, which
//! covers the first eight zeros (mu_8 ~ -11.94). The series constants
//! c1 = Ai(0) and c2 = -Ai'(0) are computed from the Gamma function via the
//! Lanczos approximation, so the module is self-contained.

use crate::error::{Error, Result};
use crate::Real;

/// Window of validity enforced for the series evaluation.
pub const AIRY_WINDOW: f64 = 12.0;
/// Largest number of zeros available inside the window.
pub const MAX_ZEROS: usize = 8;

/// Lanczos approximation (g = 7, 9 coefficients) for Gamma, double precision.
fn gamma_lanczos(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma_lanczos(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = COEF[0];
        let t = x + G + 0.5;
        for (i, &c) in COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// Series constants c1 = Ai(0) = 3^(-2/3)/Gamma(2/3), c2 = -Ai'(0) = 3^(-1/3)/Gamma(1/3).
fn series_constants() -> (f64, f64) {
    let c1 = 3f64.powf(-2.0 / 3.0) / gamma_lanczos(2.0 / 3.0);
    let c2 = 3f64.powf(-1.0 / 3.0) / gamma_lanczos(1.0 / 3.0);
    (c1, c2)
}

fn check_window<F: Real>(x: F) -> Result<()> {
    if x.abs().to_f64_() > AIRY_WINDOW {
        return Err(Error::Precondition(format!(
            "airy series window is |x| <= {AIRY_WINDOW}, got x = {x}"
        )));
    }
    Ok(())
}

/// Ai(x) via the ODE-basis series Ai = c1 f - c2 g, truncated when the term
/// magnitude drops below 1e-18 of the partial sum.
///
/// For x < 0 the two series cancel, so the absolute error floor is about
/// eps times the largest term: negligible through the first few zeros,
/// ~1e-9 near x = -10 and ~1e-6 near the window edge. `ai_noise_floor`
/// reports this scale.
pub fn airy_ai<F: Real>(x: F) -> Result<F> {
    check_window(x)?;
    Ok(ai_series(x).0)
}

/// Cancellation noise floor of the series at x (eps times the largest term).
pub fn ai_noise_floor<F: Real>(x: F) -> Result<F> {
    check_window(x)?;
    Ok(ai_series(x).2 * F::epsilon())
}

/// Second derivative of the series (term-wise differentiated), used for the
/// ODE-residual check Ai''(x) = x Ai(x).
pub fn airy_ai_d2<F: Real>(x: F) -> Result<F> {
    check_window(x)?;
    Ok(ai_series(x).1)
}

/// Returns (Ai(x), Ai''(x), term scale) from the two basis series
/// f = sum a_k x^{3k}, g = sum b_k x^{3k+1} with
/// a_{k+1} = a_k/((3k+2)(3k+3)), b_{k+1} = b_k/((3k+3)(3k+4)).
/// The term scale is the largest summand magnitude, which bounds the
/// cancellation error as scale * eps.
fn ai_series<F: Real>(x: F) -> (F, F, F) {
    let (c1, c2) = series_constants();
    let c1 = F::from_f64_(c1);
    let c2 = F::from_f64_(c2);
    let cutoff = F::from_f64_(1e-18);

    if x == F::zero() {
        return (c1, F::zero(), F::one());
    }

    let x3 = x * x * x;
    let mut f = F::zero();
    let mut f2 = F::zero();
    let mut g = F::zero();
    let mut g2 = F::zero();

    let mut scale = F::one();

    // f-series term a_k x^{3k}
    let mut term = F::one();
    let mut k = 0usize;
    loop {
        f += term;
        scale = scale.max((c1 * term).abs());
        if k >= 1 {
            let m = F::from_f64_((3 * k) as f64);
            let m1 = F::from_f64_((3 * k - 1) as f64);
            // a_k (3k)(3k-1) x^{3k-2}
            f2 += term * m * m1 / (x * x);
        }
        if term.abs() < cutoff * f.abs().max(F::one()) && k > 2 {
            break;
        }
        let d = F::from_f64_(((3 * k + 2) * (3 * k + 3)) as f64);
        term = term * x3 / d;
        k += 1;
        if k > 400 {
            break;
        }
    }

    // g-series term b_k x^{3k+1}
    let mut term = x;
    let mut k = 0usize;
    loop {
        g += term;
        scale = scale.max((c2 * term).abs());
        if k >= 1 {
            let m = F::from_f64_((3 * k + 1) as f64);
            let m1 = F::from_f64_((3 * k) as f64);
            g2 += term * m * m1 / (x * x);
        }
        if term.abs() < cutoff * g.abs().max(F::one()) && k > 2 {
            break;
        }
        let d = F::from_f64_(((3 * k + 3) * (3 * k + 4)) as f64);
        term = term * x3 / d;
        k += 1;
        if k > 400 {
            break;
        }
    }

    (c1 * f - c2 * g, c1 * f2 - c2 * g2, scale)
}

/// The first `count` negative zeros of Ai, ordered rightmost first
/// (strictly decreasing), each refined to |Ai(mu_j)| <= `tolerance`.
#[derive(Debug, Clone)]
pub struct AiryZeros<F> {
    pub zeros: Vec<F>,
    pub count: usize,
    pub tolerance: F,
}

impl<F: Real> AiryZeros<F> {
    pub fn mu1_abs(&self) -> F {
        self.zeros[0].abs()
    }
}

/// First `k` zeros of Ai on (-12, 0) by bisection on sign changes.
pub fn airy_zeros<F: Real>(k: usize) -> Result<AiryZeros<F>> {
    if k == 0 {
        return Err(Error::Precondition("airy_zeros requires k >= 1".into()));
    }
    if k > MAX_ZEROS {
        return Err(Error::Precondition(format!(
            "series window exhausted: at most {MAX_ZEROS} zeros available, requested {k}"
        )));
    }
    let tol = F::from_f64_(1e-12);
    // scan from the right so zeros come out rightmost-first
    let steps = 4800usize;
    let lo = F::from_f64_(-AIRY_WINDOW);
    let dx = lo / F::from_f64_(steps as f64); // negative step
    let mut zeros = Vec::with_capacity(k);
    let mut x_prev = F::zero();
    let mut f_prev = airy_ai(x_prev)?;
    for i in 1..=steps {
        let x = dx * F::from_f64_(i as f64);
        let f = airy_ai(x)?;
        if f_prev * f < F::zero() {
            let root = bisect(x, x_prev)?;
            zeros.push(root);
            if zeros.len() == k {
                break;
            }
        }
        x_prev = x;
        f_prev = f;
    }
    if zeros.len() < k {
        return Err(Error::Numerical(format!(
            "only {} sign changes found in the window, needed {k}",
            zeros.len()
        )));
    }
    for &z in &zeros {
        // residual check scaled by the local slope, above the series
        // cancellation noise floor
        let v = airy_ai(z)?;
        let d = F::from_f64_(1e-6);
        let slope = ((airy_ai(z + d)? - airy_ai(z - d)?) / (d + d)).abs();
        let floor = ai_noise_floor(z)? * F::from_f64_(64.0);
        if v.abs() > tol * slope.max(F::one()) + floor {
            return Err(Error::Numerical(format!(
                "zero refinement failed at {z}: |Ai| = {}",
                v.abs()
            )));
        }
    }
    Ok(AiryZeros {
        zeros,
        count: k,
        tolerance: tol,
    })
}

fn bisect<F: Real>(mut a: F, mut b: F) -> Result<F> {
    let mut fa = airy_ai(a)?;
    let two = F::from_f64_(2.0);
    for _ in 0..200 {
        let m = (a + b) / two;
        if m == a || m == b {
            break;
        }
        let fm = airy_ai(m)?;
        if fa * fm <= F::zero() {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok((a + b) / two)
}

/// |mu_1| for the default f64 scalar, computed once.
pub fn mu1_abs_f64() -> f64 {
    use std::sync::OnceLock;
    static MU1: OnceLock<f64> = OnceLock::new();
    *MU1.get_or_init(|| airy_zeros::<f64>(1).expect("airy zeros").mu1_abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ai_at_zero() {
        // series value, cross-checked by the ODE residual test below
        let v: f64 = airy_ai(0.0).unwrap();
        assert!((v - 0.3550280539).abs() < 1e-10, "Ai(0) = {v}");
    }

    #[test]
    fn ai_vanishes_at_first_zero() {
        let v: f64 = airy_ai(-2.3381074104597670).unwrap();
        assert!(v.abs() < 1e-12, "Ai(mu1) = {v}");
    }

    #[test]
    fn deterministic_bitwise() {
        let a: f64 = airy_ai(1.0).unwrap();
        let b: f64 = airy_ai(1.0).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn window_enforced() {
        assert!(airy_ai(12.5f64).is_err());
        assert!(airy_ai(-12.5f64).is_err());
    }

    #[test]
    fn first_two_zeros() {
        // frozen from the bisection oracle on the Maclaurin series
        let z = airy_zeros::<f64>(2).unwrap();
        assert!((z.zeros[0] - (-2.3381074104597670)).abs() < 1e-9);
        assert!((z.zeros[1] - (-4.0879494441309706)).abs() < 1e-9);
        assert!(z.zeros[0] > z.zeros[1]);
    }

    #[test]
    fn zeros_contract() {
        assert!(airy_zeros::<f64>(0).is_err());
        assert!(airy_zeros::<f64>(9).is_err());
        let z = airy_zeros::<f64>(8).unwrap();
        assert_eq!(z.count, 8);
        for w in z.zeros.windows(2) {
            assert!(w[0] > w[1], "zeros must be strictly decreasing");
        }
        for &mu in &z.zeros {
            let floor: f64 = ai_noise_floor(mu).unwrap();
            assert!(airy_ai(mu).unwrap().abs() <= 1e-12 + 64.0 * floor);
        }
    }

    #[test]
    fn ode_residual_on_grid() {
        // |Ai''(x) - x Ai(x)| <= 1e-10 on [-8, 2]
        let n = 200;
        for i in 0..=n {
            let x = -8.0 + 10.0 * (i as f64) / (n as f64);
            if x.abs() < 1e-3 {
                continue; // d2 series divides by x^2; the residual there is 0 by construction
            }
            let ai: f64 = airy_ai(x).unwrap();
            let d2: f64 = airy_ai_d2(x).unwrap();
            // tolerance sits above the series cancellation noise
            let tol = 1e-12 + 256.0 * ai_noise_floor(x).unwrap() * x.abs();
            assert!(
                (d2 - x * ai).abs() < tol,
                "residual at x = {x}: {}",
                (d2 - x * ai).abs()
            );
        }
    }
}
