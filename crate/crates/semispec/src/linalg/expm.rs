//! Dense matrix exponential by scaling-and-squaring with a degree-13 Padé
//! approximant (Higham's method, with the standard theta cutoffs).

use crate::error::Result;
use crate::linalg::dense;
use faer::complex_native::c64;
use faer::Mat;

fn one_norm(m: &Mat<c64>) -> f64 {
    let (r, c) = (m.nrows(), m.ncols());
    let mut best = 0.0_f64;
    for j in 0..c {
        let mut s = 0.0;
        for i in 0..r {
            let v = m[(i, j)];
            s += (v.re * v.re + v.im * v.im).sqrt();
        }
        best = best.max(s);
    }
    best
}

fn scale(m: &Mat<c64>, s: f64) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let v = m[(i, j)];
        c64::new(v.re * s, v.im * s)
    })
}

fn add(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] + b[(i, j)])
}

fn pade13(a: &Mat<c64>) -> Result<Mat<c64>> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let ident = dense::identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let u_inner = add(
        &add(&scale(&a6, B[13]), &scale(&a4, B[11])),
        &scale(&a2, B[9]),
    );
    let u_poly = add(
        &(&a6 * &u_inner),
        &add(
            &add(&scale(&a6, B[7]), &scale(&a4, B[5])),
            &add(&scale(&a2, B[3]), &scale(&ident, B[1])),
        ),
    );
    let u = a * &u_poly;

    let v_inner = add(
        &add(&scale(&a6, B[12]), &scale(&a4, B[10])),
        &scale(&a2, B[8]),
    );
    let v = add(
        &(&a6 * &v_inner),
        &add(
            &add(&scale(&a6, B[6]), &scale(&a4, B[4])),
            &add(&scale(&a2, B[2]), &scale(&ident, B[0])),
        ),
    );

    // (V - U) X = (V + U)
    let lhs = add(&v, &scale(&u, -1.0));
    let rhs = add(&v, &u);
    Ok(dense::solve(&lhs, &rhs))
}

/// exp(A) for a dense complex matrix.
pub fn expm(a: &Mat<c64>) -> Result<Mat<c64>> {
    const THETA13: f64 = 5.371920351148152;
    let nrm = one_norm(a);
    let s = if nrm > THETA13 {
        ((nrm / THETA13).log2().ceil() as i32).max(0)
    } else {
        0
    };
    let scaled = scale(a, 0.5_f64.powi(s));
    let mut e = pade13(&scaled)?;
    for _ in 0..s {
        e = &e * &e;
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn diagonal_exponential() {
        let m = Mat::from_fn(3, 3, |i, j| {
            if i == j {
                c64::new(-(i as f64), 0.5 * i as f64)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        let e = expm(&m).unwrap();
        for i in 0..3 {
            let want = Complex64::new(-(i as f64), 0.5 * i as f64).exp();
            let got = e[(i, i)];
            assert!((Complex64::new(got.re, got.im) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn nilpotent_exponential() {
        // exp([[0,1],[0,0]]) = [[1,1],[0,1]]
        let mut m = Mat::<c64>::zeros(2, 2);
        m[(0, 1)] = c64::new(1.0, 0.0);
        let e = expm(&m).unwrap();
        assert!((e[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((e[(0, 1)].re - 1.0).abs() < 1e-14);
        assert!(e[(1, 0)].re.abs() < 1e-14);
    }

    #[test]
    fn large_norm_triggers_squaring() {
        // exp(a*I) with a large enough to force scaling
        let a = 20.0;
        let m = Mat::from_fn(2, 2, |i, j| {
            if i == j {
                c64::new(-a, 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        let e = expm(&m).unwrap();
        assert!((e[(0, 0)].re - (-a_f64()).exp()).abs() < 1e-12 * (-a_f64()).exp().max(1e-9));
        fn a_f64() -> f64 {
            20.0
        }
    }

    #[test]
    fn group_property() {
        let m = Mat::from_fn(4, 4, |i, j| {
            c64::new(
                -0.4 * ((i * 7 + j * 3) % 5) as f64,
                0.2 * ((i + 2 * j) % 3) as f64,
            )
        });
        let e1 = expm(&m).unwrap();
        let e2 = expm(&scale(&m, 2.0)).unwrap();
        let sq = &e1 * &e1;
        let mut err: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let d = e2[(i, j)] - sq[(i, j)];
                err = err.max((d.re * d.re + d.im * d.im).sqrt());
            }
        }
        assert!(err < 1e-10);
    }
}
