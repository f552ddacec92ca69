//! Finite-difference assembly of -h^2 Laplacian + iV with Dirichlet
//! conditions on intervals and rectangles, plus the truncated model
//! operators (half-line Airy, Davies oscillator, tilted half-plane).
//!
//! All matrices have the structure L + iD with L the real symmetric
//! positive-definite scaled Dirichlet Laplacian (second-order central
//! differences) and D the real diagonal of potential values. 2D nodes are
//! ordered row-major: node (ix, iy) maps to index iy*nx + ix, ix fastest.

use crate::error::{Error, Result};
use crate::potentials::PotentialProfile;
use crate::sparse::CsrMatrix;
use crate::{Domain, Real};
use num_complex::Complex;

/// Uniform interior grid over the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<F> {
    pub dim: usize,
    /// per axis: (lo, hi, interior point count, spacing)
    pub axes: Vec<(F, F, usize, F)>,
}

impl<F: Real> Grid<F> {
    pub fn new(domain: &Domain<F>, n_per_axis: &[usize]) -> Self {
        let axes = domain
            .axes()
            .into_iter()
            .zip(n_per_axis)
            .map(|((lo, hi), &n)| {
                let delta = (hi - lo) / F::from_f64_((n + 1) as f64);
                (lo, hi, n, delta)
            })
            .collect();
        Self {
            dim: domain.dim(),
            axes,
        }
    }

    /// Total interior node count.
    pub fn total(&self) -> usize {
        self.axes.iter().map(|&(_, _, n, _)| n).product()
    }

    /// Coordinates of interior node `idx` (row-major in 2D).
    pub fn node(&self, idx: usize) -> [F; 2] {
        match self.dim {
            1 => {
                let (lo, _, _, d) = self.axes[0];
                [lo + d * F::from_f64_((idx + 1) as f64), F::zero()]
            }
            _ => {
                let nx = self.axes[0].2;
                let (ix, iy) = (idx % nx, idx / nx);
                let (lx, _, _, dx) = self.axes[0];
                let (ly, _, _, dy) = self.axes[1];
                [
                    lx + dx * F::from_f64_((ix + 1) as f64),
                    ly + dy * F::from_f64_((iy + 1) as f64),
                ]
            }
        }
    }

    pub fn id(&self) -> String {
        let ns: Vec<String> = self.axes.iter().map(|a| a.2.to_string()).collect();
        format!("grid{}d-n{}", self.dim, ns.join("x"))
    }
}

/// Spatial-resolution regime for grid selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolutionRegime {
    /// Boundary layer of width h^{2/3}.
    Airy,
    /// Well scale h^{1/2}.
    Morse,
    /// Model operators at h = 1 (unit scale).
    Model,
}

#[derive(Debug, Clone, Copy)]
pub struct ResolutionRule {
    pub regime: ResolutionRegime,
    pub points_per_scale: f64,
}

impl ResolutionRule {
    pub fn new(regime: ResolutionRegime, points_per_scale: f64) -> Self {
        Self {
            regime,
            points_per_scale,
        }
    }

    pub fn airy() -> Self {
        Self::new(ResolutionRegime::Airy, 10.0)
    }

    pub fn morse() -> Self {
        Self::new(ResolutionRegime::Morse, 10.0)
    }

    fn max_spacing(&self, h: f64) -> f64 {
        let scale = match self.regime {
            ResolutionRegime::Airy => h.powf(2.0 / 3.0),
            ResolutionRegime::Morse => h.sqrt(),
            ResolutionRegime::Model => 1.0,
        };
        scale / self.points_per_scale
    }
}

/// Grid caps; defaults are desk-scale.
#[derive(Debug, Clone, Copy)]
pub struct GridCaps {
    pub n_max_1d: usize,
    pub n_max_2d_per_axis: usize,
}

impl Default for GridCaps {
    fn default() -> Self {
        Self {
            n_max_1d: 4000,
            n_max_2d_per_axis: 250,
        }
    }
}

/// Choose the coarsest grid meeting the regime's spacing bound, or report
/// the smallest feasible h when the cap is exceeded.
pub fn grid_for<F: Real>(
    h: f64,
    domain: &Domain<F>,
    rule: &ResolutionRule,
    caps: &GridCaps,
) -> Result<Grid<F>> {
    if h <= 0.0 {
        return Err(Error::Precondition("h must be > 0".into()));
    }
    let dmax = rule.max_spacing(h);
    let mut ns = Vec::new();
    let cap = match domain.dim() {
        1 => caps.n_max_1d,
        _ => caps.n_max_2d_per_axis,
    };
    for (lo, hi) in domain.axes() {
        let len = (hi - lo).to_f64_();
        let n = (len / dmax - 1.0).ceil().max(1.0) as usize;
        if n > cap {
            // smallest feasible h: len/(Delta(h)) - 1 <= cap
            let target = len / (cap as f64 + 1.0) * rule.points_per_scale;
            let min_h = match rule.regime {
                ResolutionRegime::Airy => target.powf(1.5),
                ResolutionRegime::Morse => target * target,
                ResolutionRegime::Model => 1.0,
            };
            return Err(Error::InfeasibleResolution {
                requested: n,
                cap,
                min_h,
            });
        }
        ns.push(n);
    }
    Ok(Grid::new(domain, &ns))
}

/// Assembled sparse operator L + iD with its grid metadata.
#[derive(Debug, Clone)]
pub struct AssembledOperator<F> {
    pub matrix: CsrMatrix<F>,
    pub grid: Grid<F>,
    pub h: F,
    pub potential_tag: String,
    pub model_tag: Option<String>,
    /// Potential values at the grid nodes (the diagonal D).
    pub v_diag: Vec<F>,
}

impl<F: Real> AssembledOperator<F> {
    pub fn size(&self) -> usize {
        self.matrix.n
    }

    /// The real symmetric part L recovered from the assembled matrix.
    pub fn laplacian_part(&self) -> CsrMatrix<F> {
        let mut m = self.matrix.clone();
        for v in &mut m.values {
            *v = Complex::new(v.re, F::zero());
        }
        m
    }

    pub fn v_min_max(&self) -> (F, F) {
        let mut lo = F::infinity();
        let mut hi = F::neg_infinity();
        for &v in &self.v_diag {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

fn potential_at_nodes<F: Real>(grid: &Grid<F>, profile: &PotentialProfile<F>) -> Vec<F> {
    (0..grid.total())
        .map(|i| profile.value(grid.node(i)))
        .collect()
}

/// 1D assembly: diagonal 2h^2/D^2 + iV(x_j), off-diagonal -h^2/D^2.
pub fn assemble_interval<F: Real>(
    grid: &Grid<F>,
    profile: &PotentialProfile<F>,
    h: F,
) -> Result<AssembledOperator<F>> {
    if grid.dim != 1 {
        return Err(Error::Precondition("assemble_interval needs a 1D grid".into()));
    }
    let v = potential_at_nodes(grid, profile);
    let op = assemble_1d_with_potential(grid, &v, h, format!("{}", profile.expr), None);
    Ok(op)
}

fn assemble_1d_with_potential<F: Real>(
    grid: &Grid<F>,
    v: &[F],
    h: F,
    potential_tag: String,
    model_tag: Option<String>,
) -> AssembledOperator<F> {
    let n = grid.axes[0].2;
    let delta = grid.axes[0].3;
    let w = h * h / (delta * delta);
    let two = F::from_f64_(2.0);
    let mut triplets = Vec::with_capacity(3 * n);
    for j in 0..n {
        triplets.push((j, j, Complex::new(two * w, v[j])));
        if j + 1 < n {
            triplets.push((j, j + 1, Complex::new(-w, F::zero())));
            triplets.push((j + 1, j, Complex::new(-w, F::zero())));
        }
    }
    AssembledOperator {
        matrix: CsrMatrix::from_triplets(n, triplets),
        grid: grid.clone(),
        h,
        potential_tag,
        model_tag,
        v_diag: v.to_vec(),
    }
}

/// 2D assembly: 5-point Laplacian scaled by h^2, Dirichlet eliminated,
/// +iV(node) on the diagonal, row-major node ordering.
pub fn assemble_rectangle<F: Real>(
    grid: &Grid<F>,
    profile: &PotentialProfile<F>,
    h: F,
) -> Result<AssembledOperator<F>> {
    if grid.dim != 2 {
        return Err(Error::Precondition("assemble_rectangle needs a 2D grid".into()));
    }
    let v = potential_at_nodes(grid, profile);
    Ok(assemble_2d_with_potential(
        grid,
        &v,
        h,
        format!("{}", profile.expr),
        None,
    ))
}

fn assemble_2d_with_potential<F: Real>(
    grid: &Grid<F>,
    v: &[F],
    h: F,
    potential_tag: String,
    model_tag: Option<String>,
) -> AssembledOperator<F> {
    let nx = grid.axes[0].2;
    let ny = grid.axes[1].2;
    let dx = grid.axes[0].3;
    let dy = grid.axes[1].3;
    let wx = h * h / (dx * dx);
    let wy = h * h / (dy * dy);
    let two = F::from_f64_(2.0);
    let n = nx * ny;
    let mut triplets = Vec::with_capacity(5 * n);
    for iy in 0..ny {
        for ix in 0..nx {
            let idx = iy * nx + ix;
            triplets.push((idx, idx, Complex::new(two * (wx + wy), v[idx])));
            if ix + 1 < nx {
                triplets.push((idx, idx + 1, Complex::new(-wx, F::zero())));
                triplets.push((idx + 1, idx, Complex::new(-wx, F::zero())));
            }
            if iy + 1 < ny {
                triplets.push((idx, idx + nx, Complex::new(-wy, F::zero())));
                triplets.push((idx + nx, idx, Complex::new(-wy, F::zero())));
            }
        }
    }
    AssembledOperator {
        matrix: CsrMatrix::from_triplets(n, triplets),
        grid: grid.clone(),
        h,
        potential_tag,
        model_tag,
        v_diag: v.to_vec(),
    }
}

/// Truncated model operators at h = 1.
#[derive(Debug, Clone, Copy)]
pub enum ModelKind<F> {
    /// -d^2/dx^2 + iJx on (0, L), Dirichlet both ends.
    HalfLineAiry { j_current: F, length: F },
    /// -d^2/dx^2 + i alpha x^2 on (-L, L).
    Oscillator { alpha: F, length: F },
    /// -Delta + iJ(sin(theta) x1 + cos(theta) x2) on (-Lx/2, Lx/2) x (0, Ly).
    HalfPlane { j_current: F, theta: F, lx: F, ly: F },
}

pub fn assemble_model<F: Real>(kind: ModelKind<F>, n_per_axis: &[usize]) -> Result<AssembledOperator<F>> {
    let one = F::one();
    match kind {
        ModelKind::HalfLineAiry { j_current, length } => {
            if length <= F::zero() {
                return Err(Error::Precondition("truncation length must be > 0".into()));
            }
            let domain = Domain::Interval {
                a: F::zero(),
                b: length,
            };
            let grid = Grid::new(&domain, &n_per_axis[..1]);
            let v: Vec<F> = (0..grid.total())
                .map(|i| j_current * grid.node(i)[0])
                .collect();
            Ok(assemble_1d_with_potential(
                &grid,
                &v,
                one,
                format!("{j_current}*x"),
                Some(format!("halfline-airy(J={j_current},L={length})")),
            ))
        }
        ModelKind::Oscillator { alpha, length } => {
            if length <= F::zero() {
                return Err(Error::Precondition("truncation length must be > 0".into()));
            }
            let domain = Domain::Interval {
                a: -length,
                b: length,
            };
            let grid = Grid::new(&domain, &n_per_axis[..1]);
            let v: Vec<F> = (0..grid.total())
                .map(|i| {
                    let x = grid.node(i)[0];
                    alpha * x * x
                })
                .collect();
            Ok(assemble_1d_with_potential(
                &grid,
                &v,
                one,
                format!("{alpha}*x^2"),
                Some(format!("oscillator(alpha={alpha},L={length})")),
            ))
        }
        ModelKind::HalfPlane {
            j_current,
            theta,
            lx,
            ly,
        } => {
            if lx <= F::zero() || ly <= F::zero() {
                return Err(Error::Precondition("truncation lengths must be > 0".into()));
            }
            let two = F::from_f64_(2.0);
            let domain = Domain::Rectangle {
                x: (-lx / two, lx / two),
                y: (F::zero(), ly),
            };
            let grid = Grid::new(&domain, &n_per_axis[..2]);
            let (s, c) = (theta.sin(), theta.cos());
            let v: Vec<F> = (0..grid.total())
                .map(|i| {
                    let p = grid.node(i);
                    j_current * (s * p[0] + c * p[1])
                })
                .collect();
            Ok(assemble_2d_with_potential(
                &grid,
                &v,
                one,
                format!("{j_current}*(sin(theta)x + cos(theta)y)"),
                Some(format!("halfplane(J={j_current},theta={theta})")),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn profile(s: &str, dim: usize) -> PotentialProfile<f64> {
        PotentialProfile::parse(s, dim).unwrap()
    }

    #[test]
    fn grid_for_airy_example() {
        let d = Domain::Interval { a: 0.0, b: 1.0 };
        let g = grid_for(0.01, &d, &ResolutionRule::airy(), &GridCaps::default()).unwrap();
        let n = g.axes[0].2;
        assert!(n >= 215, "n = {n}");
        assert!(g.axes[0].3 <= 0.00464);
    }

    #[test]
    fn grid_for_morse_example() {
        let d = Domain::Interval { a: -1.0, b: 2.0 };
        let g = grid_for(0.01, &d, &ResolutionRule::morse(), &GridCaps::default()).unwrap();
        assert!(g.axes[0].2 >= 299);
        assert!(g.axes[0].3 <= 0.01 + 1e-12);
    }

    #[test]
    fn grid_for_infeasible_names_min_h() {
        let d = Domain::Interval { a: 0.0, b: 1.0 };
        let err = grid_for(1e-6, &d, &ResolutionRule::airy(), &GridCaps::default()).unwrap_err();
        match err {
            Error::InfeasibleResolution { cap, min_h, .. } => {
                assert_eq!(cap, 4000);
                assert!(min_h > 1e-6);
                // the named h must itself be feasible
                assert!(grid_for(min_h * 1.01, &d, &ResolutionRule::airy(), &GridCaps::default()).is_ok());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn interval_stencil_exact() {
        // n=2, h=1, Delta=1/3, V=0 -> [[18,-9],[-9,18]]
        let d = Domain::Interval { a: 0.0, b: 1.0 };
        let g = Grid::new(&d, &[2]);
        let p = profile("0", 1);
        let op = assemble_interval(&g, &p, 1.0).unwrap();
        assert_eq!(op.matrix.get(0, 0), C::new(18.0, 0.0));
        assert_eq!(op.matrix.get(0, 1), C::new(-9.0, 0.0));
        assert_eq!(op.matrix.get(1, 0), C::new(-9.0, 0.0));
        assert_eq!(op.matrix.get(1, 1), C::new(18.0, 0.0));
    }

    #[test]
    fn constant_shift_is_ic_identity() {
        let d = Domain::Interval { a: 0.0, b: 1.0 };
        let g = Grid::new(&d, &[5]);
        let h = 0.3;
        let a = assemble_interval(&g, &profile("x^2", 1), h).unwrap();
        let b = assemble_interval(&g, &profile("x^2 + 2", 1), h).unwrap();
        for r in 0..5 {
            for c in 0..5 {
                let diff = b.matrix.get(r, c) - a.matrix.get(r, c);
                if r == c {
                    assert!((diff - C::new(0.0, 2.0)).norm() < 1e-14);
                } else {
                    assert_eq!(diff, C::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn node_values_on_diagonal() {
        let d = Domain::Interval { a: 0.0, b: 1.0 };
        let g = Grid::new(&d, &[3]);
        let op = assemble_interval(&g, &profile("x", 1), 1.0).unwrap();
        let ims: Vec<f64> = (0..3).map(|j| op.matrix.get(j, j).im).collect();
        assert!((ims[0] - 0.25).abs() < 1e-15);
        assert!((ims[1] - 0.50).abs() < 1e-15);
        assert!((ims[2] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn rectangle_single_node() {
        let d = Domain::Rectangle {
            x: (0.0, 1.0),
            y: (0.0, 1.0),
        };
        let g = Grid::new(&d, &[1, 1]);
        let op = assemble_rectangle(&g, &profile("0", 2), 1.0).unwrap();
        // 2/Dx^2 + 2/Dy^2 with Dx = Dy = 1/2
        assert_eq!(op.matrix.get(0, 0), C::new(16.0, 0.0));
    }

    #[test]
    fn rectangle_reflection_symmetry() {
        // even potential: D invariant under x -> -x reflection
        let d = Domain::Rectangle {
            x: (-1.0, 1.0),
            y: (-1.0, 1.0),
        };
        let g = Grid::new(&d, &[7, 5]);
        let op = assemble_rectangle(&g, &profile("x^2 + 2*y^2", 2), 0.1).unwrap();
        let nx = 7;
        for iy in 0..5 {
            for ix in 0..7 {
                let a = op.v_diag[iy * nx + ix];
                let b = op.v_diag[iy * nx + (6 - ix)];
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn conjugation_of_negated_potential() {
        let d = Domain::Interval { a: 0.0, b: 1.0 };
        let g = Grid::new(&d, &[9]);
        let a = assemble_interval(&g, &profile("x", 1), 0.5).unwrap();
        let b = assemble_interval(&g, &profile("-x", 1), 0.5).unwrap();
        for (va, vb) in a.matrix.values.iter().zip(&b.matrix.values) {
            assert_eq!(va.conj(), *vb);
        }
    }

    #[test]
    fn laplacian_part_is_real_symmetric_positive() {
        let d = Domain::Interval { a: 0.0, b: 1.0 };
        let g = Grid::new(&d, &[12]);
        let op = assemble_interval(&g, &profile("x", 1), 0.2).unwrap();
        let l = op.laplacian_part();
        for r in 0..l.n {
            let (cols, vals) = l.row(r);
            let mut offdiag = 0.0;
            let mut diag = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                assert_eq!(v.im, 0.0);
                assert!((l.get(*c, r) - v).norm() < 1e-15, "symmetry");
                if *c == r {
                    diag = v.re;
                } else {
                    offdiag += v.re.abs();
                }
            }
            assert!(diag >= offdiag, "diagonal dominance");
        }
    }

    #[test]
    fn halfplane_potential_centering() {
        let op = assemble_model(
            ModelKind::HalfPlane {
                j_current: 1.0,
                theta: 0.0,
                lx: 4.0,
                ly: 4.0,
            },
            &[3, 3],
        )
        .unwrap();
        // theta = 0: potential depends on x2 only -> repeated along x1
        for iy in 0..3 {
            let base: f64 = op.v_diag[iy * 3];
            for ix in 1..3 {
                assert!((op.v_diag[iy * 3 + ix] - base).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn coordinate_dump_header() {
        let d = Domain::Interval { a: 0.0, b: 1.0 };
        let g = Grid::new(&d, &[2]);
        let op = assemble_interval(&g, &profile("x", 1), 1.0).unwrap();
        let mut buf = Vec::new();
        op.matrix.write_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("%%MatrixMarket"));
        assert!(text.lines().count() == 2 + op.matrix.nnz());
    }
}
