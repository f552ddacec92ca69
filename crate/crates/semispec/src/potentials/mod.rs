//! Potential profiles: exact symbolic gradients and Hessians, critical-point
//! location and classification, boundary data J / J_m, and the predicted
//! spectral asymptote for a problem instance.

pub mod expr;

use crate::error::{Error, Result};
use crate::models::airy::airy_zeros;
use crate::{Domain, Real};
use expr::{Axis, PotentialExpr};

/// Relative tolerance below which a Hessian eigenvalue marks a critical point
/// degenerate.
const DEGENERACY_REL_TOL: f64 = 1e-8;
/// Newton root merge radius, relative to the domain diameter.
const MERGE_REL_RADIUS: f64 = 1e-6;
/// Critical points within this fraction of the diameter of the boundary
/// invalidate the Morse regime.
const BOUNDARY_REL_MARGIN: f64 = 1e-3;
/// Relative tolerance for the perpendicular / parallel edge classification.
const EDGE_CLASS_REL_TOL: f64 = 1e-6;

/// Potential with its exact symbolic gradient and (symmetric) Hessian.
#[derive(Debug, Clone)]
pub struct PotentialProfile<F> {
    pub expr: PotentialExpr<F>,
    pub dim: usize,
    pub grad: Vec<PotentialExpr<F>>,
    pub hess: Vec<Vec<PotentialExpr<F>>>,
}

impl<F: Real> PotentialProfile<F> {
    pub fn new(expr: PotentialExpr<F>) -> Result<Self> {
        let dim = expr.dim;
        let axes = if dim == 1 {
            vec![Axis::X]
        } else {
            vec![Axis::X, Axis::Y]
        };
        let grad: Vec<_> = axes
            .iter()
            .map(|&a| expr.differentiate(a))
            .collect::<Result<_>>()?;
        let mut hess = Vec::with_capacity(dim);
        for gi in &grad {
            let row: Vec<_> = axes
                .iter()
                .map(|&a| gi.differentiate(a))
                .collect::<Result<_>>()?;
            hess.push(row);
        }
        Ok(Self {
            expr,
            dim,
            grad,
            hess,
        })
    }

    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        Self::new(PotentialExpr::parse(text, dim)?)
    }

    pub fn value(&self, p: [F; 2]) -> F {
        self.expr.eval(p)
    }

    pub fn gradient(&self, p: [F; 2]) -> Vec<F> {
        self.grad.iter().map(|g| g.eval(p)).collect()
    }

    pub fn grad_norm(&self, p: [F; 2]) -> F {
        self.gradient(p)
            .iter()
            .fold(F::zero(), |acc, &g| acc + g * g)
            .sqrt()
    }

    pub fn hessian(&self, p: [F; 2]) -> Vec<Vec<F>> {
        self.hess
            .iter()
            .map(|row| row.iter().map(|e| e.eval(p)).collect())
            .collect()
    }

    /// Eigenvalues of the (symmetric) Hessian at `p`.
    pub fn hessian_eigenvalues(&self, p: [F; 2]) -> Vec<F> {
        let h = self.hessian(p);
        if self.dim == 1 {
            vec![h[0][0]]
        } else {
            let (a, b, c) = (h[0][0], h[0][1], h[1][1]);
            let two = F::from_f64_(2.0);
            let mean = (a + c) / two;
            let disc = ((a - c) / two * ((a - c) / two) + b * b).sqrt();
            vec![mean - disc, mean + disc]
        }
    }
}

/// kappa = sum_j sqrt(|lambda_j|) over the Hessian eigenvalues.
pub fn kappa_of<F: Real>(hess_eigenvalues: &[F]) -> Result<F> {
    if hess_eigenvalues.is_empty() {
        return Err(Error::Precondition("kappa_of needs a nonempty list".into()));
    }
    Ok(hess_eigenvalues
        .iter()
        .fold(F::zero(), |acc, &l| acc + l.abs().sqrt()))
}

#[derive(Debug, Clone)]
pub struct CriticalPoint<F> {
    pub location: [F; 2],
    pub hess_eigenvalues: Vec<F>,
    pub kappa: F,
    pub level: F,
    pub degenerate: bool,
}

/// Result of the multi-start Newton search: interior roots, roots within the
/// boundary margin (reported separately), and seed cells where a sign change
/// of the gradient was detected but no root converged.
#[derive(Debug, Clone)]
pub struct CriticalSearch<F> {
    pub interior: Vec<CriticalPoint<F>>,
    pub boundary_warnings: Vec<CriticalPoint<F>>,
    pub flagged_cells: Vec<[F; 2]>,
}

/// Newton iteration on grad V = 0 from a uniform seed grid; converged roots
/// are deduplicated within the merge radius and annotated with Hessian data.
pub fn find_critical_points<F: Real>(
    profile: &PotentialProfile<F>,
    domain: &Domain<F>,
    seeds_per_axis: usize,
) -> Result<CriticalSearch<F>> {
    if seeds_per_axis < 8 {
        return Err(Error::Precondition("seeds_per_axis must be >= 8".into()));
    }
    if profile.dim != domain.dim() {
        return Err(Error::Precondition(format!(
            "profile dim {} does not match domain dim {}",
            profile.dim,
            domain.dim()
        )));
    }
    let diameter = domain.diameter();
    let merge_radius = F::from_f64_(MERGE_REL_RADIUS) * diameter;
    let boundary_margin = F::from_f64_(BOUNDARY_REL_MARGIN) * diameter;
    let axes = domain.axes();

    let seeds = seed_grid(&axes, seeds_per_axis);
    // characteristic curvature of V over the domain, for the degeneracy test
    let mut curv_scale = F::zero();
    for seed in &seeds {
        let h = profile.hessian(*seed);
        for row in &h {
            for e in row {
                curv_scale = curv_scale.max(e.abs());
            }
        }
    }
    let mut roots: Vec<[F; 2]> = Vec::new();
    for seed in &seeds {
        if let Some(root) = newton(profile, *seed, diameter) {
            // keep roots in the closed domain (with a whisker for boundary detection)
            let inside = match *domain {
                Domain::Interval { a, b } => {
                    root[0] >= a - merge_radius && root[0] <= b + merge_radius
                }
                Domain::Rectangle { x, y } => {
                    root[0] >= x.0 - merge_radius
                        && root[0] <= x.1 + merge_radius
                        && root[1] >= y.0 - merge_radius
                        && root[1] <= y.1 + merge_radius
                }
            };
            if !inside {
                continue;
            }
            if !roots.iter().any(|r| dist(*r, root) < merge_radius) {
                roots.push(root);
            }
        }
    }
    roots.sort_by(|a, b| {
        (a[0], a[1])
            .partial_cmp(&(b[0], b[1]))
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut interior = Vec::new();
    let mut boundary_warnings = Vec::new();
    for root in roots {
        let eigs = profile.hessian_eigenvalues(root);
        let hess_scale = eigs
            .iter()
            .fold(F::zero(), |acc, &l| acc.max(l.abs()));
        let degenerate = eigs
            .iter()
            .any(|&l| l.abs() < F::from_f64_(DEGENERACY_REL_TOL) * hess_scale.max(curv_scale))
            || hess_scale == F::zero();
        let cp = CriticalPoint {
            location: root,
            kappa: kappa_of(&eigs)?,
            hess_eigenvalues: eigs,
            level: profile.value(root),
            degenerate,
        };
        if domain.boundary_distance(root) <= boundary_margin {
            boundary_warnings.push(cp);
        } else {
            interior.push(cp);
        }
    }

    let flagged_cells = flag_cells(profile, &axes, seeds_per_axis, &interior, &boundary_warnings);

    Ok(CriticalSearch {
        interior,
        boundary_warnings,
        flagged_cells,
    })
}

fn seed_grid<F: Real>(axes: &[(F, F)], n: usize) -> Vec<[F; 2]> {
    let ticks = |lo: F, hi: F| -> Vec<F> {
        (0..n)
            .map(|i| {
                let t = F::from_f64_((i as f64 + 0.5) / n as f64);
                lo + (hi - lo) * t
            })
            .collect()
    };
    match axes.len() {
        1 => ticks(axes[0].0, axes[0].1)
            .into_iter()
            .map(|x| [x, F::zero()])
            .collect(),
        _ => {
            let xs = ticks(axes[0].0, axes[0].1);
            let ys = ticks(axes[1].0, axes[1].1);
            let mut out = Vec::with_capacity(n * n);
            for &y in &ys {
                for &x in &xs {
                    out.push([x, y]);
                }
            }
            out
        }
    }
}

fn dist<F: Real>(a: [F; 2], b: [F; 2]) -> F {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Newton on grad V = 0; returns the converged root or None.
fn newton<F: Real>(profile: &PotentialProfile<F>, seed: [F; 2], diameter: F) -> Option<[F; 2]> {
    let mut p = seed;
    let tol = F::from_f64_(1e-13) * (F::one() + diameter);
    for _ in 0..80 {
        let g = profile.gradient(p);
        let h = profile.hessian(p);
        // A singular Hessian with a tiny gradient is a (degenerate) critical
        // point candidate; accept it so the caller can reject the regime.
        let gn0 = g.iter().fold(F::zero(), |a, v| a + v.abs());
        let near_root = gn0 <= F::from_f64_(1e-10) * (F::one() + diameter);
        let step = if profile.dim == 1 {
            if h[0][0].abs() <= F::epsilon() * (F::one() + g[0].abs()) {
                return if near_root { Some(p) } else { None };
            }
            [g[0] / h[0][0], F::zero()]
        } else {
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            if det.abs() <= F::epsilon() * (F::one() + g[0].abs() + g[1].abs()) {
                return if near_root { Some(p) } else { None };
            }
            [
                (h[1][1] * g[0] - h[0][1] * g[1]) / det,
                (h[0][0] * g[1] - h[1][0] * g[0]) / det,
            ]
        };
        p = [p[0] - step[0], p[1] - step[1]];
        if !p[0].is_finite() || !p[1].is_finite() {
            return None;
        }
        // diverged far outside: give up on this seed
        if p[0].abs() + p[1].abs() > F::from_f64_(1e6) * (F::one() + diameter) {
            return None;
        }
        if step[0].abs() + step[1].abs() < tol {
            let gn = profile.grad_norm(p);
            let hs = profile
                .hessian_eigenvalues(p)
                .iter()
                .fold(F::zero(), |a, &l| a.max(l.abs()));
            let loc = p[0].abs() + p[1].abs();
            if gn <= F::from_f64_(1e-10) * (F::one() + hs * loc) {
                return Some(p);
            }
        }
    }
    None
}

/// Cells of the seed grid where some gradient component changes sign but no
/// converged root lies inside: reported, never silently dropped.
fn flag_cells<F: Real>(
    profile: &PotentialProfile<F>,
    axes: &[(F, F)],
    n: usize,
    interior: &[CriticalPoint<F>],
    boundary: &[CriticalPoint<F>],
) -> Vec<[F; 2]> {
    let mut flagged = Vec::new();
    let tick = |lo: F, hi: F, i: usize| lo + (hi - lo) * F::from_f64_(i as f64 / n as f64);
    let has_root_near = |center: [F; 2], radius: F| {
        interior
            .iter()
            .chain(boundary.iter())
            .any(|cp| dist(cp.location, center) <= radius)
    };
    if axes.len() == 1 {
        let (a, b) = axes[0];
        let cell = (b - a) / F::from_f64_(n as f64);
        for i in 0..n {
            let x0 = tick(a, b, i);
            let x1 = tick(a, b, i + 1);
            let g0 = profile.gradient([x0, F::zero()])[0];
            let g1 = profile.gradient([x1, F::zero()])[0];
            if g0 * g1 < F::zero() {
                let center = [(x0 + x1) / F::from_f64_(2.0), F::zero()];
                if !has_root_near(center, cell) {
                    flagged.push(center);
                }
            }
        }
    } else {
        let (ax, bx) = axes[0];
        let (ay, by) = axes[1];
        let cell = ((bx - ax) / F::from_f64_(n as f64)).max((by - ay) / F::from_f64_(n as f64));
        for j in 0..n {
            for i in 0..n {
                let corners = [
                    [tick(ax, bx, i), tick(ay, by, j)],
                    [tick(ax, bx, i + 1), tick(ay, by, j)],
                    [tick(ax, bx, i), tick(ay, by, j + 1)],
                    [tick(ax, bx, i + 1), tick(ay, by, j + 1)],
                ];
                let mut change = [false, false];
                for axis in 0..2 {
                    let vals: Vec<F> = corners
                        .iter()
                        .map(|&c| profile.gradient(c)[axis])
                        .collect();
                    let pos = vals.iter().any(|&v| v > F::zero());
                    let neg = vals.iter().any(|&v| v < F::zero());
                    change[axis] = pos && neg;
                }
                if change[0] && change[1] {
                    let center = [
                        (corners[0][0] + corners[3][0]) / F::from_f64_(2.0),
                        (corners[0][1] + corners[3][1]) / F::from_f64_(2.0),
                    ];
                    if !has_root_near(center, cell) {
                        flagged.push(center);
                    }
                }
            }
        }
    }
    flagged
}

// ---------------------------------------------------------------------------
// boundary data

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeClass {
    Perpendicular,
    Parallel,
    Oblique,
}

#[derive(Debug, Clone)]
pub struct EdgeSample<F> {
    pub point: [F; 2],
    pub grad: [F; 2],
    pub grad_norm: F,
    pub class: EdgeClass,
}

#[derive(Debug, Clone)]
pub enum BoundaryData<F> {
    Interval {
        grad_left: F,
        grad_right: F,
        j: F,
    },
    Rectangle {
        samples: Vec<EdgeSample<F>>,
        j_m: Option<F>,
    },
}

impl<F: Real> BoundaryData<F> {
    pub fn j_value(&self) -> Option<F> {
        match self {
            BoundaryData::Interval { j, .. } => Some(*j),
            BoundaryData::Rectangle { j_m, .. } => *j_m,
        }
    }
}

/// Boundary current data: in 1D, J = min(|V'(a)|, |V'(b)|); on a rectangle,
/// per-edge-sample classification against the relative tolerance and
/// J_m = min |grad V| over the perpendicular samples.
pub fn boundary_data<F: Real>(
    profile: &PotentialProfile<F>,
    domain: &Domain<F>,
    samples_per_edge: usize,
) -> Result<BoundaryData<F>> {
    match *domain {
        Domain::Interval { a, b } => {
            let ga = profile.gradient([a, F::zero()])[0].abs();
            let gb = profile.gradient([b, F::zero()])[0].abs();
            let j = ga.min(gb);
            let scale = F::one() + ga.max(gb);
            if j <= F::from_f64_(1e-10) * scale {
                return Err(Error::Regime(format!(
                    "J = {j} is below the positivity tolerance: critical point on or near the boundary"
                )));
            }
            Ok(BoundaryData::Interval {
                grad_left: ga,
                grad_right: gb,
                j,
            })
        }
        Domain::Rectangle { x, y } => {
            if profile.dim != 2 {
                return Err(Error::Precondition(
                    "rectangle boundary data needs a 2D profile".into(),
                ));
            }
            let m = samples_per_edge.max(2);
            let mut samples = Vec::with_capacity(4 * m);
            // edges with outward normals: left (-1,0), right (1,0), bottom (0,-1), top (0,1)
            let edges: [([F; 2], [F; 2], [F; 2]); 4] = [
                ([x.0, y.0], [F::zero(), y.1 - y.0], [-F::one(), F::zero()]),
                ([x.1, y.0], [F::zero(), y.1 - y.0], [F::one(), F::zero()]),
                ([x.0, y.0], [x.1 - x.0, F::zero()], [F::zero(), -F::one()]),
                ([x.0, y.1], [x.1 - x.0, F::zero()], [F::zero(), F::one()]),
            ];
            let tol = F::from_f64_(EDGE_CLASS_REL_TOL);
            for (origin, dir, normal) in edges {
                for i in 0..m {
                    let t = F::from_f64_((i as f64 + 0.5) / m as f64);
                    let p = [origin[0] + dir[0] * t, origin[1] + dir[1] * t];
                    let g = profile.gradient(p);
                    let gnorm = (g[0] * g[0] + g[1] * g[1]).sqrt();
                    if gnorm == F::zero() {
                        return Err(Error::Regime(format!(
                            "gradient vanishes on the boundary at ({}, {})",
                            p[0], p[1]
                        )));
                    }
                    let normal_c = (g[0] * normal[0] + g[1] * normal[1]).abs();
                    let tangent_c = (g[0] * normal[1] - g[1] * normal[0]).abs();
                    let class = if tangent_c <= tol * gnorm {
                        EdgeClass::Perpendicular
                    } else if normal_c <= tol * gnorm {
                        EdgeClass::Parallel
                    } else {
                        EdgeClass::Oblique
                    };
                    samples.push(EdgeSample {
                        point: p,
                        grad: [g[0], g[1]],
                        grad_norm: gnorm,
                        class,
                    });
                }
            }
            let j_m = samples
                .iter()
                .filter(|s| s.class == EdgeClass::Perpendicular)
                .map(|s| s.grad_norm)
                .fold(None, |acc: Option<F>, v| {
                    Some(acc.map_or(v, |a| a.min(v)))
                });
            Ok(BoundaryData::Rectangle { samples, j_m })
        }
    }
}

// ---------------------------------------------------------------------------
// predicted asymptote

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    NoCriticalPoint,
    Morse,
}

/// Theoretical limit of (1/h^exponent) inf Re sigma(A_h) for the instance.
#[derive(Debug, Clone)]
pub struct PredictedAsymptote<F> {
    pub regime: Regime,
    /// 2/3 in the no-critical-point regime, 1 in the Morse regime.
    pub h_exponent: F,
    pub prefactor: F,
    /// V at the dominant critical point (Morse regime only).
    pub imag_center: Option<F>,
    /// Set in 2D no-critical-point instances, where the theory gives only a
    /// lower bound.
    pub lower_bound_only: bool,
    /// Two kappa-minimizing critical points share a level within tolerance.
    pub resonance_warning: bool,
}

pub fn predicted_limit<F: Real>(
    profile: &PotentialProfile<F>,
    domain: &Domain<F>,
) -> Result<PredictedAsymptote<F>> {
    let search = find_critical_points(profile, domain, 16)?;
    if let Some(cp) = search.boundary_warnings.first() {
        return Err(Error::Regime(format!(
            "critical point at ({}, {}) lies on or near the boundary",
            cp.location[0], cp.location[1]
        )));
    }
    if search.interior.is_empty() {
        let mu1 = airy_zeros::<F>(1)?.mu1_abs();
        let bd = boundary_data(profile, domain, 64)?;
        let two = F::from_f64_(2.0);
        let two_thirds = two / F::from_f64_(3.0);
        match bd {
            BoundaryData::Interval { j, .. } => Ok(PredictedAsymptote {
                regime: Regime::NoCriticalPoint,
                h_exponent: two_thirds,
                prefactor: mu1 * j.powf(two_thirds) / two,
                imag_center: None,
                lower_bound_only: false,
                resonance_warning: false,
            }),
            BoundaryData::Rectangle { j_m, .. } => match j_m {
                Some(jm) => Ok(PredictedAsymptote {
                    regime: Regime::NoCriticalPoint,
                    h_exponent: two_thirds,
                    prefactor: mu1 * jm.powf(two_thirds) / two,
                    imag_center: None,
                    lower_bound_only: true,
                    resonance_warning: false,
                }),
                None => Err(Error::Regime(
                    "no perpendicular boundary samples and no interior critical points: \
                     no theoretical asymptote applies"
                        .into(),
                )),
            },
        }
    } else {
        if let Some(cp) = search.interior.iter().find(|c| c.degenerate) {
            return Err(Error::Regime(format!(
                "degenerate critical point at ({}, {}): Morse hypothesis violated",
                cp.location[0], cp.location[1]
            )));
        }
        let best = search
            .interior
            .iter()
            .min_by(|a, b| a.kappa.partial_cmp(&b.kappa).unwrap())
            .expect("nonempty");
        let kappa = best.kappa;
        let two = F::from_f64_(2.0);
        let kappa_tol = F::from_f64_(1e-9) * (F::one() + kappa);
        let level_tol = F::from_f64_(1e-9) * (F::one() + best.level.abs());
        let resonance_warning = search.interior.iter().any(|c| {
            !std::ptr::eq(c, best)
                && (c.kappa - kappa).abs() <= kappa_tol
                && (c.level - best.level).abs() <= level_tol
        });
        Ok(PredictedAsymptote {
            regime: Regime::Morse,
            h_exponent: F::one(),
            prefactor: kappa / two,
            imag_center: Some(best.level),
            lower_bound_only: false,
            resonance_warning,
        })
    }
}
