//! Numerical verification of semiclassical spectral asymptotics for the
//! non-selfadjoint Dirichlet operator `-h^2 Δ + i V(x)` on intervals and
//! rectangles, together with the analytic model operators (complex Airy,
//! complex harmonic oscillator, quadratic tensor sums) used as exact oracles.
//!
//! The symbolic and assembly layers are generic over the real scalar via
//! `num_traits::Float`; the dense solver layer is `f64`-only (it is backed by
//! `faer`). Concrete `f64` aliases for the generic types live at the crate
//! root.

pub mod config;
pub mod discretize;
pub mod eigensolve;
pub mod error;
pub mod linalg;
pub mod models;
pub mod potentials;
pub mod pseudospec;
pub mod semigroup;
pub mod sparse;
pub mod sweep;

pub use error::{Error, Result};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};

/// Scalar bound for the generic numeric core.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    fn from_f64_(v: f64) -> Self {
        Self::from_f64(v).expect("f64 conversion")
    }
    fn to_f64_(self) -> f64 {
        self.to_f64().expect("f64 conversion")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Computational domain: an open interval or an open axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain<F> {
    Interval { a: F, b: F },
    Rectangle { x: (F, F), y: (F, F) },
}

impl<F: Real> Domain<F> {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Rectangle { .. } => 2,
        }
    }

    pub fn diameter(&self) -> F {
        match *self {
            Domain::Interval { a, b } => (b - a).abs(),
            Domain::Rectangle { x, y } => {
                let dx = x.1 - x.0;
                let dy = y.1 - y.0;
                (dx * dx + dy * dy).sqrt()
            }
        }
    }

    /// Per-axis (lo, hi) pairs; one entry in 1D, two in 2D.
    pub fn axes(&self) -> Vec<(F, F)> {
        match *self {
            Domain::Interval { a, b } => vec![(a, b)],
            Domain::Rectangle { x, y } => vec![x, y],
        }
    }

    pub fn contains(&self, p: [F; 2]) -> bool {
        match *self {
            Domain::Interval { a, b } => p[0] > a && p[0] < b,
            Domain::Rectangle { x, y } => p[0] > x.0 && p[0] < x.1 && p[1] > y.0 && p[1] < y.1,
        }
    }

    /// Distance from `p` to the boundary of the domain (0 outside).
    pub fn boundary_distance(&self, p: [F; 2]) -> F {
        let zero = F::zero();
        match *self {
            Domain::Interval { a, b } => {
                if p[0] <= a || p[0] >= b {
                    zero
                } else {
                    (p[0] - a).min(b - p[0])
                }
            }
            Domain::Rectangle { x, y } => {
                if !self.contains(p) {
                    zero
                } else {
                    (p[0] - x.0)
                        .min(x.1 - p[0])
                        .min(p[1] - y.0)
                        .min(y.1 - p[1])
                }
            }
        }
    }
}

// Concrete aliases for the generic core types.
pub type DomainF64 = Domain<f64>;
pub type PotentialExpr = potentials::expr::PotentialExpr<f64>;
pub type PotentialProfile = potentials::PotentialProfile<f64>;
pub type CriticalPoint = potentials::CriticalPoint<f64>;
pub type BoundaryData = potentials::BoundaryData<f64>;
pub type PredictedAsymptote = potentials::PredictedAsymptote<f64>;
pub type AiryZeros = models::airy::AiryZeros<f64>;
pub type ModelSpectrum = models::ModelSpectrum<f64>;
pub type Grid = discretize::Grid<f64>;
pub type AssembledOperator = discretize::AssembledOperator<f64>;
pub type CsrMatrix = sparse::CsrMatrix<f64>;
