//! TOML experiment configuration: parsing, defaults, and validation.
//!
//! A config file drives every subcommand. Sections:
//!
//! ```toml
//! [problem]
//! potential = "x^2"                     # expression in x (and y in 2D)
//! domain = { a = -1.0, b = 2.0 }        # or { x = [-1.0, 1.0], y = [-1.0, 1.0] }
//! regime = "auto"                       # auto | airy | morse
//! h = 0.01                              # single-h subcommands (spectrum, pseudo, decay)
//! hs = [0.02, 0.01, 0.005]              # sweep
//!
//! [solver]
//! dense_cap = 3000
//! tol = 1e-9
//! shifts = [[0.0, 0.5], [0.0, 2.0]]     # optional shift-invert override (re, im pairs)
//!
//! [grid]
//! n_max_1d = 4000
//! n_max_2d_per_axis = 250
//!
//! [pseudo]
//! gamma_factor = 0.8                    # gamma_max as a fraction of the predicted Re scale
//! nu_samples = 201
//! region = [0.0, 2.0, -1.0, 3.0]        # optional field window (re0, re1, im0, im1)
//! nx = 60
//! ny = 60
//!
//! [decay]
//! samples = 60
//! t_max = 0.0                           # 0 = auto (10 / fitted rate)
//!
//! [gl]
//! rs = [20.0, 40.0, 80.0]
//!
//! [output]
//! dir = "out"
//! ```
//!
//! Every field except `potential` and `domain` has a default. Numbers are
//! echoed into output files with 17 significant digits.

use crate::error::{Error, Result};
use crate::potentials::expr::PotentialExpr;
use crate::Domain;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeChoice {
    Auto,
    Airy,
    Morse,
}

impl Default for RegimeChoice {
    fn default() -> Self {
        RegimeChoice::Auto
    }
}

/// Domain in the raw file: either {a, b} or {x = [..], y = [..]}.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawDomain {
    Interval { a: f64, b: f64 },
    Rectangle { x: [f64; 2], y: [f64; 2] },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    potential: String,
    domain: RawDomain,
    #[serde(default)]
    regime: RegimeChoice,
    h: Option<f64>,
    hs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawSolver {
    dense_cap: Option<usize>,
    tol: Option<f64>,
    shifts: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawGrid {
    n_max_1d: Option<usize>,
    n_max_2d_per_axis: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawPseudo {
    gamma_factor: Option<f64>,
    nu_samples: Option<usize>,
    region: Option<[f64; 4]>,
    nx: Option<usize>,
    ny: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawDecay {
    samples: Option<usize>,
    t_max: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawGl {
    rs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawOutput {
    dir: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: RawProblem,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    pseudo: RawPseudo,
    #[serde(default)]
    decay: RawDecay,
    #[serde(default)]
    gl: RawGl,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Clone)]
pub struct PseudoSettings {
    pub gamma_factor: f64,
    pub nu_samples: usize,
    pub region: Option<[f64; 4]>,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone)]
pub struct DecaySettings {
    pub samples: usize,
    /// 0 means "auto": 10 / fitted rate.
    pub t_max: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub potential_src: String,
    pub potential: PotentialExpr<f64>,
    pub domain: Domain<f64>,
    pub regime: RegimeChoice,
    pub h: Option<f64>,
    pub hs: Option<Vec<f64>>,
    pub dense_cap: usize,
    pub tol: f64,
    pub shifts: Option<Vec<num_complex::Complex64>>,
    pub caps: crate::discretize::GridCaps,
    pub pseudo: PseudoSettings,
    pub decay: DecaySettings,
    pub rs: Option<Vec<f64>>,
    pub out_dir: String,
    /// Canonical bytes of the source file; hashed to name output files.
    pub raw_bytes: Vec<u8>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes)
            .map_err(|e| Error::Config(format!("config is not UTF-8: {e}")))?;
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        Self::resolve(raw, bytes.to_vec())
    }

    fn resolve(raw: RawConfig, raw_bytes: Vec<u8>) -> Result<Self> {
        let domain = match raw.problem.domain {
            RawDomain::Interval { a, b } => {
                if !(a < b) {
                    return Err(Error::Config(format!(
                        "interval bounds must satisfy a < b, got a = {a}, b = {b}"
                    )));
                }
                Domain::Interval { a, b }
            }
            RawDomain::Rectangle { x, y } => {
                if !(x[0] < x[1]) || !(y[0] < y[1]) {
                    return Err(Error::Config(format!(
                        "rectangle bounds must be ordered, got x = {x:?}, y = {y:?}"
                    )));
                }
                Domain::Rectangle {
                    x: (x[0], x[1]),
                    y: (y[0], y[1]),
                }
            }
        };
        let potential = PotentialExpr::parse(&raw.problem.potential, domain.dim())?;

        if let Some(h) = raw.problem.h {
            if h <= 0.0 {
                return Err(Error::Config(format!("h must be positive, got {h}")));
            }
        }
        if let Some(hs) = &raw.problem.hs {
            if hs.is_empty() {
                return Err(Error::Config("hs empty".into()));
            }
            if hs.iter().any(|&h| h <= 0.0) {
                return Err(Error::Config("hs must be positive".into()));
            }
            if hs.windows(2).any(|w| w[1] >= w[0]) {
                return Err(Error::Config("hs must be strictly decreasing".into()));
            }
        }
        if let Some(rs) = &raw.gl.rs {
            if rs.is_empty() {
                return Err(Error::Config("rs empty".into()));
            }
            if rs.iter().any(|&r| r <= 0.0) {
                return Err(Error::Config("rs must be positive".into()));
            }
        }
        let tol = raw.solver.tol.unwrap_or(1e-9);
        if tol <= 0.0 || tol >= 1.0 {
            return Err(Error::Config(format!("solver tol must be in (0, 1), got {tol}")));
        }
        let shifts = raw.solver.shifts.map(|v| {
            v.into_iter()
                .map(|[re, im]| num_complex::Complex64::new(re, im))
                .collect::<Vec<_>>()
        });
        if let Some(s) = &shifts {
            if s.iter().any(|z| z.re < 0.0) {
                return Err(Error::Config(
                    "shift-invert shifts must have nonnegative real part (the spectrum lies in Re >= 0)"
                        .into(),
                ));
            }
            if s.is_empty() {
                return Err(Error::Config("shifts empty".into()));
            }
        }
        let defaults = crate::discretize::GridCaps::default();
        let caps = crate::discretize::GridCaps {
            n_max_1d: raw.grid.n_max_1d.unwrap_or(defaults.n_max_1d),
            n_max_2d_per_axis: raw
                .grid
                .n_max_2d_per_axis
                .unwrap_or(defaults.n_max_2d_per_axis),
        };
        let gamma_factor = raw.pseudo.gamma_factor.unwrap_or(0.8);
        if !(0.0 < gamma_factor && gamma_factor < 1.0) {
            return Err(Error::Config(format!(
                "pseudo gamma_factor must be in (0, 1), got {gamma_factor}"
            )));
        }
        let pseudo = PseudoSettings {
            gamma_factor,
            nu_samples: raw.pseudo.nu_samples.unwrap_or(201).max(2),
            region: raw.pseudo.region,
            nx: raw.pseudo.nx.unwrap_or(60).max(2),
            ny: raw.pseudo.ny.unwrap_or(60).max(2),
        };
        if let Some(r) = &pseudo.region {
            if !(r[0] < r[1]) || !(r[2] < r[3]) {
                return Err(Error::Config(format!(
                    "pseudo region must be ordered (re0 < re1, im0 < im1), got {r:?}"
                )));
            }
        }
        let decay = DecaySettings {
            samples: raw.decay.samples.unwrap_or(60).max(5),
            t_max: raw.decay.t_max.unwrap_or(0.0),
        };
        if decay.t_max < 0.0 {
            return Err(Error::Config(format!(
                "decay t_max must be nonnegative, got {}",
                decay.t_max
            )));
        }
        Ok(ExperimentConfig {
            potential_src: raw.problem.potential,
            potential,
            domain,
            regime: raw.problem.regime,
            h: raw.problem.h,
            hs: raw.problem.hs,
            dense_cap: raw.solver.dense_cap.unwrap_or(crate::eigensolve::DENSE_CAP_DEFAULT),
            tol,
            shifts,
            caps,
            pseudo,
            decay,
            rs: raw.gl.rs,
            out_dir: raw.output.dir.unwrap_or_else(|| "out".into()),
            raw_bytes,
        })
    }

    /// First 12 hex chars of the SHA-256 of the config bytes; stamped into
    /// every output filename so artifacts name the config they came from.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(&self.raw_bytes);
        digest
            .iter()
            .take(6)
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn require_h(&self) -> Result<f64> {
        self.h.ok_or_else(|| {
            Error::Config("this subcommand needs `h` under [problem]".into())
        })
    }

    pub fn require_hs(&self) -> Result<&[f64]> {
        self.hs
            .as_deref()
            .ok_or_else(|| Error::Config("this subcommand needs `hs` under [problem]".into()))
    }

    pub fn require_rs(&self) -> Result<&[f64]> {
        self.rs
            .as_deref()
            .ok_or_else(|| Error::Config("this subcommand needs `rs` under [gl]".into()))
    }
}
