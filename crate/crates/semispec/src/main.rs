//! Config-driven command line front end. Every subcommand reads one TOML
//! experiment file, writes deterministic artifacts named after the config
//! hash, and maps error kinds to exit codes (1 config, 2 regime, 3 numerical).

use clap::{Parser, Subcommand};
use num_complex::Complex64 as C;
use semispec::config::{ExperimentConfig, RegimeChoice};
use semispec::discretize::{assemble_interval, assemble_rectangle, grid_for, ResolutionRule};
use semispec::eigensolve::{
    dense_spectrum_capped, leftmost, shift_invert_leftmost, ShiftPlan, SpectrumResult,
};
use semispec::error::{Error, Result};
use semispec::models::validate::{validate_models, write_validation_csv};
use semispec::potentials::{predicted_limit, PotentialProfile, Regime};
use semispec::semigroup::{
    decay_curve, decay_rate_fit, default_fit_window, gp_envelope, write_decay_csv, EXP_DENSE_CAP,
};
use semispec::sweep::{
    compare_to_theory, fit_powerlaw, gl_preset, run_h_sweep, write_gl_csv, write_sweep_csv,
};
use semispec::{pseudospec, AssembledOperator, Domain};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "semispec",
    about = "Spectral asymptotics, resolvent bounds and semigroup decay for -h^2 Laplacian + iV"
)]
struct Cli {
    /// Experiment config (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides [output].dir)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 = auto (env SEMISPEC_THREADS as fallback)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Dense-solver size cap (overrides [solver].dense_cap)
    #[arg(long = "dense-cap", global = true)]
    dense_cap: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Spectrum at a single h (JSON)
    Spectrum,
    /// h-sweep of the leftmost eigenvalue + power-law fit vs theory (CSV + JSON)
    Sweep,
    /// Resolvent strip supremum and optional pseudospectrum field (JSON + CSV)
    Pseudo,
    /// Semigroup decay curve, rate fit and quantitative envelope (CSV + JSON)
    Decay,
    /// Model-operator tooling
    Models {
        #[command(subcommand)]
        cmd: ModelsCmd,
    },
    /// Ginzburg-Landau normal-state stability preset (CSV + JSON)
    Gl,
}

#[derive(Subcommand)]
enum ModelsCmd {
    /// Discretization-versus-oracle table for the Airy/Davies/tensor models
    Validate,
}

fn main() {
    let cli = Cli::parse();
    init_threads(cli.threads);
    match run(&cli) {
        Ok(()) => {}
        Err(e) => {
            let payload = serde_json::json!({
                "error": e.kind(),
                "message": e.to_string(),
            });
            eprintln!("{payload}");
            std::process::exit(e.exit_code());
        }
    }
}

fn init_threads(flag: Option<usize>) {
    let n = flag
        .or_else(|| {
            std::env::var("SEMISPEC_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    if n > 0 {
        // ignore the error if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cfg_path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("missing --config PATH".into()))?;
    let cfg = ExperimentConfig::from_path(cfg_path)?;
    let dense_cap = cli.dense_cap.unwrap_or(cfg.dense_cap);
    let out_dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
    fs::create_dir_all(&out_dir)?;
    let hash = cfg.hash();

    let outputs = match &cli.cmd {
        Cmd::Spectrum => cmd_spectrum(&cfg, dense_cap, &out_dir, &hash)?,
        Cmd::Sweep => cmd_sweep(&cfg, dense_cap, &out_dir, &hash)?,
        Cmd::Pseudo => cmd_pseudo(&cfg, dense_cap, &out_dir, &hash)?,
        Cmd::Decay => cmd_decay(&cfg, dense_cap, &out_dir, &hash)?,
        Cmd::Models {
            cmd: ModelsCmd::Validate,
        } => cmd_models_validate(&out_dir, &hash)?,
        Cmd::Gl => cmd_gl(&cfg, dense_cap, &out_dir, &hash)?,
    };

    write_sidecar(&cfg, &cli.cmd, &out_dir, &hash, &outputs)?;
    for f in &outputs {
        println!("wrote {}", out_dir.join(f).display());
    }
    Ok(())
}

fn subcommand_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Spectrum => "spectrum",
        Cmd::Sweep => "sweep",
        Cmd::Pseudo => "pseudo",
        Cmd::Decay => "decay",
        Cmd::Models { .. } => "models-validate",
        Cmd::Gl => "gl",
    }
}

/// Run metadata lives in a sidecar so the data files stay byte-identical
/// across reruns (no timestamps inside artifacts).
fn write_sidecar(
    cfg: &ExperimentConfig,
    cmd: &Cmd,
    dir: &Path,
    hash: &str,
    outputs: &[String],
) -> Result<()> {
    let meta = serde_json::json!({
        "config_hash": hash,
        "subcommand": subcommand_name(cmd),
        "potential": cfg.potential_src,
        "outputs": outputs,
        "version": env!("CARGO_PKG_VERSION"),
    });
    fs::write(
        dir.join(format!("run.{hash}.json")),
        format!("{}\n", serde_json::to_string_pretty(&meta).unwrap()),
    )?;
    Ok(())
}

fn profile_of(cfg: &ExperimentConfig) -> Result<PotentialProfile<f64>> {
    PotentialProfile::new(cfg.potential.clone())
}

/// Resolution rule for single-h subcommands: the explicit regime choice wins,
/// `auto` consults the critical-point analysis.
fn rule_of(cfg: &ExperimentConfig, profile: &PotentialProfile<f64>) -> Result<ResolutionRule> {
    match cfg.regime {
        RegimeChoice::Airy => Ok(ResolutionRule::airy()),
        RegimeChoice::Morse => Ok(ResolutionRule::morse()),
        RegimeChoice::Auto => match predicted_limit(profile, &cfg.domain)?.regime {
            Regime::NoCriticalPoint => Ok(ResolutionRule::airy()),
            Regime::Morse => Ok(ResolutionRule::morse()),
        },
    }
}

fn assemble_at(
    cfg: &ExperimentConfig,
    profile: &PotentialProfile<f64>,
    h: f64,
) -> Result<AssembledOperator> {
    let rule = rule_of(cfg, profile)?;
    let grid = grid_for(h, &cfg.domain, &rule, &cfg.caps)?;
    match cfg.domain.dim() {
        1 => assemble_interval(&grid, profile, h),
        _ => assemble_rectangle(&grid, profile, h),
    }
}

fn solve_spectrum(
    cfg: &ExperimentConfig,
    op: &AssembledOperator,
    dense_cap: usize,
) -> Result<SpectrumResult> {
    if op.size() <= dense_cap {
        dense_spectrum_capped(op, dense_cap)
    } else {
        let mut plan = match &cfg.shifts {
            Some(s) => ShiftPlan {
                shifts: s.clone(),
                k_per_shift: 8,
                tol: cfg.tol,
                max_iterations: 4,
            },
            None => ShiftPlan::default_for(op)?,
        };
        plan.tol = cfg.tol;
        shift_invert_leftmost(op, &plan)
    }
}

fn complex_json(z: C) -> String {
    format!("[{:.16e}, {:.16e}]", z.re, z.im)
}

fn cmd_spectrum(
    cfg: &ExperimentConfig,
    dense_cap: usize,
    dir: &Path,
    hash: &str,
) -> Result<Vec<String>> {
    let h = cfg.require_h()?;
    let profile = profile_of(cfg)?;
    let op = assemble_at(cfg, &profile, h)?;
    let spec = solve_spectrum(cfg, &op, dense_cap)?;
    let lm = leftmost(&spec)?;

    let mut body = String::new();
    writeln!(body, "{{").unwrap();
    writeln!(body, "  \"h\": {:.16e},", h).unwrap();
    writeln!(body, "  \"grid_id\": \"{}\",", spec.grid_id).unwrap();
    writeln!(body, "  \"method\": \"{:?}\",", spec.method).unwrap();
    writeln!(body, "  \"leftmost\": {},", complex_json(lm)).unwrap();
    writeln!(body, "  \"eigenvalues\": [").unwrap();
    for (i, (l, r)) in spec.eigenvalues.iter().zip(&spec.residuals).enumerate() {
        let sep = if i + 1 == spec.eigenvalues.len() { "" } else { "," };
        writeln!(
            body,
            "    {{\"value\": {}, \"residual\": {:.16e}}}{sep}",
            complex_json(*l),
            r
        )
        .unwrap();
    }
    writeln!(body, "  ]").unwrap();
    writeln!(body, "}}").unwrap();

    let name = format!("spectrum.{hash}.json");
    fs::write(dir.join(&name), body)?;
    Ok(vec![name])
}

fn cmd_sweep(
    cfg: &ExperimentConfig,
    dense_cap: usize,
    dir: &Path,
    hash: &str,
) -> Result<Vec<String>> {
    let hs = cfg.require_hs()?;
    let profile = profile_of(cfg)?;
    let outcome = run_h_sweep(&profile, &cfg.domain, hs, &cfg.caps, dense_cap)?;

    let csv_name = format!("sweep.{hash}.csv");
    let mut csv = Vec::new();
    write_sweep_csv(&mut csv, &outcome)?;
    fs::write(dir.join(&csv_name), csv)?;

    let rows = outcome.valid_rows();
    let fit = fit_powerlaw(&rows, &outcome.predicted)?;
    let report = compare_to_theory(&fit, &outcome.predicted, 0.05);

    let mut body = String::new();
    writeln!(body, "{{").unwrap();
    writeln!(body, "  \"fitted_exponent\": {:.16e},", fit.fitted_exponent).unwrap();
    writeln!(body, "  \"fitted_prefactor\": {:.16e},", fit.fitted_prefactor).unwrap();
    writeln!(body, "  \"r_squared\": {:.16e},", fit.r_squared).unwrap();
    writeln!(
        body,
        "  \"relative_error_vs_theory\": {:.16e},",
        fit.relative_error_vs_theory
    )
    .unwrap();
    writeln!(
        body,
        "  \"theory_exponent\": {:.16e},",
        outcome.predicted.h_exponent
    )
    .unwrap();
    writeln!(
        body,
        "  \"theory_prefactor\": {:.16e},",
        outcome.predicted.prefactor
    )
    .unwrap();
    writeln!(body, "  \"pass\": {},", report.pass).unwrap();
    writeln!(body, "  \"details\": {}", serde_json::json!(report.details)).unwrap();
    writeln!(body, "}}").unwrap();
    let json_name = format!("sweep_fit.{hash}.json");
    fs::write(dir.join(&json_name), body)?;

    if !report.pass {
        return Err(Error::Instability(format!(
            "sweep disagrees with theory: {}",
            report.details
        )));
    }
    Ok(vec![csv_name, json_name])
}

fn cmd_pseudo(
    cfg: &ExperimentConfig,
    dense_cap: usize,
    dir: &Path,
    hash: &str,
) -> Result<Vec<String>> {
    let h = cfg.require_h()?;
    let profile = profile_of(cfg)?;
    let op = assemble_at(cfg, &profile, h)?;
    let spec = solve_spectrum(cfg, &op, dense_cap)?;
    let predicted = predicted_limit(&profile, &cfg.domain)?;
    let gamma_max =
        cfg.pseudo.gamma_factor * predicted.prefactor * h.powf(predicted.h_exponent);
    let nu_range = pseudospec::default_nu_range(&op);
    let sup = pseudospec::strip_sup(&op, &spec, gamma_max, nu_range, cfg.pseudo.nu_samples)?;
    let scaled = sup * h.powf(predicted.h_exponent);

    let mut body = String::new();
    writeln!(body, "{{").unwrap();
    writeln!(body, "  \"h\": {:.16e},", h).unwrap();
    writeln!(body, "  \"gamma_max\": {:.16e},", gamma_max).unwrap();
    writeln!(body, "  \"nu_range\": [{:.16e}, {:.16e}],", nu_range.0, nu_range.1).unwrap();
    writeln!(body, "  \"nu_samples\": {},", cfg.pseudo.nu_samples).unwrap();
    writeln!(body, "  \"strip_sup\": {:.16e},", sup).unwrap();
    writeln!(body, "  \"strip_sup_scaled\": {:.16e}", scaled).unwrap();
    writeln!(body, "}}").unwrap();
    let json_name = format!("pseudo.{hash}.json");
    fs::write(dir.join(&json_name), body)?;

    let mut outputs = vec![json_name];
    if let Some(r) = cfg.pseudo.region {
        let field = pseudospec::field(&op, (r[0], r[1], r[2], r[3]), cfg.pseudo.nx, cfg.pseudo.ny)?;
        let csv_name = format!("pseudo_field.{hash}.csv");
        let mut csv = Vec::new();
        field.write_csv(&mut csv)?;
        fs::write(dir.join(&csv_name), csv)?;
        outputs.push(csv_name);
    }
    Ok(outputs)
}

fn cmd_decay(
    cfg: &ExperimentConfig,
    dense_cap: usize,
    dir: &Path,
    hash: &str,
) -> Result<Vec<String>> {
    let h = cfg.require_h()?;
    let profile = profile_of(cfg)?;
    let op = assemble_at(cfg, &profile, h)?;
    if op.size() > EXP_DENSE_CAP {
        return Err(Error::Precondition(format!(
            "decay needs a dense exponential; size {} exceeds the cap {EXP_DENSE_CAP}",
            op.size()
        )));
    }
    let spec = solve_spectrum(cfg, &op, dense_cap)?;
    let lm = leftmost(&spec)?;
    let rate_guess = lm.re;
    if rate_guess <= 0.0 {
        return Err(Error::Regime(format!(
            "leftmost eigenvalue {lm} has nonpositive real part; no decay to measure"
        )));
    }
    let t_max = if cfg.decay.t_max > 0.0 {
        cfg.decay.t_max
    } else {
        10.0 / rate_guess
    };
    let ts: Vec<f64> = (0..cfg.decay.samples)
        .map(|i| t_max * i as f64 / (cfg.decay.samples - 1) as f64)
        .collect();
    let curve = decay_curve(&op, &ts)?;
    let fitted = decay_rate_fit(&curve, default_fit_window(rate_guess))?;

    // envelope from the measured resolvent bound on the strip at
    // gamma_factor x the spectral abscissa
    let predicted = predicted_limit(&profile, &cfg.domain).ok();
    let gamma_max = cfg.pseudo.gamma_factor * rate_guess;
    let nu_range = pseudospec::default_nu_range(&op);
    let bound = pseudospec::strip_sup(&op, &spec, gamma_max, nu_range, cfg.pseudo.nu_samples)?;
    let envelope = gp_envelope(bound, gamma_max, 1.0)?;

    let csv_name = format!("decay.{hash}.csv");
    let mut csv = Vec::new();
    write_decay_csv(&mut csv, &curve, &envelope)?;
    fs::write(dir.join(&csv_name), csv)?;

    let mut body = String::new();
    writeln!(body, "{{").unwrap();
    writeln!(body, "  \"h\": {:.16e},", h).unwrap();
    writeln!(body, "  \"leftmost\": {},", complex_json(lm)).unwrap();
    writeln!(body, "  \"fitted_rate\": {:.16e},", fitted).unwrap();
    writeln!(body, "  \"spectral_abscissa\": {:.16e},", rate_guess).unwrap();
    if let Some(p) = &predicted {
        writeln!(
            body,
            "  \"theory_rate\": {:.16e},",
            p.prefactor * h.powf(p.h_exponent)
        )
        .unwrap();
    }
    writeln!(body, "  \"strip_bound\": {:.16e},", bound).unwrap();
    writeln!(body, "  \"envelope_m\": {:.16e},", envelope.m).unwrap();
    writeln!(body, "  \"envelope_rate\": {:.16e}", envelope.rate).unwrap();
    writeln!(body, "}}").unwrap();
    let json_name = format!("decay.{hash}.json");
    fs::write(dir.join(&json_name), body)?;
    Ok(vec![csv_name, json_name])
}

fn cmd_models_validate(dir: &Path, hash: &str) -> Result<Vec<String>> {
    let rows = validate_models()?;
    let name = format!("models_validate.{hash}.csv");
    let mut csv = Vec::new();
    write_validation_csv(&mut csv, &rows)?;
    fs::write(dir.join(&name), csv)?;
    let mut failed = 0;
    for r in &rows {
        println!(
            "{} {:<14} {:<28} err {:.3e} (tol {:.1e})",
            if r.pass { "PASS" } else { "FAIL" },
            r.model,
            r.case,
            r.abs_error,
            r.tolerance
        );
        if !r.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(Error::Numerical(format!(
            "{failed} of {} model validation rows exceeded tolerance",
            rows.len()
        )));
    }
    Ok(vec![name])
}

fn cmd_gl(
    cfg: &ExperimentConfig,
    dense_cap: usize,
    dir: &Path,
    hash: &str,
) -> Result<Vec<String>> {
    let rs = cfg.require_rs()?;
    let profile = profile_of(cfg)?;
    if !matches!(cfg.domain, Domain::Interval { .. }) {
        return Err(Error::Config("the gl preset runs on an interval domain".into()));
    }
    let outcome = gl_preset(&profile, &cfg.domain, rs, &cfg.caps, dense_cap)?;

    let csv_name = format!("gl.{hash}.csv");
    let mut csv = Vec::new();
    write_gl_csv(&mut csv, &outcome)?;
    fs::write(dir.join(&csv_name), csv)?;

    // cross-check the analytic verdict against the measured rate sign at the
    // largest R that produced a row
    let largest = outcome
        .rows
        .iter()
        .rev()
        .find_map(|(_, r)| r.as_ref().ok());
    let mut body = String::new();
    writeln!(body, "{{").unwrap();
    writeln!(body, "  \"j_m\": {:.16e},", outcome.j_m).unwrap();
    writeln!(body, "  \"j_c\": {:.16e},", outcome.verdict.j_c).unwrap();
    writeln!(body, "  \"stable\": {},", outcome.verdict.stable).unwrap();
    match largest {
        Some(row) => {
            writeln!(body, "  \"rate_at_largest_r\": {:.16e},", row.gl_decay_rate).unwrap();
            writeln!(
                body,
                "  \"sign_agrees\": {}",
                row.stable == outcome.verdict.stable
            )
            .unwrap();
        }
        None => {
            writeln!(body, "  \"rate_at_largest_r\": null,").unwrap();
            writeln!(body, "  \"sign_agrees\": null").unwrap();
        }
    }
    writeln!(body, "}}").unwrap();
    let json_name = format!("gl.{hash}.json");
    fs::write(dir.join(&json_name), body)?;
    Ok(vec![csv_name, json_name])
}
