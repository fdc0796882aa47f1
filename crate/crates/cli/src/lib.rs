//! Batch front end: parse a run configuration, execute the solve,
//! continuation, sweep and audit pipelines and write their artifacts.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use catconv::oracle::solve_monolithic;
use catconv::{
    full_audit, horizon_sweep, norm_wz_t, picard_iterate, theta_continuation, AuditOptions, AuditReport,
    CylinderField, Discretization, PicardReport,
};
use serde::Serialize;
use thiserror::Error;

pub use config::{Config, Tolerances};
pub use output::OutputDir;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config is not valid TOML: {0}")]
    Parse(String),
    #[error("invalid config key `{key}`: {reason}")]
    Config { key: String, reason: String },
    #[error(transparent)]
    Solver(#[from] catconv::Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 when an iteration fails to converge,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Parse(_) | CliError::Config { .. } => 2,
            CliError::Solver(
                catconv::Error::NotConverged { .. }
                | catconv::Error::OracleNonConvergence { .. }
                | catconv::Error::EigenNonConvergence { .. },
            ) => 3,
            CliError::Solver(catconv::Error::InvalidParameter { .. }) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub out: PathBuf,
    pub oracle_check: bool,
    pub audit: bool,
    pub theta_continuation: bool,
    pub sweep_t: bool,
    /// Overrides the `seed` key of the config.
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct RunReport<'a> {
    picard: &'a PicardReport,
    audit: Option<&'a AuditReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    /// `‖u_s - u_s^oracle‖_{W_z(T)} / ‖u_s^oracle‖_{W_z(T)}`
    pub wall_relative_wz: f64,
    /// Relative `L²(r(1 - r²) dr dz dt)` distance of the channel fields.
    pub cylinder_relative_l2: f64,
    pub tolerance: f64,
    pub agrees: bool,
}

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct Summary {
    pub out: PathBuf,
    pub picard_iterations: usize,
    pub contraction_ratio: f64,
    pub files: usize,
}

pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Config::parse(&text)
}

/// Runs the configuration at `config_path`; on failure every output the
/// run created is removed again.
pub fn run(config_path: &Path, flags: &Flags) -> Result<Summary, CliError> {
    let mut cfg = load_config(config_path)?;
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    let mut out = OutputDir::create(&flags.out)?;
    match execute(&cfg, flags, &mut out) {
        Ok(mut s) => {
            s.out = out.root().to_path_buf();
            Ok(s)
        }
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

fn relative_l2(a: &CylinderField, b: &CylinderField, d: &Discretization) -> f64 {
    let wz = d.axial_weights();
    let wt = d.time_weights();
    let (mut num, mut den) = (0.0, 0.0);
    for ((i, r, k, n), v) in b.values.indexed_iter() {
        let w = d.quad_w_rw[r] * wz[k] * wt[n];
        num += w * (a.values[(i, r, k, n)] - v).powi(2);
        den += w * v * v;
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

fn execute(cfg: &Config, flags: &Flags, out: &mut OutputDir) -> Result<Summary, CliError> {
    let spec = &cfg.spec;
    let tol = &cfg.tolerances;
    let prep = spec.prepare()?;
    let sol = picard_iterate(&prep, None, tol.picard, tol.max_iter)?;
    log::info!(
        "Picard converged in {} iterations, ratio {:.3e}",
        sol.report.iterations,
        sol.report.contraction_ratio
    );
    let root = out.root().to_path_buf();
    out.write_text(root.join("config.echo.cfg"), &cfg.echo())?;
    out.write_fields(&root, &sol.u_s, &sol.u_f, &prep.disc)?;

    let audit = if flags.audit {
        let opts = AuditOptions {
            probe_pairs: cfg.probe_pairs,
            epsilon: Some(cfg.epsilon),
            seed: cfg.seed,
        };
        Some(full_audit(spec, &prep, &sol, &opts, tol.picard, tol.max_iter)?)
    } else {
        None
    };
    out.write_json(
        root.join("report.json"),
        &RunReport {
            picard: &sol.report,
            audit: audit.as_ref(),
        },
    )?;

    if flags.theta_continuation {
        let (sols, report) = theta_continuation(spec, &cfg.thetas, tol.continuation, tol.picard, tol.max_iter)?;
        for (k, s) in sols.iter().enumerate() {
            let name = if k < cfg.thetas.len() {
                format!("theta_{k}")
            } else {
                "theta_direct".to_string()
            };
            let dir = out.subdir(&name)?;
            out.write_fields(&dir, &s.u_s, &s.u_f, &prep.disc)?;
        }
        out.write_json(root.join("cauchy_report.json"), &report)?;
    }

    if flags.sweep_t {
        let sweep = horizon_sweep(spec, &cfg.sweep_horizons, tol.picard, tol.max_iter)?;
        out.write_json(root.join("sweep_report.json"), &sweep)?;
    }

    if flags.oracle_check {
        let (f, w) = solve_monolithic(spec)?;
        let d = &prep.disc;
        let den = norm_wz_t(&w, d);
        let num = norm_wz_t(&sol.u_s.difference(&w), d);
        let wall = if den == 0.0 { num } else { num / den };
        let cyl = relative_l2(&sol.u_f, &f, d);
        let tolerance = 1e-3;
        let check = OracleCheck {
            wall_relative_wz: wall,
            cylinder_relative_l2: cyl,
            tolerance,
            agrees: wall <= tolerance && cyl <= tolerance,
        };
        if !check.agrees {
            log::warn!("oracle disagreement: wall {wall:.3e}, cylinder {cyl:.3e}");
        }
        out.write_json(root.join("oracle_check.json"), &check)?;
    }

    Ok(Summary {
        out: root,
        picard_iterations: sol.report.iterations,
        contraction_ratio: sol.report.contraction_ratio,
        files: out.file_count(),
    })
}
