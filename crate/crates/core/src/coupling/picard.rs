use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::{Prepared, ProblemSpec};
use crate::boundary::solve_boundary;
use crate::cylinder::{axial_derivative, flux_from_modal, march_modal, solve_cylinder};
use crate::error::{Error, Result};
use crate::spaces::{norm_wz_t, BoundaryField, CylinderField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    /// `‖u^{k} - u^{k-1}‖_{W_z(T)}` for every iteration.
    pub iterates: Vec<f64>,
    /// `exp` of the slope of a log-linear fit to the increments.
    pub contraction_ratio: f64,
    /// Coefficient of determination of that fit.
    pub fit_r_squared: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `‖Φ(Ψ(u)) - u‖_{W_z(T)}` at the returned iterate.
    pub fixed_point_residual: f64,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u_s: BoundaryField,
    pub u_f: CylinderField,
    pub report: PicardReport,
}

/// `Φ(Ψ(u_s))` without synthesizing the channel field.
pub fn apply_coupled_map(prep: &Prepared, u_s: &BoundaryField) -> Result<BoundaryField> {
    let dus = axial_derivative(u_s, &prep.disc);
    let modal = march_modal(&dus, &prep.inlet, &prep.beta_f, &prep.disc, &prep.basis)?;
    let g = flux_from_modal(&modal, &dus, &prep.basis);
    solve_boundary(&g, &prep.wall, &prep.disc)
}

/// Constant-in-time extension of the (compatible) initial wall data.
pub fn initial_guess(prep: &Prepared) -> Result<BoundaryField> {
    BoundaryField::constant_in_time(&prep.wall.u_s0, &prep.disc)
}

/// Picard iteration of `Φ ∘ Ψ` from the initial wall data.
pub fn picard_solve(spec: &ProblemSpec, tol: f64, max_iter: usize) -> Result<Solution> {
    let prep = spec.prepare()?;
    picard_iterate(&prep, None, tol, max_iter)
}

/// Picard iteration from `seed`, or from [`initial_guess`] when `None`.
pub fn picard_iterate(
    prep: &Prepared,
    seed: Option<&BoundaryField>,
    tol: f64,
    max_iter: usize,
) -> Result<Solution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "picard.tol",
            reason: "must be positive".into(),
        });
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter {
            name: "picard.max_iter",
            reason: "must be at least 1".into(),
        });
    }
    let disc = &prep.disc;
    let mut u = match seed {
        Some(s) => BoundaryField::from_values(s.values.clone(), disc)?,
        None => initial_guess(prep)?,
    };
    let mut increments = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        let next = apply_coupled_map(prep, &u)?;
        let inc = norm_wz_t(&next.difference(&u), disc);
        increments.push(inc);
        u = next;
        if !inc.is_finite() {
            break;
        }
        if inc <= tol {
            converged = true;
            break;
        }
    }
    let scale = norm_wz_t(&u, disc);
    let (ratio, r2) = geometric_fit(&increments, 1e-13 * scale.max(f64::MIN_POSITIVE));
    let fixed_point_residual = if converged {
        norm_wz_t(&apply_coupled_map(prep, &u)?.difference(&u), disc)
    } else {
        f64::NAN
    };
    let report = PicardReport {
        iterations: increments.len(),
        iterates: increments,
        contraction_ratio: ratio,
        fit_r_squared: r2,
        converged,
        fixed_point_residual,
        tol,
    };
    if !converged {
        return Err(Error::NotConverged {
            report: Box::new(report),
        });
    }
    let u_f = solve_cylinder(&u, &prep.inlet, &prep.beta_f, disc, &prep.basis)?;
    Ok(Solution {
        u_s: u,
        u_f,
        report,
    })
}

/// Ratio and `R²` of a least-squares line through `(k, ln e_k)` for the
/// increments above the roundoff `floor`.
pub(crate) fn geometric_fit(increments: &[f64], floor: f64) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = increments
        .iter()
        .enumerate()
        .filter(|(_, e)| e.is_finite() && **e > floor)
        .map(|(k, e)| (k as f64, e.ln()))
        .collect();
    match pts.len() {
        0 => (0.0, 1.0),
        1 => {
            // A single resolvable step followed by an exact fixed point.
            if increments.len() > 1 {
                (0.0, 1.0)
            } else {
                (f64::NAN, f64::NAN)
            }
        }
        n => {
            let nf = n as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
            let slope = sxy / sxx;
            let r2 = if syy == 0.0 {
                1.0
            } else {
                sxy * sxy / (sxx * syy)
            };
            (slope.exp(), r2)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub horizon: f64,
    pub contraction_ratio: f64,
    pub fit_r_squared: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Picard runs for several horizons on otherwise identical problems.
///
/// Non-convergence is recorded in the entry rather than returned as an
/// error; that is the expected outcome for horizons beyond the contraction
/// regime.
pub fn horizon_sweep(
    spec: &ProblemSpec,
    horizons: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<SweepEntry>> {
    spec.validate()?;
    horizons
        .par_iter()
        .map(|&h| {
            let report = match picard_solve(&spec.with_horizon(h), tol, max_iter) {
                Ok(sol) => sol.report,
                Err(Error::NotConverged { report }) => *report,
                Err(e) => return Err(e),
            };
            Ok(SweepEntry {
                horizon: h,
                contraction_ratio: report.contraction_ratio,
                fit_r_squared: report.fit_r_squared,
                iterations: report.iterations,
                converged: report.converged,
            })
        })
        .collect()
}
