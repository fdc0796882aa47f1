use serde::{Deserialize, Serialize};

use super::audit::{energy_audit, AuditReport};
use super::picard::{picard_iterate, Solution};
use super::problem::ProblemSpec;
use crate::eigenbasis::eigenpairs;
use crate::error::{Error, Result};
use crate::spaces::{norm_wr_t, norm_wtilde_t, Discretization};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub thetas: Vec<f64>,
    /// Distance between the solutions for `θ_k` and `θ_{k+1}`.
    pub distances: Vec<f64>,
    pub monotone_decreasing: bool,
    pub final_gap: f64,
    /// Distance from the last level to the direct `θ = 0` solve.
    pub direct_gap: f64,
    pub converged: bool,
    pub tol: f64,
    pub picard_iterations: Vec<usize>,
    pub energy: Vec<AuditReport>,
    pub energy_ok: bool,
}

/// `sqrt(‖Δu_f‖²_{W_r(T)} + ‖Δu_s‖²_{W̃_z(T)})`
pub fn solution_distance(a: &Solution, b: &Solution, disc: &Discretization) -> f64 {
    let f = norm_wr_t(&a.u_f.difference(&b.u_f), disc);
    let s = norm_wtilde_t(&a.u_s.difference(&b.u_s), disc);
    (f * f + s * s).sqrt()
}

pub fn default_theta_sequence() -> Vec<f64> {
    (2..=8).map(|k| 0.5f64.powi(k)).collect()
}

/// Solves the regularized problem along a decreasing `θ` sequence, each
/// Picard run warm-started from the previous level, then solves `θ = 0`
/// directly.
///
/// Returns the solutions per level followed by the direct one.
pub fn theta_continuation(
    spec: &ProblemSpec,
    thetas: &[f64],
    tol: f64,
    picard_tol: f64,
    max_iter: usize,
) -> Result<(Vec<Solution>, CauchyReport)> {
    if thetas.is_empty()
        || thetas.iter().any(|t| !(*t > 0.0))
        || thetas.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidParameter {
            name: "continuation.theta",
            reason: "must be positive and strictly decreasing".into(),
        });
    }
    spec.validate()?;
    let disc = spec.discretization()?;
    let basis = eigenpairs(&disc, 1.0, spec.grid.m)?;

    let mut sols: Vec<Solution> = Vec::with_capacity(thetas.len() + 1);
    let mut energy = Vec::with_capacity(thetas.len());
    for &th in thetas {
        let level = spec.with_theta_reg(th);
        let prep = level.prepare_with(disc.clone(), basis.clone())?;
        let sol = picard_iterate(&prep, sols.last().map(|s| &s.u_s), picard_tol, max_iter)?;
        energy.push(energy_audit(&sol.u_s, &level, &prep));
        sols.push(sol);
    }
    let direct_prep = spec.with_theta_reg(0.0).prepare_with(disc.clone(), basis)?;
    let direct = picard_iterate(
        &direct_prep,
        sols.last().map(|s| &s.u_s),
        picard_tol,
        max_iter,
    )?;

    let distances: Vec<f64> = sols
        .windows(2)
        .map(|w| solution_distance(&w[0], &w[1], &disc))
        .collect();
    let monotone = distances.windows(2).all(|w| w[1] <= w[0]);
    let final_gap = distances.last().copied().unwrap_or(0.0);
    let direct_gap = solution_distance(sols.last().expect("non-empty"), &direct, &disc);
    let report = CauchyReport {
        thetas: thetas.to_vec(),
        monotone_decreasing: monotone,
        final_gap,
        direct_gap,
        converged: monotone && final_gap <= tol,
        tol,
        picard_iterations: sols
            .iter()
            .chain([&direct])
            .map(|s| s.report.iterations)
            .collect(),
        energy_ok: energy.iter().all(|e| e.energy_ok),
        energy,
        distances,
    };
    sols.push(direct);
    Ok((sols, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_give_zero_distances() {
        let mut spec = ProblemSpec::zero(2);
        spec.grid.n_t = 9;
        spec.grid.n_z = 9;
        let (sols, rep) = theta_continuation(&spec, &[0.5, 0.25, 0.125], 1e-6, 1e-10, 10).unwrap();
        assert_eq!(sols.len(), 4);
        assert!(rep.distances.iter().all(|d| *d == 0.0));
        assert_eq!(rep.direct_gap, 0.0);
        assert!(rep.converged && rep.energy_ok);
    }

    #[test]
    fn rejects_non_decreasing_sequence() {
        let spec = ProblemSpec::zero(2);
        assert!(theta_continuation(&spec, &[0.25, 0.5], 1e-3, 1e-8, 5).is_err());
        assert!(theta_continuation(&spec, &[], 1e-3, 1e-8, 5).is_err());
    }
}
