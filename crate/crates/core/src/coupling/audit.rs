use ndarray::s;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::picard::{picard_iterate, Solution};
use super::problem::{Prepared, ProblemSpec};
use crate::boundary::{contraction_probe_phi, PhiProbeReport};
use crate::cylinder::{lipschitz_probe_psi, solve_cylinder, PsiProbeReport};
use crate::error::{Error, Result};
use crate::spaces::{BoundaryField, Discretization};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyConstants {
    pub a_t: f64,
    pub b_t: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub epsilon: f64,
    /// `sup_τ Σ ∫ W² dz / (ε² Σ ∫ bump² dz)`
    pub growth: f64,
    /// `e^{2 k N T}` with a 10% allowance.
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// `Σ ∫ C_is²(z, T) dz + Σ θ_is ∫∫ (∂C_is/∂z)² dz dt`
    pub energy_lhs: f64,
    #[serde(rename = "energy_c_T")]
    pub energy_c_t: f64,
    pub constants: EnergyConstants,
    pub energy_ok: bool,
    pub psi_ratios: Vec<PsiProbeReport>,
    pub phi_ratios: Vec<PhiProbeReport>,
    pub stability_growth: Option<StabilityReport>,
}

fn extrema(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(*x), hi.max(*x))
        })
}

/// `a(T)`, `b(T)` and `d` of the a-priori energy estimate.
pub fn energy_constants(spec: &ProblemSpec, prep: &Prepared) -> EnergyConstants {
    let disc = &prep.disc;
    let wz = disc.axial_weights();
    let ratio: Vec<f64> = spec
        .beta_f
        .iter()
        .zip(&spec.gamma_s)
        .map(|(b, g)| b / g)
        .collect();
    let (lo, hi) = extrema(&ratio);
    let inlet: f64 = prep
        .inlet
        .iter()
        .map(|p| {
            p.iter()
                .zip(&disc.quad_w_rw)
                .map(|(u, w)| w * u * u)
                .sum::<f64>()
        })
        .sum();
    let wall: f64 = prep
        .wall
        .u_s0
        .iter()
        .zip(&ratio)
        .map(|(p, q)| q * p.iter().zip(&wz).map(|(u, w)| w * u * u).sum::<f64>())
        .sum();
    let t = disc.horizon();
    let a_t = 0.5 * t * inlet + 0.5 * wall;
    let k = spec.model.lipschitz_k();
    EnergyConstants {
        a_t,
        b_t: 2.0 * a_t / lo,
        d: 2.0 * hi * k * spec.n_species() as f64 / lo,
    }
}

fn energy_lhs(u_s: &BoundaryField, theta: &[f64], disc: &Discretization) -> f64 {
    let wz = disc.axial_weights();
    let wt = disc.time_weights();
    let h = disc.dz();
    let last = disc.n_t() - 1;
    let mut acc = 0.0;
    for (i, th) in theta.iter().enumerate() {
        let fin = u_s.values.slice(s![i, .., last]);
        acc += fin.iter().zip(&wz).map(|(u, w)| w * u * u).sum::<f64>();
        if *th > 0.0 {
            for (n, w) in wt.iter().enumerate() {
                let col = u_s.values.slice(s![i, .., n]);
                let g: f64 = col
                    .windows(2)
                    .into_iter()
                    .map(|p| ((p[1] - p[0]) / h).powi(2) * h)
                    .sum();
                acc += th * w * g;
            }
        }
    }
    acc
}

/// Checks the energy estimate on a computed wall trajectory.
pub fn energy_audit(u_s: &BoundaryField, spec: &ProblemSpec, prep: &Prepared) -> AuditReport {
    let constants = energy_constants(spec, prep);
    let lhs = energy_lhs(u_s, &prep.wall.theta, &prep.disc);
    let c_t = constants.b_t * (constants.d * prep.disc.horizon()).exp();
    AuditReport {
        energy_lhs: lhs,
        energy_c_t: c_t,
        energy_ok: lhs <= c_t,
        constants,
        psi_ratios: Vec::new(),
        phi_ratios: Vec::new(),
        stability_growth: None,
    }
}

/// Perturbs every initial wall profile by `ε sin²(π z)` and measures the
/// growth of the wall difference against the Gronwall factor `e^{2 k N T}`.
pub fn stability_experiment(
    spec: &ProblemSpec,
    epsilon: f64,
    tol: f64,
    max_iter: usize,
) -> Result<StabilityReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "stability.epsilon",
            reason: "must be positive".into(),
        });
    }
    let base = spec.prepare()?;
    let mut perturbed = base.clone();
    let bump = base
        .disc
        .sample_axial(|z| (std::f64::consts::PI * z).sin().powi(2));
    for p in &mut perturbed.wall.u_s0 {
        p.iter_mut().zip(&bump).for_each(|(u, b)| *u += epsilon * b);
    }
    let s0 = picard_iterate(&base, None, tol, max_iter)?;
    let s1 = picard_iterate(&perturbed, None, tol, max_iter)?;
    Ok(growth_report(spec, &base.disc, &s0, &s1, &bump, epsilon))
}

fn growth_report(
    spec: &ProblemSpec,
    disc: &Discretization,
    s0: &Solution,
    s1: &Solution,
    bump: &[f64],
    epsilon: f64,
) -> StabilityReport {
    let wz = disc.axial_weights();
    let n = spec.n_species() as f64;
    let bump_sq: f64 = bump.iter().zip(&wz).map(|(b, w)| w * b * b).sum::<f64>() * n;
    let diff = s1.u_s.difference(&s0.u_s);
    let mut sup = 0.0f64;
    for t in 0..disc.n_t() {
        let e: f64 = diff
            .values
            .slice(s![.., .., t])
            .outer_iter()
            .map(|row| row.iter().zip(&wz).map(|(u, w)| w * u * u).sum::<f64>())
            .sum();
        sup = sup.max(e);
    }
    let growth = sup / (epsilon * epsilon * bump_sq);
    let bound = (2.0 * spec.model.lipschitz_k() * n * disc.horizon()).exp() * 1.1;
    StabilityReport {
        epsilon,
        growth,
        bound,
        within_bound: growth <= bound,
    }
}

/// Settings of [`full_audit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    /// Random wall-field pairs fed to the `Ψ` probe.
    pub probe_pairs: usize,
    /// Size of the initial-data perturbation; `None` skips the stability run.
    pub epsilon: Option<f64>,
    pub seed: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            probe_pairs: 4,
            epsilon: Some(1e-2),
            seed: 0,
        }
    }
}

/// Smooth random wall field: three axial Fourier modes per component with
/// amplitudes linear in `t`.
fn random_wall(n_species: usize, disc: &Discretization, rng: &mut ChaCha8Rng) -> BoundaryField {
    let modes: Vec<[(f64, f64, f64); 3]> = (0..n_species)
        .map(|_| {
            std::array::from_fn(|k| {
                (
                    rng.random_range(-1.0..1.0) / (k + 1) as f64,
                    rng.random_range(0.0..std::f64::consts::TAU),
                    rng.random_range(-1.0..1.0),
                )
            })
        })
        .collect();
    BoundaryField::from_fn(n_species, disc, |i, z, t| {
        modes[i]
            .iter()
            .enumerate()
            .map(|(k, (a, p, s))| {
                a * (1.0 + s * t) * ((k + 1) as f64 * std::f64::consts::PI * z + p).sin()
            })
            .sum()
    })
}

/// Horizons `T / 2^k` that fall on time nodes at least two steps in.
fn probe_horizons(disc: &Discretization) -> Vec<f64> {
    let mut steps = disc.n_t() - 1;
    let mut out = Vec::new();
    while steps >= 2 {
        out.push(disc.time_nodes[steps]);
        if steps % 2 == 1 {
            break;
        }
        steps /= 2;
    }
    out
}

/// Energy audit plus the `Ψ` and `Φ` probes and, optionally, the stability
/// experiment, all around the converged solution `sol`.
pub fn full_audit(
    spec: &ProblemSpec,
    prep: &Prepared,
    sol: &Solution,
    opts: &AuditOptions,
    tol: f64,
    max_iter: usize,
) -> Result<AuditReport> {
    let mut report = energy_audit(&sol.u_s, spec, prep);
    let disc = &prep.disc;
    let n = spec.n_species();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.probe_pairs {
        let a = random_wall(n, disc, &mut rng);
        let b = random_wall(n, disc, &mut rng);
        report.psi_ratios.push(lipschitz_probe_psi(
            &a,
            &b,
            &prep.inlet,
            &prep.beta_f,
            disc,
            &prep.basis,
        )?);
    }
    let horizons = probe_horizons(disc);
    if horizons.len() >= 2 {
        let shift = random_wall(n, disc, &mut rng);
        let other = BoundaryField {
            values: &sol.u_s.values + &(&shift.values * 0.1),
        };
        let f2 = solve_cylinder(&other, &prep.inlet, &prep.beta_f, disc, &prep.basis)?;
        report.phi_ratios.push(contraction_probe_phi(
            &sol.u_f,
            &f2,
            &prep.wall,
            disc,
            &prep.basis,
            &horizons,
        )?);
    } else {
        log::warn!("time grid admits fewer than two probe horizons; skipping the Φ probe");
    }
    if let Some(eps) = opts.epsilon {
        report.stability_growth = Some(stability_experiment(spec, eps, tol, max_iter)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::Profile;
    use crate::kinetics::Kinetics;

    #[test]
    fn zero_data_have_zero_energy() {
        let spec = ProblemSpec::zero(2);
        let prep = spec.prepare().unwrap();
        let u = BoundaryField::zeros(2, &prep.disc);
        let r = energy_audit(&u, &spec, &prep);
        assert_eq!(
            (r.constants.a_t, r.constants.b_t, r.energy_lhs),
            (0.0, 0.0, 0.0)
        );
        assert!(r.energy_ok);
    }

    #[test]
    fn unit_constants_by_hand() {
        // T/2 · 2 · ∫ r(1-r²) dr + 1/2 · 2 · ∫ 1 dz = T/4 + 1
        let mut spec = ProblemSpec::zero(2);
        spec.inlet = vec![Profile::Const(1.0); 2];
        spec.wall_init = vec![Profile::Const(1.0); 2];
        spec.model.kinetics = Kinetics::ClippedMassAction(vec![1.0, 1.0]);
        let prep = spec.prepare().unwrap();
        let c = energy_constants(&spec, &prep);
        assert!((c.a_t - (spec.horizon / 4.0 + 1.0)).abs() < 1e-12);
        assert!((c.b_t - 2.0 * c.a_t).abs() < 1e-15);
        let d1 = c.d;
        spec.model.kinetics = Kinetics::ClippedMassAction(vec![2.0, 2.0]);
        assert_eq!(energy_constants(&spec, &prep).d, 2.0 * d1);
    }

    #[test]
    fn probe_horizons_halve_until_odd() {
        let d = crate::spaces::build_discretization(3, 3, 41, 0.05).unwrap();
        let h = probe_horizons(&d);
        assert_eq!(h.len(), 4);
        assert!((h[3] - 0.05 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn full_audit_fills_every_section() {
        let spec = ProblemSpec::reference();
        let prep = spec.prepare().unwrap();
        let sol = picard_iterate(&prep, None, 1e-10, 60).unwrap();
        let opts = AuditOptions {
            probe_pairs: 2,
            ..Default::default()
        };
        let r = full_audit(&spec, &prep, &sol, &opts, 1e-10, 60).unwrap();
        assert_eq!(r.psi_ratios.len(), 2);
        assert!(r.psi_ratios.iter().all(|p| p.within_bound));
        assert_eq!(r.phi_ratios.len(), 1);
        assert!(r.stability_growth.as_ref().unwrap().within_bound);
        assert_eq!(r, full_audit(&spec, &prep, &sol, &opts, 1e-10, 60).unwrap());
    }

    #[test]
    fn rejects_nonpositive_epsilon() {
        assert!(stability_experiment(&ProblemSpec::zero(2), 0.0, 1e-8, 10).is_err());
    }
}
