mod common;

use catconv::coupling::{apply_coupled_map, default_theta_sequence};
use catconv::{
    energy_audit, horizon_sweep, norm_wz_t, picard_iterate, picard_solve, stability_experiment,
    theta_continuation, BoundaryField, Kinetics, ProblemSpec, ReactionModel,
};

const TOL: f64 = 1e-10;

#[test]
fn picard_contracts_geometrically_on_the_reference() {
    let spec = ProblemSpec::reference();
    let sol = picard_solve(&spec, TOL, 60).unwrap();
    let r = &sol.report;
    assert!(r.converged);
    assert!(r.contraction_ratio < 1.0, "{r:?}");
    assert!(r.fit_r_squared >= 0.95, "{r:?}");
    assert!(r.fixed_point_residual <= TOL);
    let prep = spec.prepare().unwrap();
    let again = apply_coupled_map(&prep, &sol.u_s).unwrap();
    assert!(norm_wz_t(&again.difference(&sol.u_s), &prep.disc) <= TOL);
}

#[test]
fn shorter_horizon_contracts_faster() {
    let spec = ProblemSpec::reference();
    let long = picard_solve(&spec, TOL, 60)
        .unwrap()
        .report
        .contraction_ratio;
    let short = picard_solve(&spec.with_horizon(0.025), TOL, 60)
        .unwrap()
        .report
        .contraction_ratio;
    assert!(short < long, "{short} vs {long}");
}

#[test]
fn distinct_seeds_reach_the_same_fixed_point() {
    let spec = ProblemSpec::reference();
    let prep = spec.prepare().unwrap();
    let d = &prep.disc;
    let zeros = BoundaryField::zeros(2, d);
    let ones = BoundaryField::from_fn(2, d, |_, _, _| 1.0);
    let random = common::random_wall(2, d, &mut common::rng(99));
    let a = picard_iterate(&prep, Some(&zeros), TOL, 60).unwrap();
    let b = picard_iterate(&prep, Some(&ones), TOL, 60).unwrap();
    let c = picard_iterate(&prep, Some(&random), TOL, 60).unwrap();
    let base = picard_iterate(&prep, None, TOL, 60).unwrap();
    for s in [&a, &b, &c] {
        assert!(norm_wz_t(&s.u_s.difference(&base.u_s), d) <= 10.0 * TOL);
    }
    // The random seed is not a constant, so its first increment differs.
    assert_ne!(c.report.iterates[0], a.report.iterates[0]);
}

#[test]
fn contraction_ratio_grows_with_the_horizon() {
    let spec = ProblemSpec::reference();
    let sweep = horizon_sweep(&spec, &[0.0125, 0.025, 0.05, 0.1], TOL, 80).unwrap();
    assert!(sweep.iter().all(|e| e.converged));
    for w in sweep.windows(2) {
        assert!(
            w[1].contraction_ratio >= w[0].contraction_ratio,
            "{sweep:?}"
        );
    }
}

#[test]
fn energy_bound_holds_on_the_reference() {
    let spec = ProblemSpec::reference();
    let prep = spec.prepare().unwrap();
    let sol = picard_iterate(&prep, None, TOL, 60).unwrap();
    let a = energy_audit(&sol.u_s, &spec, &prep);
    assert!(a.energy_ok && a.energy_lhs > 0.0, "{a:?}");
    let c = &a.constants;
    assert!((a.energy_c_t - c.b_t * (c.d * spec.horizon).exp()).abs() <= 1e-14 * a.energy_c_t);
}

#[test]
fn energy_constant_d_is_linear_in_the_rate() {
    let spec = ProblemSpec::reference();
    let mut doubled = spec.clone();
    doubled.model.kinetics = Kinetics::ClippedMassAction(vec![2.0, 2.0]);
    let prep = spec.prepare().unwrap();
    let d1 = catconv::coupling::energy_constants(&spec, &prep).d;
    let d2 = catconv::coupling::energy_constants(&doubled, &doubled.prepare().unwrap()).d;
    assert_eq!(d2, 2.0 * d1);
}

#[test]
fn theta_continuation_is_cauchy_and_reaches_the_direct_solve() {
    let spec = ProblemSpec::reference();
    let (sols, rep) = theta_continuation(&spec, &default_theta_sequence(), 1e-3, TOL, 60).unwrap();
    assert_eq!(sols.len(), 8);
    assert_eq!(rep.distances.len(), 6);
    assert!(rep.monotone_decreasing, "{:?}", rep.distances);
    assert!(rep.final_gap <= 1e-3);
    assert!(rep.direct_gap <= 1e-3);
    assert!(rep.converged);
    assert!(rep.energy_ok && rep.energy.iter().all(|e| e.energy_ok));
}

#[test]
fn pure_diffusion_is_nonexpansive() {
    let mut spec = ProblemSpec::reference();
    spec.model = ReactionModel::zero(2);
    let r = stability_experiment(&spec, 1e-2, 1e-12, 80).unwrap();
    assert!(r.growth <= 1.1, "{r:?}");
    assert!(r.within_bound);
}

#[test]
fn perturbation_growth_obeys_gronwall() {
    let spec = ProblemSpec::reference();
    let k = spec.model.lipschitz_k();
    let r = stability_experiment(&spec, 1e-2, 1e-12, 80).unwrap();
    assert!(
        r.growth <= (2.0 * k * 2.0 * spec.horizon).exp() * 1.1,
        "{r:?}"
    );
    let half = stability_experiment(&spec, 5e-3, 1e-12, 80).unwrap();
    assert!((half.growth - r.growth).abs() / r.growth < 0.05);
    // Unit rate, two components, T = 0.1.
    let long = stability_experiment(&spec.with_horizon(0.1), 1e-2, 1e-12, 80).unwrap();
    assert!(long.growth <= 0.4f64.exp() * 1.1, "{long:?}");
    assert!(long.within_bound);
}
