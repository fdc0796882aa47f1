mod common;

use catconv::{
    build_discretization, contraction_probe_phi, solve_boundary, solve_cylinder, verify_hypotheses,
    weak_step_residuals, BoundaryField, Kinetics, ProblemSpec, ReactionModel, Sign, WallParams,
};
use std::f64::consts::PI;

fn heat_params(theta: f64, u0: Vec<f64>) -> WallParams {
    WallParams {
        theta: vec![theta],
        gamma_over_beta: vec![1.0],
        model: ReactionModel::zero(1),
        u_s0: vec![u0],
    }
}

fn heat_error(theta: f64, horizon: f64, n_z: usize, n_t: usize) -> f64 {
    let d = build_discretization(3, n_z, n_t, horizon).unwrap();
    let p = heat_params(theta, d.sample_axial(|z| (PI * z).cos()));
    let u = solve_boundary(&BoundaryField::zeros(1, &d), &p, &d).unwrap();
    let mut err = 0.0f64;
    for (n, t) in d.time_nodes.iter().enumerate() {
        for (k, z) in d.axial_nodes.iter().enumerate() {
            let exact = (-theta * PI * PI * t).exp() * (PI * z).cos();
            err = err.max((u.values[(0, k, n)] - exact).abs());
        }
    }
    err
}

#[test]
fn neumann_heat_mode_decays_at_the_exact_rate() {
    let err = heat_error(0.1, 0.1, 129, 257);
    assert!(err <= 1e-4, "{err:e}");
}

#[test]
fn neumann_error_is_second_order_in_space() {
    // Time steps small enough that the spatial error dominates.
    let coarse = heat_error(1.0, 0.05, 17, 401);
    let fine = heat_error(1.0, 0.05, 33, 401);
    let ratio = coarse / fine;
    assert!((3.5..4.5).contains(&ratio), "{ratio}");
}

fn rk4(f: impl Fn(&[f64; 2]) -> [f64; 2], y0: [f64; 2], t: f64, steps: usize) -> [f64; 2] {
    let h = t / steps as f64;
    let mut y = y0;
    let add = |y: &[f64; 2], k: &[f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&add(&y, &k1, h / 2.0));
        let k3 = f(&add(&y, &k2, h / 2.0));
        let k4 = f(&add(&y, &k3, h));
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

#[test]
fn undiffused_rows_follow_the_scalar_ode() {
    let (horizon, n_t) = (0.5, 2049);
    let d = build_discretization(3, 9, n_t, horizon).unwrap();
    let model = ReactionModel::new(
        Kinetics::ClippedMassAction(vec![1.5, 0.7]),
        vec![Sign::Negative, Sign::Positive],
    )
    .unwrap();
    let (gamma, g0) = ([2.0, 0.5], [0.3, -0.2]);
    let p = WallParams {
        theta: vec![0.0, 0.8],
        gamma_over_beta: gamma.to_vec(),
        model: model.clone(),
        u_s0: vec![vec![0.9; 9], vec![0.4; 9]],
    };
    let g = BoundaryField::from_fn(2, &d, |i, _, _| g0[i]);
    let u = solve_boundary(&g, &p, &d).unwrap();
    let rhs = |y: &[f64; 2]| {
        let mut r = [0.0; 2];
        model.signed_rate_into(y, &mut r);
        [r[0] - gamma[0] * g0[0], r[1] - gamma[1] * g0[1]]
    };
    for n in [512, 1024, 2048] {
        let t = d.time_nodes[n];
        let y = rk4(rhs, [0.9, 0.4], t, 4 * n);
        for k in 0..9 {
            assert!((u.values[(0, k, n)] - y[0]).abs() <= 1e-6);
            assert!((u.values[(1, k, n)] - y[1]).abs() <= 1e-6);
        }
    }
}

#[test]
fn discrete_weak_form_holds_for_random_flux() {
    let d = build_discretization(3, 33, 33, 0.2).unwrap();
    let mut rng = common::rng(77);
    let g = common::random_wall(2, &d, &mut rng);
    let p = ProblemSpec::reference().prepare().unwrap().wall;
    let p = WallParams {
        u_s0: vec![
            d.sample_axial(|z| 0.8 - 0.3 * (PI * z).sin().powi(2)),
            d.sample_axial(|z| 0.5 + 0.1 * z),
        ],
        ..p
    };
    let u = solve_boundary(&g, &p, &d).unwrap();
    let res = weak_step_residuals(&u, &g, &p, &d).unwrap();
    assert!(res.iter().all(|r| r.abs() < 1e-10), "{res:?}");
}

#[test]
fn hypothesis_checker_separates_good_and_broken_kinetics() {
    let lower = [-1.0, -1.0, -1.0];
    let upper = [5.0, 5.0, 5.0];
    let signs = vec![Sign::Negative, Sign::Negative, Sign::Positive];
    for kin in [
        Kinetics::Zero,
        Kinetics::LinearChain(vec![1.0, 2.0, 0.5]),
        Kinetics::ClippedMassAction(vec![1.0, 2.0, 0.5]),
    ] {
        let m = ReactionModel::new(kin, signs.clone()).unwrap();
        let r = verify_hypotheses(&m, 10_000, &lower, &upper, 8).unwrap();
        assert!(r.passes, "{r:?}");
    }
    let broken =
        ReactionModel::new(Kinetics::UnclippedMassAction(vec![1.0, 2.0, 0.5]), signs).unwrap();
    let r = verify_hypotheses(&broken, 10_000, &lower, &upper, 8).unwrap();
    assert!(!r.passes && !r.lipschitz_ok);
}

#[test]
fn contraction_factor_vanishes_with_the_horizon() {
    let mut spec = ProblemSpec::reference();
    spec.horizon = 0.5;
    spec.grid.n_t = 129;
    let prep = spec.prepare().unwrap();
    let d = &prep.disc;
    let u1 = BoundaryField::from_fn(2, d, |i, z, t| {
        0.5 + 0.2 * (z * (2.0 + i as f64)).sin() * (1.0 + t)
    });
    let u2 = BoundaryField::from_fn(2, d, |_, z, t| 0.5 + 0.1 * (3.0 * z).cos() * (1.0 - t));
    let f1 = solve_cylinder(&u1, &prep.inlet, &prep.beta_f, d, &prep.basis).unwrap();
    let f2 = solve_cylinder(&u2, &prep.inlet, &prep.beta_f, d, &prep.basis).unwrap();
    let horizons: Vec<f64> = (1..=6).map(|k| 0.5f64.powi(k)).collect();
    let r = contraction_probe_phi(&f1, &f2, &prep.wall, d, &prep.basis, &horizons).unwrap();
    assert!(r.monotone_increasing, "{:?}", r.q);
    assert!(r.vanishing, "{:?}", r.q);
    assert!(r.nonnegative_within_noise, "a={} b={}", r.a, r.b);
    assert!(r.a >= -2.0 * r.sigma_a && r.b >= -2.0 * r.sigma_b);
    assert!(r.q.windows(2).all(|w| w[1] > w[0]));
}
