use std::sync::OnceLock;

use catconv::{
    apply_t, build_discretization, dual_norm, eigenpairs, evaluate, inner_weighted, norm_wr0,
    solve_boundary, solve_cylinder, BoundaryField, Discretization, EigenBasis, Kinetics, Measure,
    ReactionModel, Sign, WallParams,
};
use proptest::prelude::*;

struct Fixture {
    disc: Discretization,
    basis: EigenBasis,
}

fn radial() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let disc = build_discretization(128, 17, 5, 0.1).unwrap();
        let basis = eigenpairs(&disc, 1.0, 40).unwrap();
        Fixture { disc, basis }
    })
}

fn truncated(b: &EigenBasis, m: usize) -> EigenBasis {
    EigenBasis {
        eigenvalues: b.eigenvalues[..m].to_vec(),
        eigenfunctions: b.eigenfunctions[..m].to_vec(),
        ..b.clone()
    }
}

/// Smooth radial samples from a few random coefficients.
fn profile(d: &Discretization, c: &[f64]) -> Vec<f64> {
    d.sample_radial(|r| c[0] + c[1] * r * r + c[2] * (2.0 * r).sin() + c[3] * (5.0 * r).cos())
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cauchy_schwarz_in_both_measures(a in coeffs(), b in coeffs()) {
        let d = &radial().disc;
        let (u, v) = (profile(d, &a), profile(d, &b));
        for m in [Measure::R, Measure::RWeighted] {
            let uv = inner_weighted(&u, &v, m, d).unwrap();
            let uu = inner_weighted(&u, &u, m, d).unwrap();
            let vv = inner_weighted(&v, &v, m, d).unwrap();
            prop_assert!(uv.abs() <= (uu * vv).sqrt() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn poincare_inequality_for_functions_vanishing_at_the_wall(a in coeffs()) {
        let d = &radial().disc;
        let p = profile(d, &a);
        let wall = p[p.len() - 1];
        let u: Vec<f64> = p.iter().map(|v| v - wall).collect();
        prop_assume!(u.iter().any(|v| v.abs() > 1e-6));
        let l2 = inner_weighted(&u, &u, Measure::RWeighted, d).unwrap();
        let grad = norm_wr0(&u, d).unwrap();
        prop_assert!(l2 <= 0.1875 * grad * grad * 1.05);
    }

    #[test]
    fn dual_norm_is_monotone_in_the_mode_count(a in coeffs()) {
        let f = &radial();
        let g = profile(&f.disc, &a);
        let norms: Vec<f64> = [1, 2, 5, 10, 20, 40]
            .iter()
            .map(|&m| dual_norm(&g, &truncated(&f.basis, m)).unwrap())
            .collect();
        prop_assert!(norms.windows(2).all(|w| w[1] >= w[0]));
        let tail = norms[5] - norms[4];
        prop_assert!(tail <= 1e-2 * norms[5] + 1e-14);
    }

    #[test]
    fn t_is_positive(a in coeffs(), beta in 0.25f64..4.0) {
        let f = &radial();
        let g = profile(&f.disc, &a);
        let tg = apply_t(&g, &f.disc, beta).unwrap();
        let q = f.basis.inner(&tg, &g);
        prop_assert!(q >= -1e-12 * f.basis.inner(&g, &g));
    }

    #[test]
    fn evaluate_is_pure_and_clipped_rates_behave(x in prop::collection::vec(-3.0f64..3.0, 3),
                                                  y in prop::collection::vec(-3.0f64..3.0, 3)) {
        let m = ReactionModel::new(
            Kinetics::ClippedMassAction(vec![1.0, 0.5, 2.0]),
            vec![Sign::Negative, Sign::Negative, Sign::Positive],
        ).unwrap();
        let rx = evaluate(&m, &x).unwrap();
        prop_assert_eq!(&rx, &evaluate(&m, &x).unwrap());
        let ry = evaluate(&m, &y).unwrap();
        let dist = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        for (a, b) in rx.iter().zip(&ry) {
            prop_assert!(*a >= 0.0);
            prop_assert!((a - b).abs() <= m.lipschitz_k() * dist * (1.0 + 1e-12) + 1e-15);
        }
        if x.iter().any(|v| *v <= 0.0) {
            prop_assert!(rx.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn cylinder_trace_and_superposition(a in coeffs(), b in coeffs(), s in -1.0f64..1.0) {
        let f = &radial();
        let d = &f.disc;
        let basis = truncated(&f.basis, 12);
        let u1 = BoundaryField::from_fn(1, d, |_, z, t| a[0] + a[1] * z * z + s * t * (3.0 * z).sin());
        let u2 = BoundaryField::from_fn(1, d, |_, z, t| b[0] * (1.0 + t) + b[1] * z);
        let i1 = vec![profile(d, &a)];
        let i2 = vec![profile(d, &b)];
        let p1 = solve_cylinder(&u1, &i1, &[1.3], d, &basis).unwrap();
        let p2 = solve_cylinder(&u2, &i2, &[1.3], d, &basis).unwrap();
        let sum = BoundaryField { values: &u1.values + &u2.values };
        let isum = vec![i1[0].iter().zip(&i2[0]).map(|(x, y)| x + y).collect::<Vec<f64>>()];
        let ps = solve_cylinder(&sum, &isum, &[1.3], d, &basis).unwrap();
        let gap = (&ps.values - &(&p1.values + &p2.values)).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(gap <= 1e-10);
        let trace = (&p1.trace() - &u1.values).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(trace <= 1e-10);
    }

    #[test]
    fn wall_keeps_initial_data_and_neumann_slopes(c in coeffs(), theta in 0.1f64..2.0) {
        let d = build_discretization(3, 65, 33, 0.1).unwrap();
        let u0 = d.sample_axial(|z| c[0] + c[1] * (std::f64::consts::PI * z).cos() + c[2] * z * z * (1.0 - z).powi(2));
        let p = WallParams {
            theta: vec![theta],
            gamma_over_beta: vec![1.0],
            model: ReactionModel::zero(1),
            u_s0: vec![u0.clone()],
        };
        let g = BoundaryField::from_fn(1, &d, |_, z, t| c[3] * t * (2.0 * std::f64::consts::PI * z).cos());
        let u = solve_boundary(&g, &p, &d).unwrap();
        for (k, v) in u0.iter().enumerate() {
            prop_assert_eq!(u.values[(0, k, 0)].to_bits(), v.to_bits());
        }
        let h = d.dz();
        let scale = u.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for n in 1..d.n_t() {
            let col: Vec<f64> = (0..d.n_z()).map(|k| u.values[(0, k, n)]).collect();
            let left = (-3.0 * col[0] + 4.0 * col[1] - col[2]) / (2.0 * h);
            let nz = col.len();
            let right = (3.0 * col[nz - 1] - 4.0 * col[nz - 2] + col[nz - 3]) / (2.0 * h);
            prop_assert!(left.abs() <= 50.0 * h * h * scale && right.abs() <= 50.0 * h * h * scale,
                "{left} {right}");
        }
    }
}
