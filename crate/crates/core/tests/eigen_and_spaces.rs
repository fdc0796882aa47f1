mod common;

use catconv::oracle::eigen_oracle;
use catconv::{
    apply_t, assemble_operators, build_discretization, build_discretization_with, eigenpairs,
    inner_weighted, poincare_sup, Measure, RadialSpacing,
};
use rand::Rng;

#[test]
fn measure_masses_are_exact_on_every_grid() {
    for n in (3..40).chain([64, 128, 257, 1000]) {
        for spacing in [RadialSpacing::Uniform, RadialSpacing::ClusteredWall] {
            let d = build_discretization_with(n, 3, 3, 1.0, spacing).unwrap();
            let ones = vec![1.0; n];
            let rw = inner_weighted(&ones, &ones, Measure::RWeighted, &d).unwrap();
            let r = inner_weighted(&ones, &ones, Measure::R, &d).unwrap();
            assert!((rw - 0.25).abs() <= 1e-12, "n={n} {rw}");
            assert!((r - 0.5).abs() <= 1e-12, "n={n} {r}");
        }
    }
}

#[test]
fn poincare_constant_is_bounded_and_stable() {
    let c: Vec<f64> = [128, 256, 512]
        .iter()
        .map(|&n| poincare_sup(&build_discretization(n, 3, 3, 1.0).unwrap()).unwrap())
        .collect();
    for v in &c {
        assert!(*v <= 0.1875, "{c:?}");
    }
    for w in c.windows(2) {
        assert!((w[1] - w[0]).abs() / w[1] <= 5e-3, "{c:?}");
    }
}

#[test]
fn basis_is_orthonormal_with_thirty_two_modes() {
    let d = build_discretization(128, 3, 3, 1.0).unwrap();
    let b = eigenpairs(&d, 1.0, 32).unwrap();
    let mut defect: f64 = 0.0;
    for i in 0..32 {
        for j in 0..32 {
            let g = b.inner(&b.eigenfunctions[i], &b.eigenfunctions[j]);
            defect = defect.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    assert!(defect <= 1e-8, "{defect}");
    let ops = assemble_operators(&d, 1.0).unwrap();
    for j in 0..32 {
        assert!(b.weak_residual(&ops, j) <= 1e-8 * b.eigenvalues[j]);
    }
}

#[test]
fn first_eigenvalue_matches_shooting_oracle() {
    let lam = |n: usize| {
        let d = build_discretization(n, 3, 3, 1.0).unwrap();
        eigenpairs(&d, 1.0, 1).unwrap().eigenvalues[0]
    };
    let (coarse, fine) = (lam(129), lam(257));
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    let oracle = eigen_oracle(512, 1.0, 1).unwrap()[0];
    assert!(
        (extrapolated - oracle).abs() / oracle <= 1e-3,
        "{extrapolated} vs {oracle}"
    );
    assert!((fine - oracle).abs() / oracle <= 1e-3);
    assert!(oracle >= 16.0 / 3.0);
    assert!(fine >= 16.0 / 3.0);
}

#[test]
fn higher_eigenvalues_match_oracle() {
    let d = build_discretization(256, 3, 3, 1.0).unwrap();
    let b = eigenpairs(&d, 1.0, 4).unwrap();
    let oracle = eigen_oracle(512, 1.0, 4).unwrap();
    for (l, o) in b.eigenvalues.iter().zip(&oracle) {
        assert!((l - o).abs() / o <= 2e-3, "{l} vs {o}");
    }
}

#[test]
fn oracle_is_stable_under_doubling() {
    let a = eigen_oracle(512, 1.0, 3).unwrap();
    let b = eigen_oracle(1024, 1.0, 3).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() / y <= 1e-6, "{x} vs {y}");
    }
}

#[test]
fn oracle_scales_with_beta() {
    let a = eigen_oracle(128, 1.0, 3).unwrap();
    let b = eigen_oracle(128, 2.0, 3).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((y / x - 2.0).abs() <= 1e-10);
    }
}

#[test]
fn t_operator_on_random_pairs() {
    let d = build_discretization(128, 3, 3, 1.0).unwrap();
    let b = eigenpairs(&d, 1.0, 16).unwrap();
    let mut rng = common::rng(42);
    for _ in 0..100 {
        let beta = rng.random_range(0.5..2.0);
        let f = common::random_radial(&d, &mut rng);
        let g = common::random_radial(&d, &mut rng);
        let tf = apply_t(&f, &d, beta).unwrap();
        let tg = apply_t(&g, &d, beta).unwrap();
        let scale = b.inner(&f, &f).sqrt() * b.inner(&g, &g).sqrt();
        assert!((b.inner(&tf, &g) - b.inner(&f, &tg)).abs() <= 1e-10 * scale.max(1.0));
        assert!(b.inner(&tf, &f) >= -1e-10 * b.inner(&f, &f));
        assert_eq!(*tf.last().unwrap(), 0.0);
    }
    for j in 0..16 {
        let t = apply_t(&b.eigenfunctions[j], &d, 1.0).unwrap();
        let res = t
            .iter()
            .zip(&b.eigenfunctions[j])
            .map(|(a, w)| (a * b.eigenvalues[j] - w).abs())
            .fold(0.0, f64::max);
        assert!(res <= 1e-6, "j={j} {res}");
    }
}

#[test]
fn clustered_grid_agrees_with_uniform() {
    let u = eigenpairs(&build_discretization(256, 3, 3, 1.0).unwrap(), 1.0, 3).unwrap();
    let c = eigenpairs(
        &build_discretization_with(256, 3, 3, 1.0, RadialSpacing::ClusteredWall).unwrap(),
        1.0,
        3,
    )
    .unwrap();
    for (a, b) in u.eigenvalues.iter().zip(&c.eigenvalues) {
        assert!((a - b).abs() / a < 1e-3);
    }
}
