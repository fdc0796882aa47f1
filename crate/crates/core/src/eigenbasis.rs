//! Weighted radial operator `L`, its inverse `T`, and the Galerkin eigenbasis.
//!
//! The operator is discretized in weak form with piecewise-linear elements:
//! the stiffness matrix is `β ∫ φ_i' φ_j' r dr` and the mass matrix is the
//! diagonal of hat weights for `r (1 - r²) dr`. The wall node `r = 1` carries
//! the Dirichlet condition; `r = 0` gets the natural condition `u'(0) = 0`
//! for free.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{ensure_len, Error, Result};
use crate::spaces::Discretization;
use crate::tridiag::Tridiagonal;

/// Stiffness and (lumped) mass on the full radial node set.
#[derive(Debug, Clone)]
pub struct RadialOperators {
    pub stiffness: Tridiagonal,
    pub mass: Vec<f64>,
}

impl RadialOperators {
    pub fn mass_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.mass))
    }
}

pub fn assemble_operators(disc: &Discretization, beta: f64) -> Result<RadialOperators> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("{beta} is not positive"),
        });
    }
    let nodes = &disc.radial_nodes;
    let n = nodes.len();
    if n < 3 {
        return Err(Error::InvalidGrid(format!("{n} radial nodes")));
    }
    let mut k = Tridiagonal::zeros(n);
    for e in 0..n - 1 {
        let (a, b) = (nodes[e], nodes[e + 1]);
        let h = b - a;
        if !(h > 0.0) {
            return Err(Error::InvalidGrid(format!("degenerate radial element {e}")));
        }
        // ∫_a^b r dr / h²
        let c = beta * 0.5 * (b * b - a * a) / (h * h);
        k.diag[e] += c;
        k.diag[e + 1] += c;
        k.upper[e] -= c;
        k.lower[e] -= c;
    }
    Ok(RadialOperators {
        stiffness: k,
        mass: disc.quad_w_rw.clone(),
    })
}

/// Eigenpairs of `T` and `L`, orthonormal in the `r (1 - r²)` inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    /// Ascending, for the diffusivity `beta`.
    pub eigenvalues: Vec<f64>,
    /// `eigenfunctions[j][i] = ω_j(r_i)`, with `ω_j(1) = 0`.
    pub eigenfunctions: Vec<Vec<f64>>,
    pub beta: f64,
    /// Quadrature weights of the inner product the basis is orthonormal in.
    pub mass: Vec<f64>,
}

impl EigenBasis {
    pub fn mode_count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_r(&self) -> usize {
        self.mass.len()
    }

    /// `λ_j / β`: the spectrum of the unit-diffusivity operator.
    pub fn unit_eigenvalue(&self, j: usize) -> f64 {
        self.eigenvalues[j] / self.beta
    }

    /// Same eigenfunctions, eigenvalues rescaled to another diffusivity.
    pub fn rescaled(&self, beta: f64) -> Self {
        let f = beta / self.beta;
        Self {
            eigenvalues: self.eigenvalues.iter().map(|l| l * f).collect(),
            eigenfunctions: self.eigenfunctions.clone(),
            beta,
            mass: self.mass.clone(),
        }
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.mass
            .iter()
            .zip(u)
            .zip(v)
            .map(|((w, a), b)| w * a * b)
            .sum()
    }

    /// Coefficients `⟨f, ω_j⟩` for every mode.
    pub fn project(&self, f: &[f64]) -> Result<Vec<f64>> {
        ensure_len(f.len(), self.n_r(), "projected function")?;
        Ok(self
            .eigenfunctions
            .iter()
            .map(|w| self.inner(f, w))
            .collect())
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_r()];
        for (c, w) in coeffs.iter().zip(&self.eigenfunctions) {
            for (o, x) in out.iter_mut().zip(w) {
                *o += c * x;
            }
        }
        out
    }

    /// `⟨1, ω_j⟩` for every mode.
    pub fn wall_moments(&self) -> Vec<f64> {
        self.eigenfunctions
            .iter()
            .map(|w| self.mass.iter().zip(w).map(|(m, x)| m * x).sum())
            .collect()
    }

    /// Max-norm residual of `K ω_j - λ_j M ω_j` over the free nodes.
    pub fn weak_residual(&self, ops: &RadialOperators, j: usize) -> f64 {
        let w = &self.eigenfunctions[j];
        let kw = ops.stiffness.matvec(w);
        (0..self.n_r() - 1)
            .map(|i| (kw[i] - self.eigenvalues[j] * ops.mass[i] * w[i]).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `j, lambda, ω_j(r_0), …` rows; `j` is one-based.
    pub fn write_csv<W: Write>(&self, radial_nodes: &[f64], mut out: W) -> std::io::Result<()> {
        write!(out, "j,lambda")?;
        for r in radial_nodes {
            write!(out, ",{r:.17e}")?;
        }
        writeln!(out)?;
        for (j, (l, w)) in self
            .eigenvalues
            .iter()
            .zip(&self.eigenfunctions)
            .enumerate()
        {
            write!(out, "{},{l:.17e}", j + 1)?;
            for x in w {
                write!(out, ",{x:.17e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// First `m` generalized eigenpairs of (stiffness, mass) with `u(1) = 0`.
///
/// The unit-diffusivity problem is solved once and its spectrum scaled by
/// `beta`, so bases for different diffusivities share eigenfunctions
/// exactly.
pub fn eigenpairs(disc: &Discretization, beta: f64, m: usize) -> Result<EigenBasis> {
    let n = disc.n_r();
    if m == 0 || m >= n - 2 {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: format!("mode count {m} must be in 1..{}", n - 2),
        });
    }
    let ops = assemble_operators(disc, 1.0)?;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("{beta} is not positive"),
        });
    }
    let free = n - 1;
    let inv_sqrt: Vec<f64> = ops.mass[..free].iter().map(|w| 1.0 / w.sqrt()).collect();
    let k = &ops.stiffness;
    let mut a = DMatrix::<f64>::zeros(free, free);
    for i in 0..free {
        a[(i, i)] = k.diag[i] * inv_sqrt[i] * inv_sqrt[i];
        if i + 1 < free {
            let v = k.upper[i] * inv_sqrt[i] * inv_sqrt[i + 1];
            a[(i, i + 1)] = v;
            a[(i + 1, i)] = v;
        }
    }
    let max_iterations = 100 * free;
    let eig = SymmetricEigen::try_new(a, f64::EPSILON, max_iterations).ok_or(
        Error::EigenNonConvergence {
            size: free,
            max_iterations,
        },
    )?;
    let mut order: Vec<usize> = (0..free).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));

    let mut eigenvalues = Vec::with_capacity(m);
    let mut eigenfunctions = Vec::with_capacity(m);
    for &col in order.iter().take(m) {
        let lambda = eig.eigenvalues[col];
        let mut w: Vec<f64> = (0..free)
            .map(|i| eig.eigenvectors[(i, col)] * inv_sqrt[i])
            .collect();
        w.push(0.0);
        if w[0] < 0.0 {
            w.iter_mut().for_each(|x| *x = -*x);
        }
        eigenvalues.push(lambda * beta);
        eigenfunctions.push(w);
    }
    if eigenvalues.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::EigenNonConvergence {
            size: free,
            max_iterations,
        });
    }
    Ok(EigenBasis {
        eigenvalues,
        eigenfunctions,
        beta,
        mass: ops.mass,
    })
}

/// `T(g)`: the weak solution of `L u = g r (1 - r²)` with `u(1) = 0`.
pub fn apply_t(g: &[f64], disc: &Discretization, beta: f64) -> Result<Vec<f64>> {
    ensure_len(g.len(), disc.n_r(), "argument of T")?;
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("argument of T"));
    }
    let ops = assemble_operators(disc, beta)?;
    let free = disc.n_r() - 1;
    let rhs: Vec<f64> = (0..free).map(|i| ops.mass[i] * g[i]).collect();
    let mut u = ops.stiffness.leading(free).solve(&rhs)?;
    u.push(0.0);
    Ok(u)
}

/// Best discrete constant `C` in `∫ u² r(1-r²) dr <= C ∫ u'² r dr`, i.e. `1/λ_1`.
pub fn poincare_sup(disc: &Discretization) -> Result<f64> {
    let basis = eigenpairs(disc, 1.0, 1)?;
    Ok(1.0 / basis.eigenvalues[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{build_discretization, build_discretization_with, RadialSpacing};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn stiffness_annihilates_constants() {
        let d = build_discretization(40, 3, 3, 1.0).unwrap();
        let ops = assemble_operators(&d, 1.7).unwrap();
        let k1 = ops.stiffness.matvec(&[1.0; 40]);
        assert!(k1.iter().all(|v| v.abs() < 1e-12));
        let s = ops.stiffness.to_dense();
        assert_eq!((&s - s.transpose()).amax(), 0.0);
        let one = vec![1.0; 40];
        let q: f64 = ops.mass.iter().zip(&one).map(|(m, u)| m * u * u).sum();
        assert!((q - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_beta() {
        let d = build_discretization(10, 3, 3, 1.0).unwrap();
        assert!(assemble_operators(&d, 0.0).is_err());
        assert!(eigenpairs(&d, -1.0, 2).is_err());
        assert!(eigenpairs(&d, 1.0, 8).is_err());
    }

    #[test]
    fn basis_is_orthonormal_and_satisfies_weak_form() {
        for spacing in [RadialSpacing::Uniform, RadialSpacing::ClusteredWall] {
            let d = build_discretization_with(128, 3, 3, 1.0, spacing).unwrap();
            let b = eigenpairs(&d, 1.3, 32).unwrap();
            let ops = assemble_operators(&d, 1.3).unwrap();
            for i in 0..32 {
                assert_eq!(b.eigenfunctions[i][127], 0.0);
                for j in 0..32 {
                    let g = b.inner(&b.eigenfunctions[i], &b.eigenfunctions[j]);
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((g - e).abs() < 1e-8, "{i},{j}: {g}");
                }
                assert!(b.weak_residual(&ops, i) < 1e-6);
            }
            assert!(b.eigenvalues.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn beta_scaling_is_exact() {
        let d = build_discretization(64, 3, 3, 1.0).unwrap();
        let b1 = eigenpairs(&d, 1.0, 10).unwrap();
        let b2 = eigenpairs(&d, 2.0, 10).unwrap();
        for j in 0..10 {
            assert_eq!(b2.eigenvalues[j], 2.0 * b1.eigenvalues[j]);
            assert_eq!(b2.eigenfunctions[j], b1.eigenfunctions[j]);
        }
        assert_eq!(b1.rescaled(2.0), b2);
    }

    #[test]
    fn rayleigh_bound_on_first_eigenvalue() {
        let d = build_discretization(256, 3, 3, 1.0).unwrap();
        for beta in [0.5, 1.0, 3.0] {
            let b = eigenpairs(&d, beta, 1).unwrap();
            assert!(1.0 / b.eigenvalues[0] <= 3.0 / 16.0 / beta);
        }
    }

    #[test]
    fn t_is_zero_on_zero_and_inverts_eigenpairs() {
        let d = build_discretization(96, 3, 3, 1.0).unwrap();
        assert!(apply_t(&[0.0; 96], &d, 1.0)
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
        let b = eigenpairs(&d, 1.0, 20).unwrap();
        for j in 0..20 {
            let t = apply_t(&b.eigenfunctions[j], &d, 1.0).unwrap();
            for (a, w) in t.iter().zip(&b.eigenfunctions[j]) {
                assert!((a * b.eigenvalues[j] - w).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn t_is_self_adjoint_and_positive() {
        let d = build_discretization(128, 3, 3, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = eigenpairs(&d, 1.0, 1).unwrap();
        for _ in 0..50 {
            let f = random_vec(&mut rng, 128);
            let g = random_vec(&mut rng, 128);
            let tf = apply_t(&f, &d, 1.0).unwrap();
            let tg = apply_t(&g, &d, 1.0).unwrap();
            assert!((b.inner(&tf, &g) - b.inner(&f, &tg)).abs() < 1e-10);
            assert!(b.inner(&tf, &f) > 0.0);
        }
    }

    #[test]
    fn projection_error_decreases_with_modes() {
        let d = build_discretization(128, 3, 3, 1.0).unwrap();
        let b = eigenpairs(&d, 1.0, 60).unwrap();
        let f = d.sample_radial(|r| (1.0 - r * r) * (1.0 + r).exp());
        let mut prev = f64::INFINITY;
        for m in [1, 2, 4, 8, 16, 32, 60] {
            let c = b.project(&f).unwrap();
            let g = b.synthesize(&c[..m]);
            let e: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a - b).collect();
            let err = b.inner(&e, &e).sqrt();
            assert!(err <= prev + 1e-15, "m={m}");
            prev = err;
        }
        assert!(prev < 5e-4, "{prev}");
    }

    #[test]
    fn poincare_constant_is_below_three_sixteenths() {
        let d = build_discretization(128, 3, 3, 1.0).unwrap();
        let c = poincare_sup(&d).unwrap();
        assert!(c > 0.0 && c <= 0.1875, "{c}");
    }

    #[test]
    fn csv_export_has_one_row_per_mode() {
        let d = build_discretization(8, 3, 3, 1.0).unwrap();
        let b = eigenpairs(&d, 1.0, 3).unwrap();
        let mut buf = Vec::new();
        b.write_csv(&d.radial_nodes, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("j,lambda,"));
        assert_eq!(lines[1].split(',').count(), 2 + 8);
    }
}
