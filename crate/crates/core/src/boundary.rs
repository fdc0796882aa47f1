//! The wall map `Φ`: flux source `G` to the wall field `u_s`.
//!
//! Each component solves `∂u/∂t - θ ∂²u/∂z² = -Γ G + δ r(u)` with
//! homogeneous Neumann ends. Diffusion is Crank–Nicolson, the reaction is
//! treated with Heun's predictor–corrector and the source with the trapezoid
//! rule in time. Components with `θ = 0` are advanced as pointwise ODEs.

use ndarray::{s, Array2, Array3, Axis};
use serde::{Deserialize, Serialize};

use crate::cylinder::{axial_derivative, flux_integral};
use crate::eigenbasis::EigenBasis;
use crate::error::{ensure_len, Error, Result};
use crate::kinetics::ReactionModel;
use crate::spaces::{norm_wz_t, BoundaryField, CylinderField, Discretization};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallParams {
    /// Axial diffusivities `θ_is`; the last one (temperature) is positive.
    pub theta: Vec<f64>,
    /// `Γ_i = γ_is / β_if`.
    pub gamma_over_beta: Vec<f64>,
    pub model: ReactionModel,
    /// Initial wall profiles on the axial grid.
    pub u_s0: Vec<Vec<f64>>,
}

impl WallParams {
    pub fn n_species(&self) -> usize {
        self.theta.len()
    }

    pub fn validate(&self, disc: &Discretization) -> Result<()> {
        let n = self.n_species();
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: "at least one component is required".into(),
            });
        }
        ensure_len(self.gamma_over_beta.len(), n, "gamma_over_beta")?;
        ensure_len(self.model.n_species(), n, "reaction model species")?;
        ensure_len(self.u_s0.len(), n, "initial wall profiles")?;
        if self.theta.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: "diffusivities must be finite and nonnegative".into(),
            });
        }
        if !(self.theta[n - 1] > 0.0) {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: "the temperature diffusivity must be positive".into(),
            });
        }
        if self
            .gamma_over_beta
            .iter()
            .any(|g| !(*g > 0.0 && g.is_finite()))
        {
            return Err(Error::InvalidParameter {
                name: "gamma_over_beta",
                reason: "must be positive".into(),
            });
        }
        for p in &self.u_s0 {
            ensure_len(p.len(), disc.n_z(), "initial wall profile")?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("initial wall profile"));
            }
        }
        Ok(())
    }
}

/// Lower, main and upper diagonals.
type Bands = (Vec<f64>, Vec<f64>, Vec<f64>);

/// `I - α D` with the ghost-node Neumann Laplacian `D`.
fn implicit_matrix(alpha: f64, h: f64, n: usize) -> Bands {
    let c = alpha / (h * h);
    let diag = vec![1.0 + 2.0 * c; n];
    let mut lower = vec![-c; n - 1];
    let mut upper = vec![-c; n - 1];
    upper[0] = -2.0 * c;
    lower[n - 2] = -2.0 * c;
    (lower, diag, upper)
}

/// `D u` with reflected ghost nodes.
fn laplacian(u: &[f64], h: f64, out: &mut [f64]) {
    let n = u.len();
    let h2 = h * h;
    out[0] = 2.0 * (u[1] - u[0]) / h2;
    for k in 1..n - 1 {
        out[k] = (u[k - 1] - 2.0 * u[k] + u[k + 1]) / h2;
    }
    out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) / h2;
}

struct Stepper<'a> {
    params: &'a WallParams,
    dt: f64,
    h: f64,
    matrices: Vec<Option<Bands>>,
}

impl<'a> Stepper<'a> {
    fn new(params: &'a WallParams, disc: &Discretization) -> Self {
        let dt = disc.dt();
        let h = disc.dz();
        let matrices = params
            .theta
            .iter()
            .map(|&th| (th > 0.0).then(|| implicit_matrix(0.5 * dt * th, h, disc.n_z())))
            .collect();
        Self {
            params,
            dt,
            h,
            matrices,
        }
    }

    fn reaction(&self, u: &Array2<f64>) -> Array2<f64> {
        let (ns, nz) = u.dim();
        let mut out = Array2::zeros((ns, nz));
        let mut x = vec![0.0; ns];
        let mut r = vec![0.0; ns];
        for k in 0..nz {
            x.iter_mut().zip(u.column(k)).for_each(|(a, b)| *a = *b);
            self.params.model.signed_rate_into(&x, &mut r);
            out.column_mut(k)
                .iter_mut()
                .zip(&r)
                .for_each(|(a, b)| *a = *b);
        }
        out
    }

    /// One step of `u' = θ D u + f` with the frozen forcing `f`.
    fn advance(&self, u: &Array2<f64>, forcing: &Array2<f64>) -> Result<Array2<f64>> {
        let (ns, nz) = u.dim();
        let mut next = Array2::zeros((ns, nz));
        let mut lap = vec![0.0; nz];
        let mut rhs = vec![0.0; nz];
        for i in 0..ns {
            let row = u.row(i);
            let f = forcing.row(i);
            match &self.matrices[i] {
                Some((lo, di, up)) => {
                    let col: Vec<f64> = row.to_vec();
                    laplacian(&col, self.h, &mut lap);
                    let a = 0.5 * self.dt * self.params.theta[i];
                    for k in 0..nz {
                        rhs[k] = col[k] + a * lap[k] + self.dt * f[k];
                    }
                    crate::tridiag::solve_in_place(lo, di, up, &mut rhs)?;
                    next.row_mut(i)
                        .iter_mut()
                        .zip(&rhs)
                        .for_each(|(a, b)| *a = *b);
                }
                None => {
                    for k in 0..nz {
                        next[(i, k)] = row[k] + self.dt * f[k];
                    }
                }
            }
        }
        Ok(next)
    }

    fn source(&self, g: &BoundaryField, n: usize) -> Array2<f64> {
        let g0 = g.values.index_axis(Axis(2), n);
        let g1 = g.values.index_axis(Axis(2), n + 1);
        let mut s = (&g0 + &g1) * 0.5;
        for (mut row, gb) in s.axis_iter_mut(Axis(0)).zip(&self.params.gamma_over_beta) {
            row.mapv_inplace(|v| -gb * v);
        }
        s
    }

    /// Returns the new state and the averaged reaction term it used.
    fn step(
        &self,
        u: &Array2<f64>,
        g: &BoundaryField,
        n: usize,
    ) -> Result<(Array2<f64>, Array2<f64>)> {
        let src = self.source(g, n);
        let r0 = self.reaction(u);
        let predicted = self.advance(u, &(&src + &r0))?;
        let r1 = self.reaction(&predicted);
        let rbar = (&r0 + &r1) * 0.5;
        Ok((self.advance(u, &(&src + &rbar))?, rbar))
    }
}

fn check(g: &BoundaryField, params: &WallParams, disc: &Discretization) -> Result<()> {
    params.validate(disc)?;
    ensure_len(g.n_species(), params.n_species(), "flux species")?;
    ensure_len(g.values.dim().1, disc.n_z(), "flux axial size")?;
    ensure_len(g.values.dim().2, disc.n_t(), "flux time size")?;
    if g.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("flux source"));
    }
    let k = params.model.lipschitz_k();
    let dt = disc.dt();
    if k * dt > 1.0 {
        return Err(Error::TimeStepTooLarge {
            dt,
            required: 1.0 / k,
        });
    }
    Ok(())
}

/// `Φ(G)`: the regularized wall system driven by the flux integral `G`.
pub fn solve_boundary(
    g: &BoundaryField,
    params: &WallParams,
    disc: &Discretization,
) -> Result<BoundaryField> {
    check(g, params, disc)?;
    let ns = params.n_species();
    let stepper = Stepper::new(params, disc);
    let mut out = BoundaryField::zeros(ns, disc);
    let mut u = Array2::zeros((ns, disc.n_z()));
    for (i, p) in params.u_s0.iter().enumerate() {
        u.row_mut(i).iter_mut().zip(p).for_each(|(a, b)| *a = *b);
    }
    out.values.slice_mut(s![.., .., 0]).assign(&u);
    for n in 0..disc.n_t() - 1 {
        let (next, _) = stepper.step(&u, g, n)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("wall step"));
        }
        out.values.slice_mut(s![.., .., n + 1]).assign(&next);
        u = next;
    }
    Ok(out)
}

/// Weak residual of every time step of a computed wall trajectory.
///
/// For step `n` this is the largest entry of
/// `M [(u^{n+1} - u^n)/Δt - θ D (u^n + u^{n+1})/2 + Γ Ḡ - δ r̄]`,
/// with `M` the trapezoid mass matrix, i.e. the discrete weak form tested
/// against every nodal hat function.
pub fn weak_step_residuals(
    u_s: &BoundaryField,
    g: &BoundaryField,
    params: &WallParams,
    disc: &Discretization,
) -> Result<Vec<f64>> {
    check(g, params, disc)?;
    let stepper = Stepper::new(params, disc);
    let mass = disc.axial_weights();
    let (ns, nz, nt) = u_s.values.dim();
    let dt = disc.dt();
    let h = disc.dz();
    let mut out = Vec::with_capacity(nt - 1);
    let (mut l0, mut l1) = (vec![0.0; nz], vec![0.0; nz]);
    for n in 0..nt - 1 {
        let u0 = u_s.values.slice(s![.., .., n]).to_owned();
        let u1 = u_s.values.slice(s![.., .., n + 1]);
        let src = stepper.source(g, n);
        let r0 = stepper.reaction(&u0);
        let pred = stepper.advance(&u0, &(&src + &r0))?;
        let rbar = (&r0 + &stepper.reaction(&pred)) * 0.5;
        let mut worst = 0.0f64;
        for i in 0..ns {
            let a: Vec<f64> = u0.row(i).to_vec();
            let b: Vec<f64> = u1.slice(s![i, ..]).to_vec();
            laplacian(&a, h, &mut l0);
            laplacian(&b, h, &mut l1);
            let th = params.theta[i];
            for k in 0..nz {
                let res =
                    (b[k] - a[k]) / dt - 0.5 * th * (l0[k] + l1[k]) - src[(i, k)] - rbar[(i, k)];
                worst = worst.max((mass[k] * res).abs());
            }
        }
        out.push(worst);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiProbeReport {
    pub horizons: Vec<f64>,
    /// `‖ΔΦ‖²_{W_z(T)} / ∫∫ ‖∂ΔU_f/∂z‖²_{W_r0'}` for each horizon.
    pub q: Vec<f64>,
    /// Least-squares fit `q(T) ≈ a T² + b T`.
    pub a: f64,
    pub b: f64,
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub nonnegative_within_noise: bool,
    pub monotone_increasing: bool,
    pub vanishing: bool,
}

/// Fits `y ≈ a x² + b x` and returns `(a, b, σ_a, σ_b)`.
pub(crate) fn fit_quadratic_through_origin(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let (mut s4, mut s3, mut s2, mut y2, mut y1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &q) in x.iter().zip(y) {
        s4 += t.powi(4);
        s3 += t.powi(3);
        s2 += t * t;
        y2 += q * t * t;
        y1 += q * t;
    }
    let det = s4 * s2 - s3 * s3;
    let a = (y2 * s2 - y1 * s3) / det;
    let b = (s4 * y1 - s3 * y2) / det;
    let dof = x.len().saturating_sub(2);
    if dof == 0 {
        return (a, b, 0.0, 0.0);
    }
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(&t, &q)| (q - a * t * t - b * t).powi(2))
        .sum();
    let s2res = ssr / dof as f64;
    (a, b, (s2res * s2 / det).sqrt(), (s2res * s4 / det).sqrt())
}

fn time_index(disc: &Discretization, horizon: f64) -> Result<usize> {
    let dt = disc.dt();
    let idx = (horizon / dt).round();
    if idx < 2.0
        || idx as usize >= disc.n_t()
        || (idx * dt - horizon).abs() > 1e-9 * horizon.max(dt)
    {
        return Err(Error::HorizonOffGrid(horizon));
    }
    Ok(idx as usize)
}

/// Measures the contraction of `Φ` against the dual norm of the axial
/// derivative of the cylinder difference, over several horizons.
///
/// `Φ` is causal, so one trajectory on the longest grid is truncated to each
/// horizon; every horizon must coincide with a time node.
pub fn contraction_probe_phi(
    u_f1: &CylinderField,
    u_f2: &CylinderField,
    params: &WallParams,
    disc: &Discretization,
    basis: &EigenBasis,
    horizons: &[f64],
) -> Result<PhiProbeReport> {
    if horizons.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "horizons",
            reason: "need at least two horizons".into(),
        });
    }
    if u_f1.values == u_f2.values {
        return Err(Error::ZeroDenominator);
    }
    let mut hs = horizons.to_vec();
    hs.sort_by(f64::total_cmp);
    let idx: Vec<usize> = hs
        .iter()
        .map(|&h| time_index(disc, h))
        .collect::<Result<_>>()?;

    let g1 = flux_integral(u_f1, disc, basis)?;
    let g2 = flux_integral(u_f2, disc, basis)?;
    let phi1 = solve_boundary(&g1, params, disc)?;
    let phi2 = solve_boundary(&g2, params, disc)?;
    let dphi = phi1.difference(&phi2);

    let dual = dual_density(&u_f1.difference(u_f2), disc, basis)?;
    let wz = disc.axial_weights();
    let mut q = Vec::with_capacity(hs.len());
    for &n in &idx {
        let d = disc.truncated_in_time(n)?;
        let wt = d.time_weights();
        let mut den = 0.0;
        for (p, w) in wt.iter().enumerate() {
            den += w * dual
                .column(p)
                .iter()
                .zip(&wz)
                .map(|(v, z)| v * z)
                .sum::<f64>();
        }
        if den == 0.0 {
            return Err(Error::ZeroDenominator);
        }
        let num = norm_wz_t(&dphi.truncated_in_time(n), &d).powi(2);
        q.push(num / den);
    }
    let (a, b, sigma_a, sigma_b) = fit_quadratic_through_origin(&hs, &q);
    let last = hs.len() - 1;
    Ok(PhiProbeReport {
        monotone_increasing: q.windows(2).all(|w| w[1] > w[0]),
        vanishing: q[0] <= hs[0] / hs[last] * q[last] * (1.0 + 1e-6),
        nonnegative_within_noise: a >= -2.0 * sigma_a && b >= -2.0 * sigma_b,
        horizons: hs,
        q,
        a,
        b,
        sigma_a,
        sigma_b,
    })
}

/// `Σ_i ‖∂u_i/∂z(·, z, t)‖²_{W_r0'}` on the `(z, t)` grid.
fn dual_density(
    du: &CylinderField,
    disc: &Discretization,
    basis: &EigenBasis,
) -> Result<Array2<f64>> {
    let (ns, _, nz, nt) = du.values.dim();
    let m = basis.mode_count();
    let moments = basis.wall_moments();
    let trace = BoundaryField {
        values: du.trace().to_owned(),
    };
    let dus = axial_derivative(&trace, disc);
    let mut out = Array2::zeros((nz, nt));
    let derivative_coeffs: Array3<f64> = match &du.modal {
        Some(modal) if modal.coeffs.dim().1 == m => {
            // Coefficients of ∂W/∂z + ∂U_s/∂z · 1.
            let mut c = Array3::zeros((m, nz, nt));
            for i in 0..ns {
                for j in 0..m {
                    let mut cj = c.index_axis_mut(Axis(0), j);
                    cj.assign(&modal.dcoeffs_dz.slice(s![i, j, .., ..]));
                    cj.scaled_add(moments[j], &dus.index_axis(Axis(0), i));
                }
                accumulate_dual(&c, basis, &mut out);
            }
            return Ok(out);
        }
        _ => Array3::zeros((m, nz, nt)),
    };
    let mut c = derivative_coeffs;
    let h = disc.dz();
    let mut col = vec![0.0; nz];
    let mut d = vec![0.0; nz];
    let nr = disc.n_r();
    for i in 0..ns {
        let mut deriv = ndarray::Array3::<f64>::zeros((nr, nz, nt));
        for r in 0..nr {
            for n in 0..nt {
                col.iter_mut()
                    .zip(du.values.slice(s![i, r, .., n]))
                    .for_each(|(c, v)| *c = *v);
                crate::spaces::nodal_derivative(&col, h, &mut d);
                deriv
                    .slice_mut(s![r, .., n])
                    .iter_mut()
                    .zip(&d)
                    .for_each(|(o, v)| *o = *v);
            }
        }
        for k in 0..nz {
            for n in 0..nt {
                let f: Vec<f64> = deriv.slice(s![.., k, n]).to_vec();
                let p = basis.project(&f)?;
                for j in 0..m {
                    c[(j, k, n)] = p[j];
                }
            }
        }
        accumulate_dual(&c, basis, &mut out);
    }
    Ok(out)
}

fn accumulate_dual(c: &Array3<f64>, basis: &EigenBasis, out: &mut Array2<f64>) {
    for (j, cj) in c.axis_iter(Axis(0)).enumerate() {
        let inv = 1.0 / basis.unit_eigenvalue(j);
        out.zip_mut_with(&cj, |o, v| *o += v * v * inv);
    }
}
