//! Brute-force finite-difference solve of the coupled system.
//!
//! The channel equation is discretized in strong conservative form on a
//! uniform radial grid and marched in `z` with Crank–Nicolson. The wall is
//! advanced with the implicit trapezoid rule and coupled through the raw
//! wall derivative `-γ ∂u_f/∂r(1)`, iterating every step to self-consistency.

use ndarray::{s, Array2, Array4};

use crate::coupling::{Prepared, ProblemSpec};
use crate::error::{Error, Result};
use crate::spaces::{BoundaryField, CylinderField, Discretization, RadialSpacing};
use crate::tridiag::solve_in_place;

pub const MAX_ORACLE_NODES: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Crank–Nicolson substeps per axial interval.
    pub z_substeps: usize,
    pub inner_tol: f64,
    pub max_inner: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            z_substeps: 4,
            inner_tol: 1e-10,
            max_inner: 200,
        }
    }
}

/// Off-diagonals of `(1 / (r (1 - r²))) (r u')'` on the unknowns `0..n-1`;
/// the last upper entry couples to the wall node.
struct RadialStencil {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl RadialStencil {
    fn new(n_r: usize) -> Self {
        let h = 1.0 / (n_r - 1) as f64;
        let m = n_r - 1;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        // Symmetry at r = 0: (1/r)(r u')' -> 2 u'' with a reflected ghost.
        diag[0] = -4.0 / (h * h);
        upper[0] = 4.0 / (h * h);
        for i in 1..m {
            let r = i as f64 * h;
            let w = 1.0 / (h * h * r * (1.0 - r * r));
            lower[i] = (r - 0.5 * h) * w;
            upper[i] = (r + 0.5 * h) * w;
            diag[i] = -(lower[i] + upper[i]);
        }
        Self { lower, diag, upper }
    }

    fn apply(&self, u: &[f64], wall: f64, out: &mut [f64]) {
        let m = self.diag.len();
        for i in 0..m {
            let left = if i > 0 { self.lower[i] * u[i - 1] } else { 0.0 };
            let right = if i + 1 < m { u[i + 1] } else { wall };
            out[i] = left + self.diag[i] * u[i] + self.upper[i] * right;
        }
    }
}

fn require_uniform(disc: &Discretization) -> Result<()> {
    if disc.spacing != RadialSpacing::Uniform {
        return Err(Error::InvalidGrid(
            "the oracle needs a uniform radial grid".into(),
        ));
    }
    Ok(())
}

fn guard(disc: &Discretization) -> Result<()> {
    let nodes = disc.n_r() * disc.n_z() * disc.n_t();
    if nodes > MAX_ORACLE_NODES {
        return Err(Error::InstanceTooLarge {
            nodes,
            limit: MAX_ORACLE_NODES,
        });
    }
    Ok(())
}

/// Marches one species at one time level; `wall[k]` is the wall value at
/// axial node `k`. Returns `[r, z]`.
fn march_column(
    stencil: &RadialStencil,
    inlet: &[f64],
    wall: &[f64],
    beta: f64,
    dz: f64,
    substeps: usize,
) -> Result<Array2<f64>> {
    let n_r = inlet.len();
    let m = n_r - 1;
    let nz = wall.len();
    let mut out = Array2::zeros((n_r, nz));
    // u_f(r, 0) = u_f0(r) - u_f0(1) + u_s(0)
    let mut u: Vec<f64> = inlet[..m].iter().map(|v| v - inlet[m] + wall[0]).collect();
    out.slice_mut(s![..m, 0])
        .iter_mut()
        .zip(&u)
        .for_each(|(o, v)| *o = *v);
    out[(m, 0)] = wall[0];
    let mut au = vec![0.0; m];
    let (mut lo, mut di, mut up) = (vec![0.0; m], vec![0.0; m], vec![0.0; m - 1]);
    let mut rhs = vec![0.0; m];
    let h = dz / substeps as f64;
    let mut first = true;
    for k in 0..nz - 1 {
        for s in 0..substeps {
            let wall_at = |frac: f64| wall[k] + (wall[k + 1] - wall[k]) * frac;
            // Two backward-Euler half steps damp the inlet corner layer.
            let plan: &[(f64, f64)] = if first {
                &[(0.5, 1.0), (0.5, 1.0)]
            } else {
                &[(1.0, 0.5)]
            };
            first = false;
            let mut frac0 = s as f64 / substeps as f64;
            for &(part, theta) in plan {
                let step = h * part * beta;
                let frac1 = frac0 + part / substeps as f64;
                let (w0, w1) = (wall_at(frac0), wall_at(frac1));
                stencil.apply(&u, w0, &mut au);
                for i in 0..m {
                    rhs[i] = u[i] + step * (1.0 - theta) * au[i];
                    di[i] = 1.0 - step * theta * stencil.diag[i];
                    if i + 1 < m {
                        up[i] = -step * theta * stencil.upper[i];
                    }
                    if i > 0 {
                        lo[i - 1] = -step * theta * stencil.lower[i];
                    }
                }
                rhs[m - 1] += step * theta * stencil.upper[m - 1] * w1;
                solve_in_place(&lo[..m - 1], &di, &up, &mut rhs)?;
                u.copy_from_slice(&rhs);
                frac0 = frac1;
            }
        }
        out.slice_mut(s![..m, k + 1])
            .iter_mut()
            .zip(&u)
            .for_each(|(o, v)| *o = *v);
        out[(m, k + 1)] = wall[k + 1];
    }
    Ok(out)
}

/// Channel field for given wall data, marched independently of the
/// eigenbasis. The inlet is `u_f0 - u_f0(1) + u_s(0, t)`.
pub fn march_cylinder(
    u_s: &BoundaryField,
    inlet: &[Vec<f64>],
    beta_f: &[f64],
    disc: &Discretization,
    opts: &OracleOptions,
) -> Result<CylinderField> {
    require_uniform(disc)?;
    guard(disc)?;
    let (ns, nz, nt) = u_s.values.dim();
    let stencil = RadialStencil::new(disc.n_r());
    let mut values = Array4::zeros((ns, disc.n_r(), nz, nt));
    for i in 0..ns {
        for n in 0..nt {
            let wall: Vec<f64> = u_s.values.slice(s![i, .., n]).to_vec();
            let col = march_column(
                &stencil,
                &inlet[i],
                &wall,
                beta_f[i],
                disc.dz(),
                opts.z_substeps,
            )?;
            values.slice_mut(s![i, .., .., n]).assign(&col);
        }
    }
    CylinderField::from_values(values, disc)
}

/// `∂u/∂r(1)` by the second-order one-sided difference, `[species, z]`.
fn wall_derivative(cyl: &[Array2<f64>], h: f64) -> Array2<f64> {
    let ns = cyl.len();
    let (nr, nz) = cyl[0].dim();
    Array2::from_shape_fn((ns, nz), |(i, k)| {
        let c = &cyl[i];
        (3.0 * c[(nr - 1, k)] - 4.0 * c[(nr - 2, k)] + c[(nr - 3, k)]) / (2.0 * h)
    })
}

fn laplacian_neumann(u: &[f64], h: f64, out: &mut [f64]) {
    let n = u.len();
    out[0] = 2.0 * (u[1] - u[0]) / (h * h);
    for k in 1..n - 1 {
        out[k] = (u[k - 1] - 2.0 * u[k] + u[k + 1]) / (h * h);
    }
    out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) / (h * h);
}

/// Fully coupled solve of the regularized problem on the grids of `spec`.
pub fn solve_monolithic(spec: &ProblemSpec) -> Result<(CylinderField, BoundaryField)> {
    solve_monolithic_with(spec, &OracleOptions::default())
}

pub fn solve_monolithic_with(
    spec: &ProblemSpec,
    opts: &OracleOptions,
) -> Result<(CylinderField, BoundaryField)> {
    spec.validate()?;
    let disc = spec.discretization()?;
    require_uniform(&disc)?;
    guard(&disc)?;
    let prep = sample(spec, disc)?;
    let disc = &prep.disc;
    let (ns, nr, nz, nt) = (spec.n_species(), disc.n_r(), disc.n_z(), disc.n_t());
    let hr = 1.0 / (nr - 1) as f64;
    let dz = disc.dz();
    let dt = disc.dt();
    let stencil = RadialStencil::new(nr);
    let gamma = &spec.gamma_s;
    let theta = &prep.wall.theta;
    let model = &prep.wall.model;

    let march_all = |wall: &Array2<f64>| -> Result<Vec<Array2<f64>>> {
        (0..ns)
            .map(|i| {
                let w: Vec<f64> = wall.row(i).to_vec();
                march_column(
                    &stencil,
                    &prep.inlet[i],
                    &w,
                    spec.beta_f[i],
                    dz,
                    opts.z_substeps,
                )
            })
            .collect()
    };
    let forcing = |wall: &Array2<f64>, cyl: &[Array2<f64>]| -> Array2<f64> {
        let d = wall_derivative(cyl, hr);
        let mut f = Array2::zeros((ns, nz));
        let mut x = vec![0.0; ns];
        let mut r = vec![0.0; ns];
        for k in 0..nz {
            x.iter_mut().zip(wall.column(k)).for_each(|(a, b)| *a = *b);
            model.signed_rate_into(&x, &mut r);
            for i in 0..ns {
                f[(i, k)] = -gamma[i] * d[(i, k)] + r[i];
            }
        }
        f
    };

    let mut wall = Array2::zeros((ns, nz));
    for (i, p) in prep.wall.u_s0.iter().enumerate() {
        wall.row_mut(i).iter_mut().zip(p).for_each(|(a, b)| *a = *b);
    }
    let mut cyl_out = Array4::zeros((ns, nr, nz, nt));
    let mut wall_out = BoundaryField::zeros(ns, disc);
    let mut cyl = march_all(&wall)?;
    let store = |cyl_out: &mut Array4<f64>,
                 wall_out: &mut BoundaryField,
                 n: usize,
                 wall: &Array2<f64>,
                 cyl: &[Array2<f64>]| {
        wall_out.values.slice_mut(s![.., .., n]).assign(wall);
        for (i, c) in cyl.iter().enumerate() {
            cyl_out.slice_mut(s![i, .., .., n]).assign(c);
        }
    };
    store(&mut cyl_out, &mut wall_out, 0, &wall, &cyl);

    let mut lap = vec![0.0; nz];
    let mut rhs = vec![0.0; nz];
    for n in 0..nt - 1 {
        let f0 = forcing(&wall, &cyl);
        let mut explicit = Array2::zeros((ns, nz));
        for i in 0..ns {
            let row: Vec<f64> = wall.row(i).to_vec();
            laplacian_neumann(&row, dz, &mut lap);
            for k in 0..nz {
                explicit[(i, k)] = row[k] + 0.5 * dt * (theta[i] * lap[k] + f0[(i, k)]);
            }
        }
        let mut guess = wall.clone();
        let mut guess_cyl = cyl.clone();
        let mut change = f64::INFINITY;
        for _ in 0..opts.max_inner {
            let f1 = forcing(&guess, &guess_cyl);
            let mut next = Array2::zeros((ns, nz));
            for i in 0..ns {
                for k in 0..nz {
                    rhs[k] = explicit[(i, k)] + 0.5 * dt * f1[(i, k)];
                }
                if theta[i] > 0.0 {
                    let c = 0.5 * dt * theta[i] / (dz * dz);
                    let di = vec![1.0 + 2.0 * c; nz];
                    let mut lo = vec![-c; nz - 1];
                    let mut up = vec![-c; nz - 1];
                    up[0] = -2.0 * c;
                    lo[nz - 2] = -2.0 * c;
                    solve_in_place(&lo, &di, &up, &mut rhs)?;
                }
                next.row_mut(i)
                    .iter_mut()
                    .zip(&rhs)
                    .for_each(|(a, b)| *a = *b);
            }
            change = (&next - &guess).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !change.is_finite() {
                break;
            }
            guess = next;
            guess_cyl = march_all(&guess)?;
            if change <= opts.inner_tol {
                break;
            }
        }
        if !(change <= opts.inner_tol) {
            return Err(Error::OracleNonConvergence {
                time: n + 1,
                change,
            });
        }
        wall = guess;
        cyl = guess_cyl;
        store(&mut cyl_out, &mut wall_out, n + 1, &wall, &cyl);
    }
    Ok((CylinderField::from_values(cyl_out, disc)?, wall_out))
}

/// Samples the problem data without building an eigenbasis.
fn sample(spec: &ProblemSpec, disc: Discretization) -> Result<Prepared> {
    let basis = crate::eigenbasis::EigenBasis {
        eigenvalues: Vec::new(),
        eigenfunctions: Vec::new(),
        beta: 1.0,
        mass: disc.quad_w_rw.clone(),
    };
    spec.prepare_with(disc, basis)
}
