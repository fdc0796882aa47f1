//! The cylinder map `Ψ`: wall data `u_s` to the channel field `u_f`.
//!
//! With `w_f = u_f - u_s` the radial problem has a homogeneous wall condition
//! and diagonalizes on the eigenbasis: every coefficient obeys
//! `ŵ_j' = -β λ_j ŵ_j - ⟨1, ω_j⟩ ∂u_s/∂z`, a scalar linear ODE in `z`. It is
//! integrated exactly for a piecewise-linear source, so stiff modes decay
//! without any step-size restriction.

use ndarray::{s, Array2, Array3, Array4, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigenbasis::EigenBasis;
use crate::error::{ensure_len, Error, Result};
use crate::spaces::{
    axial_gradient_energy, nodal_derivative, norm_wr_t, norm_wr_t_gradient, norm_wz_t,
    BoundaryField, CylinderField, Discretization, ModalForm,
};

/// `(1 - e^{-x}) / x` and `(x - 1 + e^{-x}) / x²`.
fn phi12(x: f64) -> (f64, f64) {
    if x < 1e-2 {
        let x2 = x * x;
        (
            1.0 - x / 2.0 + x2 / 6.0 - x2 * x / 24.0 + x2 * x2 / 120.0 - x2 * x2 * x / 720.0,
            0.5 - x / 6.0 + x2 / 24.0 - x2 * x / 120.0 + x2 * x2 / 720.0 - x2 * x2 * x / 5040.0,
        )
    } else {
        let em1 = -(-x).exp_m1();
        (em1 / x, (x - em1) / (x * x))
    }
}

/// `∂u_s/∂z` at every node, indexed `[species, z, t]`.
pub(crate) fn axial_derivative(u_s: &BoundaryField, disc: &Discretization) -> Array3<f64> {
    let (ns, nz, nt) = u_s.values.dim();
    let h = disc.dz();
    let mut out = Array3::zeros((ns, nz, nt));
    let mut col = vec![0.0; nz];
    let mut d = vec![0.0; nz];
    for i in 0..ns {
        for n in 0..nt {
            col.iter_mut()
                .zip(u_s.values.slice(s![i, .., n]))
                .for_each(|(c, v)| *c = *v);
            nodal_derivative(&col, h, &mut d);
            out.slice_mut(s![i, .., n])
                .iter_mut()
                .zip(&d)
                .for_each(|(o, v)| *o = *v);
        }
    }
    out
}

fn check_inputs(
    u_s: &BoundaryField,
    u_f0: &[Vec<f64>],
    beta_f: &[f64],
    disc: &Discretization,
) -> Result<()> {
    let ns = u_s.n_species();
    ensure_len(u_f0.len(), ns, "inlet profiles")?;
    ensure_len(beta_f.len(), ns, "beta_f")?;
    ensure_len(u_s.values.dim().1, disc.n_z(), "wall field axial size")?;
    ensure_len(u_s.values.dim().2, disc.n_t(), "wall field time size")?;
    for p in u_f0 {
        ensure_len(p.len(), disc.n_r(), "inlet profile")?;
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("inlet profile"));
        }
    }
    if u_s.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("wall field"));
    }
    if beta_f.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
        return Err(Error::InvalidParameter {
            name: "beta_f",
            reason: "must be positive".into(),
        });
    }
    Ok(())
}

/// Modal march only; `dus` is `∂u_s/∂z`.
pub(crate) fn march_modal(
    dus: &Array3<f64>,
    u_f0: &[Vec<f64>],
    beta_f: &[f64],
    disc: &Discretization,
    basis: &EigenBasis,
) -> Result<ModalForm> {
    let (ns, nz, nt) = dus.dim();
    let m = basis.mode_count();
    let dz = disc.dz();
    let moments = basis.wall_moments();

    let mut inlet = Vec::with_capacity(ns);
    for p in u_f0 {
        let wall = p[p.len() - 1];
        let w0: Vec<f64> = p.iter().map(|v| v - wall).collect();
        inlet.push(basis.project(&w0)?);
    }
    // Per species and mode: (decay rate, e^{-aΔ}, Δφ1, Δφ2).
    let steps: Vec<Vec<(f64, f64, f64, f64)>> = beta_f
        .iter()
        .map(|b| {
            (0..m)
                .map(|j| {
                    let a = b * basis.unit_eigenvalue(j);
                    let x = a * dz;
                    let (p1, p2) = phi12(x);
                    (a, (-x).exp(), dz * p1, dz * p2)
                })
                .collect()
        })
        .collect();

    let columns: Vec<(usize, usize, Array2<f64>, Array2<f64>)> = (0..ns * nt)
        .into_par_iter()
        .map(|idx| {
            let (i, n) = (idx / nt, idx % nt);
            let g = dus.slice(s![i, .., n]);
            let mut c = Array2::zeros((m, nz));
            let mut dc = Array2::zeros((m, nz));
            for j in 0..m {
                let (a, e, p1, p2) = steps[i][j];
                let cj = moments[j];
                let mut w = inlet[i][j];
                let mut src = -cj * g[0];
                c[(j, 0)] = w;
                dc[(j, 0)] = -a * w + src;
                for k in 1..nz {
                    let next = -cj * g[k];
                    w = e * w + src * p1 + (next - src) * p2;
                    src = next;
                    c[(j, k)] = w;
                    dc[(j, k)] = -a * w + src;
                }
            }
            (i, n, c, dc)
        })
        .collect();

    let mut coeffs = Array4::zeros((ns, m, nz, nt));
    let mut dcoeffs = Array4::zeros((ns, m, nz, nt));
    for (i, n, c, dc) in columns {
        if c.iter().chain(dc.iter()).any(|v| !v.is_finite()) {
            return Err(Error::UnstableMarch {
                species: i,
                time: n,
            });
        }
        coeffs.slice_mut(s![i, .., .., n]).assign(&c);
        dcoeffs.slice_mut(s![i, .., .., n]).assign(&dc);
    }
    Ok(ModalForm {
        coeffs,
        dcoeffs_dz: dcoeffs,
    })
}

/// `G_i = Σ_j ŵ_j' ⟨1, ω_j⟩ + ∂u_s/∂z · ⟨1, 1⟩`.
pub(crate) fn flux_from_modal(
    modal: &ModalForm,
    dus: &Array3<f64>,
    basis: &EigenBasis,
) -> BoundaryField {
    let moments = basis.wall_moments();
    let total: f64 = basis.mass.iter().sum();
    let mut g = dus * total;
    for (j, cj) in moments.iter().enumerate() {
        g.scaled_add(*cj, &modal.dcoeffs_dz.index_axis(Axis(1), j));
    }
    BoundaryField { values: g }
}

/// `Ψ(u_s)`: the channel field for wall data `u_s` and inlet profiles `u_f0`.
///
/// The inlet enters through `w_0 = u_f0 - u_f0(1)`, so the computed field
/// satisfies `u_f(r, 0, t) = P_m w_0(r) + u_s(0, t)` and matches `u_f0` when
/// the data are compatible, `u_s(0, t) = u_f0(1)`.
pub fn solve_cylinder(
    u_s: &BoundaryField,
    u_f0: &[Vec<f64>],
    beta_f: &[f64],
    disc: &Discretization,
    basis: &EigenBasis,
) -> Result<CylinderField> {
    check_inputs(u_s, u_f0, beta_f, disc)?;
    ensure_len(basis.n_r(), disc.n_r(), "basis radial size")?;
    let dus = axial_derivative(u_s, disc);
    let modal = march_modal(&dus, u_f0, beta_f, disc, basis)?;
    let (ns, m, nz, nt) = modal.coeffs.dim();
    let nr = disc.n_r();
    let omega = Array2::from_shape_fn((nr, m), |(r, j)| basis.eigenfunctions[j][r]);
    let mut values = Array4::zeros((ns, nr, nz, nt));
    for i in 0..ns {
        let c = modal
            .coeffs
            .index_axis(Axis(0), i)
            .to_owned()
            .into_shape_with_order((m, nz * nt))
            .expect("standard layout");
        let mut w = omega
            .dot(&c)
            .into_shape_with_order((nr, nz, nt))
            .expect("standard layout");
        w += &u_s.values.index_axis(Axis(0), i);
        values.index_axis_mut(Axis(0), i).assign(&w);
    }
    Ok(CylinderField {
        values,
        modal: Some(modal),
    })
}

/// `G_i(z, t) = ∫ ∂u_f/∂z r (1 - r²) dr` for every species.
///
/// Fields produced by [`solve_cylinder`] carry their modal form, whose axial
/// derivatives are exact; other fields fall back to nodal differences in `z`.
pub fn flux_integral(
    u_f: &CylinderField,
    disc: &Discretization,
    basis: &EigenBasis,
) -> Result<BoundaryField> {
    let (ns, nr, nz, nt) = u_f.values.dim();
    ensure_len(nr, disc.n_r(), "cylinder field radial size")?;
    ensure_len(nz, disc.n_z(), "cylinder field axial size")?;
    ensure_len(nt, disc.n_t(), "cylinder field time size")?;
    match &u_f.modal {
        Some(modal) if modal.coeffs.dim().1 == basis.mode_count() => {
            let trace = BoundaryField {
                values: u_f.trace().to_owned(),
            };
            let dus = axial_derivative(&trace, disc);
            Ok(flux_from_modal(modal, &dus, basis))
        }
        _ => {
            let h = disc.dz();
            let mut g = Array3::zeros((ns, nz, nt));
            let mut col = vec![0.0; nz];
            let mut d = vec![0.0; nz];
            for i in 0..ns {
                for r in 0..nr {
                    let w = disc.quad_w_rw[r];
                    for n in 0..nt {
                        col.iter_mut()
                            .zip(u_f.values.slice(s![i, r, .., n]))
                            .for_each(|(c, v)| *c = *v);
                        nodal_derivative(&col, h, &mut d);
                        g.slice_mut(s![i, .., n])
                            .iter_mut()
                            .zip(&d)
                            .for_each(|(o, v)| *o += w * v);
                    }
                }
            }
            Ok(BoundaryField { values: g })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiProbeReport {
    /// `‖Ψ(u_s1) - Ψ(u_s2)‖_{W_r(T)} / ‖u_s1 - u_s2‖_{W_z(T)}`
    pub full_ratio: f64,
    /// `∫∫∫ |∂ΔΨ/∂r|² r / ∫∫ |∂Δu_s/∂z|²`
    pub gradient_ratio: f64,
    /// `e / (8 inf β)` with a 5% allowance.
    pub gradient_bound: f64,
    pub within_bound: bool,
}

/// Measures the Lipschitz behaviour of `Ψ` on one pair of wall fields.
pub fn lipschitz_probe_psi(
    u_s1: &BoundaryField,
    u_s2: &BoundaryField,
    u_f0: &[Vec<f64>],
    beta_f: &[f64],
    disc: &Discretization,
    basis: &EigenBasis,
) -> Result<PsiProbeReport> {
    let du = u_s1.difference(u_s2);
    let den_full = norm_wz_t(&du, disc);
    if den_full == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let p1 = solve_cylinder(u_s1, u_f0, beta_f, disc, basis)?;
    let p2 = solve_cylinder(u_s2, u_f0, beta_f, disc, basis)?;
    let dp = p1.difference(&p2);
    let den_grad = axial_gradient_energy(&du, disc);
    let num_grad = norm_wr_t_gradient(&dp, disc);
    // A difference constant in z drives no radial profile at all.
    let gradient_ratio = if den_grad > 0.0 {
        num_grad / den_grad
    } else {
        0.0
    };
    let beta_min = beta_f.iter().copied().fold(f64::INFINITY, f64::min);
    let gradient_bound = std::f64::consts::E / (8.0 * beta_min) * 1.05;
    Ok(PsiProbeReport {
        full_ratio: norm_wr_t(&dp, disc) / den_full,
        gradient_ratio,
        gradient_bound,
        within_bound: gradient_ratio <= gradient_bound,
    })
}
