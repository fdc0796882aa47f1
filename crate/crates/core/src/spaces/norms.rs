use ndarray::{ArrayView1, Axis};

use super::{BoundaryField, CylinderField, Discretization, Measure};
use crate::eigenbasis::EigenBasis;
use crate::error::{ensure_len, Error, Result};

/// Relative tolerance on `|u(1)|` for membership in `W_r0`.
pub const WR0_TRACE_TOLERANCE: f64 = 1e-10;

/// `Σ w_i u_i v_i` under the chosen radial measure.
pub fn inner_weighted(
    u: &[f64],
    v: &[f64],
    measure: Measure,
    disc: &Discretization,
) -> Result<f64> {
    ensure_len(u.len(), disc.n_r(), "left operand")?;
    ensure_len(v.len(), disc.n_r(), "right operand")?;
    Ok(disc
        .weights(measure)
        .iter()
        .zip(u)
        .zip(v)
        .map(|((w, a), b)| w * a * b)
        .sum())
}

/// `∫ |u'|² r dr` for the piecewise-linear interpolant of `u`.
pub(crate) fn radial_gradient_sq<'a>(u: impl IntoIterator<Item = &'a f64>, nodes: &[f64]) -> f64 {
    let mut it = u.into_iter();
    let Some(mut prev) = it.next().copied() else {
        return 0.0;
    };
    let mut acc = 0.0;
    for (e, &next) in it.enumerate() {
        let (a, b) = (nodes[e], nodes[e + 1]);
        let slope = (next - prev) / (b - a);
        acc += slope * slope * 0.5 * (b * b - a * a);
        prev = next;
    }
    acc
}

/// `W_r0` norm `sqrt(∫ |u'|² r dr)`; rejects `u` with a non-zero wall value.
pub fn norm_wr0(u: &[f64], disc: &Discretization) -> Result<f64> {
    ensure_len(u.len(), disc.n_r(), "radial function")?;
    let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let trace = u[u.len() - 1].abs();
    let limit = WR0_TRACE_TOLERANCE * scale;
    if trace > limit {
        return Err(Error::NotInWr0 { trace, limit });
    }
    Ok(radial_gradient_sq(u, &disc.radial_nodes).sqrt())
}

/// Discrete `W_r0'` norm: `sqrt(Σ_j ⟨f, ω_j⟩² / λ_j)` over the modes of `basis`.
pub fn dual_norm(f: &[f64], basis: &EigenBasis) -> Result<f64> {
    if basis.mode_count() == 0 {
        return Err(Error::EmptyBasis);
    }
    let coeffs = basis.project(f)?;
    Ok(coeffs
        .iter()
        .zip(&basis.eigenvalues)
        .map(|(c, l)| c * c / l)
        .sum::<f64>()
        .sqrt())
}

/// `(∫∫ Σ|u|² dz dt, ∫∫ Σ|∂u/∂z|² dz dt)` per species selection.
fn axial_time_parts(
    field: &BoundaryField,
    disc: &Discretization,
    with_gradient: impl Fn(usize) -> bool,
) -> (f64, f64) {
    let wz = disc.axial_weights();
    let wt = disc.time_weights();
    let nodes = &disc.axial_nodes;
    let mut l2 = 0.0;
    let mut grad = 0.0;
    for (i, sp) in field.values.axis_iter(Axis(0)).enumerate() {
        for (n, col) in sp.axis_iter(Axis(1)).enumerate() {
            let col: ArrayView1<f64> = col;
            let v: f64 = col.iter().zip(&wz).map(|(u, w)| w * u * u).sum();
            l2 += wt[n] * v;
            if with_gradient(i) {
                let mut g = 0.0;
                for k in 0..nodes.len() - 1 {
                    let h = nodes[k + 1] - nodes[k];
                    let s = (col[k + 1] - col[k]) / h;
                    g += s * s * h;
                }
                grad += wt[n] * g;
            }
        }
    }
    (l2, grad)
}

/// `W_z(T)` norm of a wall field.
pub fn norm_wz_t(field: &BoundaryField, disc: &Discretization) -> f64 {
    let (l2, grad) = axial_time_parts(field, disc, |_| true);
    (l2 + grad).sqrt()
}

/// `W_z` norm at a single time index.
pub fn norm_wz(field: &BoundaryField, time: usize, disc: &Discretization) -> f64 {
    let one = field.values.index_axis(Axis(2), time);
    let nodes = &disc.axial_nodes;
    let wz = disc.axial_weights();
    let mut acc = 0.0;
    for row in one.axis_iter(Axis(0)) {
        acc += row.iter().zip(&wz).map(|(u, w)| w * u * u).sum::<f64>();
        for k in 0..nodes.len() - 1 {
            let h = nodes[k + 1] - nodes[k];
            let s = (row[k + 1] - row[k]) / h;
            acc += s * s * h;
        }
    }
    acc.sqrt()
}

/// Norm of `W̃_z(T)`: axial derivatives only for the last component.
pub fn norm_wtilde_t(field: &BoundaryField, disc: &Discretization) -> f64 {
    let last = field.n_species() - 1;
    let (l2, grad) = axial_time_parts(field, disc, |i| i == last);
    (l2 + grad).sqrt()
}

/// `∫∫∫ Σ|∂u/∂z|² dz dt` of a wall field.
pub fn axial_gradient_energy(field: &BoundaryField, disc: &Discretization) -> f64 {
    axial_time_parts(field, disc, |_| true).1
}

/// `∫∫∫ Σ|∂u/∂r|² r dr dz dt` of a cylinder field.
pub fn norm_wr_t_gradient(field: &CylinderField, disc: &Discretization) -> f64 {
    wr_t_parts(field, disc).1
}

fn wr_t_parts(field: &CylinderField, disc: &Discretization) -> (f64, f64) {
    let wz = disc.axial_weights();
    let wt = disc.time_weights();
    let (ns, _, nz, nt) = field.values.dim();
    let mut l2 = 0.0;
    let mut grad = 0.0;
    for i in 0..ns {
        for k in 0..nz {
            for n in 0..nt {
                let col = field.values.slice(ndarray::s![i, .., k, n]);
                let w = wz[k] * wt[n];
                l2 += w * col
                    .iter()
                    .zip(&disc.quad_w_rw)
                    .map(|(u, q)| q * u * u)
                    .sum::<f64>();
                grad += w * radial_gradient_sq(col.iter(), &disc.radial_nodes);
            }
        }
    }
    (l2, grad)
}

/// `W_r(T)` norm of a cylinder field.
pub fn norm_wr_t(field: &CylinderField, disc: &Discretization) -> f64 {
    let (l2, grad) = wr_t_parts(field, disc);
    (l2 + grad).sqrt()
}
