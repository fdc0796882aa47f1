//! Grids, quadrature and the weighted norms shared by every solver.
//!
//! Radial quantities live on the nodes of a piecewise-linear mesh of
//! `[0, 1]`. The quadrature weight attached to a node is the exact integral
//! of its hat function against the measure, so the discrete inner products
//! coincide with lumped Galerkin mass matrices.

mod fields;
mod norms;

pub use fields::{BoundaryField, CylinderField, ModalForm};
pub use norms::{
    axial_gradient_energy, dual_norm, inner_weighted, norm_wr0, norm_wr_t, norm_wr_t_gradient,
    norm_wtilde_t, norm_wz, norm_wz_t, WR0_TRACE_TOLERANCE,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The two radial measures of the weighted Lebesgue spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// `r dr`
    R,
    /// `r (1 - r²) dr`
    RWeighted,
}

impl Measure {
    pub fn density(self, r: f64) -> f64 {
        match self {
            Measure::R => r,
            Measure::RWeighted => r * (1.0 - r * r),
        }
    }
}

/// Placement of radial nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialSpacing {
    #[default]
    Uniform,
    /// `r_i = sin(π i / (2 (n - 1)))`, refined towards the wall at `r = 1`.
    ClusteredWall,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub radial_nodes: Vec<f64>,
    pub axial_nodes: Vec<f64>,
    pub time_nodes: Vec<f64>,
    /// Hat-function weights for `r dr`.
    pub quad_w_r: Vec<f64>,
    /// Hat-function weights for `r (1 - r²) dr`.
    pub quad_w_rw: Vec<f64>,
    pub spacing: RadialSpacing,
}

const GAUSS3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GAUSS3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Uniform grids in `r`, `z` and `t` with `t ∈ [0, horizon]`.
pub fn build_discretization(
    n_r: usize,
    n_z: usize,
    n_t: usize,
    horizon: f64,
) -> Result<Discretization> {
    build_discretization_with(n_r, n_z, n_t, horizon, RadialSpacing::Uniform)
}

pub fn build_discretization_with(
    n_r: usize,
    n_z: usize,
    n_t: usize,
    horizon: f64,
    spacing: RadialSpacing,
) -> Result<Discretization> {
    for (name, n) in [("n_r", n_r), ("n_z", n_z), ("n_t", n_t)] {
        if n < 3 {
            return Err(Error::InvalidGrid(format!(
                "{name} = {n}, need at least 3 nodes"
            )));
        }
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidGrid(format!(
            "horizon T = {horizon} must be positive"
        )));
    }
    let radial_nodes: Vec<f64> = match spacing {
        RadialSpacing::Uniform => uniform(n_r, 1.0),
        RadialSpacing::ClusteredWall => (0..n_r)
            .map(|i| {
                if i == n_r - 1 {
                    1.0
                } else {
                    (std::f64::consts::FRAC_PI_2 * i as f64 / (n_r - 1) as f64).sin()
                }
            })
            .collect(),
    };
    let quad_w_r = hat_weights(&radial_nodes, Measure::R);
    let quad_w_rw = hat_weights(&radial_nodes, Measure::RWeighted);
    Ok(Discretization {
        radial_nodes,
        axial_nodes: uniform(n_z, 1.0),
        time_nodes: uniform(n_t, horizon),
        quad_w_r,
        quad_w_rw,
        spacing,
    })
}

fn uniform(n: usize, end: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i == n - 1 {
                end
            } else {
                end * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Exact integrals of the nodal hat functions against a measure.
///
/// On each element the integrand is a polynomial of degree at most four, so
/// three-point Gauss–Legendre is exact.
fn hat_weights(nodes: &[f64], measure: Measure) -> Vec<f64> {
    let mut w = vec![0.0; nodes.len()];
    for e in 0..nodes.len() - 1 {
        let (a, b) = (nodes[e], nodes[e + 1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (xi, gw) in GAUSS3_NODES.iter().zip(GAUSS3_WEIGHTS) {
            let r = mid + half * xi;
            let rho = measure.density(r) * gw * half;
            let right = (r - a) / (b - a);
            w[e] += (1.0 - right) * rho;
            w[e + 1] += right * rho;
        }
    }
    w
}

impl Discretization {
    pub fn n_r(&self) -> usize {
        self.radial_nodes.len()
    }

    pub fn n_z(&self) -> usize {
        self.axial_nodes.len()
    }

    pub fn n_t(&self) -> usize {
        self.time_nodes.len()
    }

    pub fn horizon(&self) -> f64 {
        *self.time_nodes.last().expect("time grid is never empty")
    }

    pub fn dz(&self) -> f64 {
        self.axial_nodes[1] - self.axial_nodes[0]
    }

    pub fn dt(&self) -> f64 {
        self.time_nodes[1] - self.time_nodes[0]
    }

    pub fn weights(&self, measure: Measure) -> &[f64] {
        match measure {
            Measure::R => &self.quad_w_r,
            Measure::RWeighted => &self.quad_w_rw,
        }
    }

    /// Trapezoid weights on the axial grid.
    pub fn axial_weights(&self) -> Vec<f64> {
        trapezoid_weights(&self.axial_nodes)
    }

    /// Trapezoid weights on the time grid.
    pub fn time_weights(&self) -> Vec<f64> {
        trapezoid_weights(&self.time_nodes)
    }

    /// Copy of this discretization with the time grid cut at node `last`.
    pub fn truncated_in_time(&self, last: usize) -> Result<Self> {
        if last < 2 || last >= self.n_t() {
            return Err(Error::InvalidGrid(format!(
                "cannot truncate {} time nodes at index {last}",
                self.n_t()
            )));
        }
        let mut d = self.clone();
        d.time_nodes.truncate(last + 1);
        Ok(d)
    }

    /// Samples a radial profile at the radial nodes.
    pub fn sample_radial(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.radial_nodes.iter().map(|&r| f(r)).collect()
    }

    /// Samples an axial profile at the axial nodes.
    pub fn sample_axial(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.axial_nodes.iter().map(|&z| f(z)).collect()
    }
}

pub(crate) fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for e in 0..n - 1 {
        let h = nodes[e + 1] - nodes[e];
        w[e] += 0.5 * h;
        w[e + 1] += 0.5 * h;
    }
    w
}

/// Nodal derivative on a uniform grid: centred in the interior, second-order
/// one-sided at both ends.
pub(crate) fn nodal_derivative(values: &[f64], h: f64, out: &mut [f64]) {
    let n = values.len();
    debug_assert!(n >= 3);
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    for k in 1..n - 1 {
        out[k] = (values[k + 1] - values[k - 1]) / (2.0 * h);
    }
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
}
