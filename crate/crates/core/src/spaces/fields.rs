use ndarray::{s, Array3, Array4, ArrayView2, ArrayView3};

use super::Discretization;
use crate::error::{ensure_len, Error, Result};

/// Wall data `u_s(z, t)` for all `N` components, indexed `[species, z, t]`.
///
/// Components `0..N-1` are surface concentrations, the last one is the wall
/// temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    pub values: Array3<f64>,
}

impl BoundaryField {
    pub fn zeros(n_species: usize, disc: &Discretization) -> Self {
        Self {
            values: Array3::zeros((n_species, disc.n_z(), disc.n_t())),
        }
    }

    pub fn from_values(values: Array3<f64>, disc: &Discretization) -> Result<Self> {
        let (_, nz, nt) = values.dim();
        ensure_len(nz, disc.n_z(), "boundary field axial size")?;
        ensure_len(nt, disc.n_t(), "boundary field time size")?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("boundary field"));
        }
        Ok(Self { values })
    }

    /// Extends axial profiles constantly in time.
    pub fn constant_in_time(profiles: &[Vec<f64>], disc: &Discretization) -> Result<Self> {
        let mut f = Self::zeros(profiles.len(), disc);
        for (i, p) in profiles.iter().enumerate() {
            ensure_len(p.len(), disc.n_z(), "axial profile")?;
            for (k, &v) in p.iter().enumerate() {
                f.values.slice_mut(s![i, k, ..]).fill(v);
            }
        }
        Ok(f)
    }

    /// Fills every node with `f(species, z, t)`.
    pub fn from_fn(
        n_species: usize,
        disc: &Discretization,
        f: impl Fn(usize, f64, f64) -> f64,
    ) -> Self {
        let values = Array3::from_shape_fn((n_species, disc.n_z(), disc.n_t()), |(i, k, n)| {
            f(i, disc.axial_nodes[k], disc.time_nodes[n])
        });
        Self { values }
    }

    pub fn n_species(&self) -> usize {
        self.values.dim().0
    }

    pub fn species(&self, i: usize) -> ArrayView2<'_, f64> {
        self.values.slice(s![i, .., ..])
    }

    pub fn at_time(&self, n: usize) -> ArrayView2<'_, f64> {
        self.values.slice(s![.., .., n])
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self {
            values: &self.values - &other.values,
        }
    }

    pub fn truncated_in_time(&self, last: usize) -> Self {
        Self {
            values: self.values.slice(s![.., .., ..=last]).to_owned(),
        }
    }
}

/// Modal representation `w_f = Σ_j ŵ_j ω_j` of the shifted cylinder unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalForm {
    /// `[species, mode, z, t]`
    pub coeffs: Array4<f64>,
    /// Axial derivative of each coefficient, from the modal equation.
    pub dcoeffs_dz: Array4<f64>,
}

/// Cylinder field `u_f(r, z, t)`, indexed `[species, r, z, t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderField {
    pub values: Array4<f64>,
    pub modal: Option<ModalForm>,
}

impl CylinderField {
    pub fn from_values(values: Array4<f64>, disc: &Discretization) -> Result<Self> {
        let (_, nr, nz, nt) = values.dim();
        ensure_len(nr, disc.n_r(), "cylinder field radial size")?;
        ensure_len(nz, disc.n_z(), "cylinder field axial size")?;
        ensure_len(nt, disc.n_t(), "cylinder field time size")?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("cylinder field"));
        }
        Ok(Self {
            values,
            modal: None,
        })
    }

    pub fn n_species(&self) -> usize {
        self.values.dim().0
    }

    /// Values at the wall node `r = 1`, indexed `[species, z, t]`.
    pub fn trace(&self) -> ArrayView3<'_, f64> {
        let nr = self.values.dim().1;
        self.values.slice(s![.., nr - 1, .., ..])
    }

    /// Nodal difference; the modal form is kept when both operands carry one.
    pub fn difference(&self, other: &Self) -> Self {
        let modal = match (&self.modal, &other.modal) {
            (Some(a), Some(b)) if a.coeffs.dim() == b.coeffs.dim() => Some(ModalForm {
                coeffs: &a.coeffs - &b.coeffs,
                dcoeffs_dz: &a.dcoeffs_dz - &b.dcoeffs_dz,
            }),
            _ => None,
        };
        Self {
            values: &self.values - &other.values,
            modal,
        }
    }

    pub fn truncated_in_time(&self, last: usize) -> Self {
        Self {
            values: self.values.slice(s![.., .., .., ..=last]).to_owned(),
            modal: self.modal.as_ref().map(|m| ModalForm {
                coeffs: m.coeffs.slice(s![.., .., .., ..=last]).to_owned(),
                dcoeffs_dz: m.dcoeffs_dz.slice(s![.., .., .., ..=last]).to_owned(),
            }),
        }
    }
}
