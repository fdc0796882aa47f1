//! Tridiagonal matrices and the Thomas algorithm.
//!
//! Every implicit step in the crate (the operator `T`, Crank–Nicolson wall
//! steps, the oracle's axial march) reduces to a tridiagonal solve.

use crate::error::{Error, Result};

/// A square tridiagonal matrix stored by diagonals.
///
/// `lower[i]` is entry `(i + 1, i)` and `upper[i]` is entry `(i, i + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            upper: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    /// Leading principal `k × k` block.
    pub fn leading(&self, k: usize) -> Self {
        Self {
            lower: self.lower[..k.saturating_sub(1)].to_vec(),
            diag: self.diag[..k].to_vec(),
            upper: self.upper[..k.saturating_sub(1)].to_vec(),
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.len();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.upper[i];
                m[(i + 1, i)] = self.lower[i];
            }
        }
        m
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = rhs.to_vec();
        solve_in_place(&self.lower, &self.diag, &self.upper, &mut x)?;
        Ok(x)
    }
}

/// Thomas algorithm; overwrites `rhs` with the solution.
///
/// No pivoting: callers only pass diagonally dominant or SPD systems.
pub fn solve_in_place(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    debug_assert_eq!(rhs.len(), n);
    if n == 0 {
        return Ok(());
    }
    let mut c = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::SingularSystem { row: 0 });
    }
    if n > 1 {
        c[0] = upper[0] / pivot;
    }
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularSystem { row: i });
        }
        if i + 1 < n {
            c[i] = upper[i] / pivot;
        }
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}
