//! Shooting reference for the radial eigenvalues.
//!
//! The strong form `β (r u')' + λ r (1 - r²) u = 0` is written as the first
//! order system `u' = p / (β r)`, `p' = -λ r (1 - r²) u`, started from its
//! power series at the regular singular point `r = 0` and integrated with the
//! explicit midpoint rule. Eigenvalues are the roots of `λ ↦ u(1; λ)`.

use crate::error::{Error, Result};

/// `(u, p)` at `r` from the even power series normalized by `u(0) = 1`.
fn series_start(r: f64, lambda: f64, beta: f64) -> (f64, f64) {
    // β (2k+2)² a_{2k+2} = -λ (a_{2k} - a_{2k-2})
    let r2 = r * r;
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut pow = 1.0;
    let (mut u, mut du) = (1.0, 0.0);
    for k in 0..60 {
        let m = 2.0 * k as f64 + 2.0;
        let next = -lambda * (cur - prev) / (beta * m * m);
        let term = next * pow * r2;
        u += term;
        // derivative of a_{m} r^{m} is m a_m r^{m-1}
        du += m * next * pow * r;
        pow *= r2;
        prev = cur;
        cur = next;
        if term.abs() < 1e-18 * u.abs() && k > 2 {
            break;
        }
    }
    (u, beta * r * du)
}

/// `u(1; λ)` with `n` uniform intervals.
fn shoot(lambda: f64, beta: f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let (mut u, mut p) = series_start(h, lambda, beta);
    let f = |r: f64, u: f64, p: f64| (p / (beta * r), -lambda * r * (1.0 - r * r) * u);
    for i in 1..n {
        let r = i as f64 * h;
        let (du, dp) = f(r, u, p);
        let (du2, dp2) = f(r + 0.5 * h, u + 0.5 * h * du, p + 0.5 * h * dp);
        u += h * du2;
        p += h * dp2;
    }
    u
}

fn eigenvalues_on(n: usize, beta: f64, j_max: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(j_max);
    let mut lo = 0.1 * beta;
    let mut f_lo = shoot(lo, beta, n);
    let cap = 1e8 * beta;
    while out.len() < j_max {
        let hi = lo * 1.02;
        if hi > cap {
            return Err(Error::BracketFailure {
                index: out.len() + 1,
            });
        }
        let f_hi = shoot(hi, beta, n);
        if f_lo == 0.0 || f_lo.signum() != f_hi.signum() {
            let (mut a, mut b, mut fa) = (lo, hi, f_lo);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let fm = shoot(mid, beta, n);
                if fm.signum() == fa.signum() && fm != 0.0 {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            out.push(0.5 * (a + b));
        }
        lo = hi;
        f_lo = f_hi;
    }
    Ok(out)
}

/// The first `j_max` eigenvalues from grids of `n_fine` and `2 n_fine`
/// intervals, combined by Richardson extrapolation.
pub fn eigen_oracle(n_fine: usize, beta: f64, j_max: usize) -> Result<Vec<f64>> {
    if n_fine < 16 {
        return Err(Error::InvalidParameter {
            name: "n_fine",
            reason: format!("{n_fine} intervals is too coarse"),
        });
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: "must be positive".into(),
        });
    }
    let coarse = eigenvalues_on(n_fine, beta, j_max)?;
    let fine = eigenvalues_on(2 * n_fine, beta, j_max)?;
    Ok(coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect())
}
