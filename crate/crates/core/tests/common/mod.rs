#![allow(dead_code, clippy::needless_range_loop)]

use catconv::{BoundaryField, CylinderField, Discretization};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Relative error in `L²(r(1 - r²) dr dz dt)`.
pub fn rel_l2w(a: &CylinderField, b: &CylinderField, d: &Discretization) -> f64 {
    let wz = d.axial_weights();
    let wt = d.time_weights();
    let (ns, nr, nz, nt) = a.values.dim();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..ns {
        for r in 0..nr {
            for k in 0..nz {
                for n in 0..nt {
                    let w = d.quad_w_rw[r] * wz[k] * wt[n];
                    num += w * (a.values[(i, r, k, n)] - b.values[(i, r, k, n)]).powi(2);
                    den += w * b.values[(i, r, k, n)].powi(2);
                }
            }
        }
    }
    (num / den).sqrt()
}

/// Relative error in `L²(dz dt)`.
pub fn rel_l2_wall(a: &BoundaryField, b: &BoundaryField, d: &Discretization) -> f64 {
    let wz = d.axial_weights();
    let wt = d.time_weights();
    let (ns, nz, nt) = a.values.dim();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..ns {
        for k in 0..nz {
            for n in 0..nt {
                let w = wz[k] * wt[n];
                num += w * (a.values[(i, k, n)] - b.values[(i, k, n)]).powi(2);
                den += w * b.values[(i, k, n)].powi(2);
            }
        }
    }
    (num / den).sqrt()
}

/// A few random Fourier modes in `z`, modulated linearly in `t`.
pub fn random_wall(n_species: usize, d: &Discretization, rng: &mut impl Rng) -> BoundaryField {
    let modes: Vec<Vec<(f64, f64, f64)>> = (0..n_species)
        .map(|_| {
            (1..=3)
                .map(|k| {
                    (
                        rng.random_range(-1.0..1.0) / k as f64,
                        rng.random_range(0.0..std::f64::consts::TAU),
                        rng.random_range(-2.0..2.0),
                    )
                })
                .collect()
        })
        .collect();
    BoundaryField::from_fn(n_species, d, |i, z, t| {
        modes[i]
            .iter()
            .enumerate()
            .map(|(k, (a, p, s))| {
                a * (1.0 + s * t) * ((k + 1) as f64 * std::f64::consts::PI * z + p).sin()
            })
            .sum::<f64>()
    })
}

pub fn random_radial(d: &Discretization, rng: &mut impl Rng) -> Vec<f64> {
    let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
    d.sample_radial(|r| c[0] + c[1] * r * r + c[2] * r.powi(4) + c[3] * (3.0 * r).cos())
}
