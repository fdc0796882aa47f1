//! Reaction rates `r_i(C_1s, …, C_Ns)` on the wall.
//!
//! Every built-in family is globally Lipschitz, nonnegative and vanishes as
//! soon as one coordinate (temperature included) is zero. `verify_hypotheses`
//! tries to falsify those three properties by sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Positive,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Negative => -1.0,
            Sign::Positive => 1.0,
        }
    }

    pub fn from_value(v: f64) -> Option<Self> {
        if v == -1.0 {
            Some(Sign::Negative)
        } else if v == 1.0 {
            Some(Sign::Positive)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case")]
pub enum Kinetics {
    Zero,
    /// `r_i = k_i · min_j clamp(x_j, 0, 1)`
    LinearChain(Vec<f64>),
    /// `r_i = k_i · Π_j clamp(x_j, 0, 1)`
    ClippedMassAction(Vec<f64>),
    /// `r_i = k_i · Π_j max(x_j, 0)`: not globally Lipschitz, kept to
    /// exercise the hypothesis checker.
    UnclippedMassAction(Vec<f64>),
}

impl Kinetics {
    pub fn name(&self) -> &'static str {
        match self {
            Kinetics::Zero => "zero",
            Kinetics::LinearChain(_) => "linear_chain",
            Kinetics::ClippedMassAction(_) => "clipped_mass_action",
            Kinetics::UnclippedMassAction(_) => "unclipped_mass_action",
        }
    }

    pub fn rates(&self) -> &[f64] {
        match self {
            Kinetics::Zero => &[],
            Kinetics::LinearChain(k)
            | Kinetics::ClippedMassAction(k)
            | Kinetics::UnclippedMassAction(k) => k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionModel {
    pub kinetics: Kinetics,
    pub signs: Vec<Sign>,
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

impl ReactionModel {
    pub fn new(kinetics: Kinetics, signs: Vec<Sign>) -> Result<Self> {
        let n = signs.len();
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "signs",
                reason: "at least one species is required".into(),
            });
        }
        if !matches!(kinetics, Kinetics::Zero) {
            let k = kinetics.rates();
            ensure_len(k.len(), n, "rate constants")?;
            if k.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidParameter {
                    name: "kinetics.params",
                    reason: "rate constants must be finite and nonnegative".into(),
                });
            }
        }
        Ok(Self { kinetics, signs })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            kinetics: Kinetics::Zero,
            signs: vec![Sign::Positive; n],
        }
    }

    pub fn n_species(&self) -> usize {
        self.signs.len()
    }

    /// Documented global Lipschitz constant of each component.
    ///
    /// The clipped product has partial derivatives bounded by `k_i`, so
    /// `k_max · N` bounds it in any norm; the minimum of clamped coordinates
    /// is 1-Lipschitz. The unclipped product reports the same value as its
    /// clipped sibling, which is exactly what it fails to honour.
    pub fn lipschitz_k(&self) -> f64 {
        let kmax = self.kinetics.rates().iter().copied().fold(0.0, f64::max);
        match self.kinetics {
            Kinetics::Zero => 0.0,
            Kinetics::LinearChain(_) => kmax,
            Kinetics::ClippedMassAction(_) | Kinetics::UnclippedMassAction(_) => {
                kmax * self.n_species() as f64
            }
        }
    }

    /// `r(x)` without input validation; `out` has length `N`.
    pub fn rate_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.kinetics {
            Kinetics::Zero => out.fill(0.0),
            Kinetics::LinearChain(k) => {
                let m = x.iter().map(|&v| clamp01(v)).fold(1.0, f64::min);
                out.iter_mut().zip(k).for_each(|(o, k)| *o = k * m);
            }
            Kinetics::ClippedMassAction(k) => {
                let p: f64 = x.iter().map(|&v| clamp01(v)).product();
                out.iter_mut().zip(k).for_each(|(o, k)| *o = k * p);
            }
            Kinetics::UnclippedMassAction(k) => {
                let p: f64 = x.iter().map(|&v| v.max(0.0)).product();
                out.iter_mut().zip(k).for_each(|(o, k)| *o = k * p);
            }
        }
    }

    /// `δ_i r_i(x)`, the signed source on the wall.
    pub fn signed_rate_into(&self, x: &[f64], out: &mut [f64]) {
        self.rate_into(x, out);
        out.iter_mut()
            .zip(&self.signs)
            .for_each(|(o, s)| *o *= s.value());
    }
}

pub fn evaluate(model: &ReactionModel, x: &[f64]) -> Result<Vec<f64>> {
    ensure_len(x.len(), model.n_species(), "state vector")?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("state vector"));
    }
    let mut out = vec![0.0; x.len()];
    model.rate_into(x, &mut out);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub samples: usize,
    pub lipschitz_k: f64,
    /// `max_i |r_i(x) - r_i(y)| / |x - y|` over sampled pairs.
    pub max_lipschitz_ratio: f64,
    pub min_rate: f64,
    /// Largest `|r_i(x)|` over states with some `x_j = 0`.
    pub max_rate_at_zero: f64,
    pub lipschitz_ok: bool,
    pub nonnegative_ok: bool,
    pub vanishing_ok: bool,
    pub passes: bool,
}

/// Samples `sample_count` states in the box `lower[j] <= x_j <= upper[j]`.
///
/// Half of the Lipschitz pairs are independent draws, the other half local
/// perturbations, so both global growth and steep gradients are probed.
pub fn verify_hypotheses(
    model: &ReactionModel,
    sample_count: usize,
    lower: &[f64],
    upper: &[f64],
    seed: u64,
) -> Result<HypothesisReport> {
    let n = model.n_species();
    if sample_count == 0 {
        return Err(Error::InvalidParameter {
            name: "sample_count",
            reason: "need at least one sample".into(),
        });
    }
    ensure_len(lower.len(), n, "lower box bound")?;
    ensure_len(upper.len(), n, "upper box bound")?;
    if lower
        .iter()
        .zip(upper)
        .any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite())
    {
        return Err(Error::InvalidParameter {
            name: "box",
            reason: "bounds must be finite with lower <= upper".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        lower
            .iter()
            .zip(upper)
            .map(|(&a, &b)| if a == b { a } else { rng.random_range(a..=b) })
            .collect()
    };
    let (mut rx, mut ry) = (vec![0.0; n], vec![0.0; n]);
    let mut max_ratio = 0.0f64;
    let mut min_rate = f64::INFINITY;
    let mut max_zero = 0.0f64;
    for s in 0..sample_count {
        let x = draw(&mut rng);
        let y: Vec<f64> = if s % 2 == 0 {
            draw(&mut rng)
        } else {
            x.iter()
                .zip(lower.iter().zip(upper))
                .map(|(&v, (&a, &b))| {
                    (v + 1e-3 * (b - a).max(1e-6) * rng.random_range(-1.0..1.0)).clamp(a, b)
                })
                .collect()
        };
        model.rate_into(&x, &mut rx);
        model.rate_into(&y, &mut ry);
        min_rate = rx.iter().chain(&ry).copied().fold(min_rate, f64::min);
        let dist = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        if dist > 0.0 {
            let num = rx
                .iter()
                .zip(&ry)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            max_ratio = max_ratio.max(num / dist);
        }

        let mut z = draw(&mut rng);
        z[rng.random_range(0..n)] = 0.0;
        model.rate_into(&z, &mut rx);
        max_zero = rx.iter().map(|v| v.abs()).fold(max_zero, f64::max);
        min_rate = rx.iter().copied().fold(min_rate, f64::min);
    }
    let k = model.lipschitz_k();
    let lipschitz_ok = max_ratio <= k * (1.0 + 1e-9);
    let nonnegative_ok = min_rate >= 0.0;
    let vanishing_ok = max_zero == 0.0;
    Ok(HypothesisReport {
        samples: sample_count,
        lipschitz_k: k,
        max_lipschitz_ratio: max_ratio,
        min_rate,
        max_rate_at_zero: max_zero,
        lipschitz_ok,
        nonnegative_ok,
        vanishing_ok,
        passes: lipschitz_ok && nonnegative_ok && vanishing_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signs(n: usize) -> Vec<Sign> {
        vec![Sign::Negative; n]
    }

    #[test]
    fn clipped_product_by_hand() {
        let m = ReactionModel::new(Kinetics::ClippedMassAction(vec![1.0; 3]), signs(3)).unwrap();
        assert_eq!(evaluate(&m, &[0.5, 0.5, 0.5]).unwrap(), vec![0.125; 3]);
        assert_eq!(evaluate(&m, &[0.5, 0.0, 0.5]).unwrap(), vec![0.0; 3]);
        assert_eq!(evaluate(&m, &[3.0, 2.0, -1.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(evaluate(&m, &[3.0, 2.0, 0.25]).unwrap(), vec![0.25; 3]);
    }

    #[test]
    fn zero_model_is_zero() {
        let m = ReactionModel::zero(2);
        assert_eq!(evaluate(&m, &[7.0, -3.0]).unwrap(), vec![0.0, 0.0]);
        let r = verify_hypotheses(&m, 100, &[-1.0, -1.0], &[1.0, 1.0], 0).unwrap();
        assert_eq!(r.max_lipschitz_ratio, 0.0);
        assert!(r.passes);
    }

    #[test]
    fn evaluate_validates_input() {
        let m = ReactionModel::zero(2);
        assert!(matches!(
            evaluate(&m, &[1.0]),
            Err(Error::SizeMismatch { .. })
        ));
        assert!(matches!(
            evaluate(&m, &[1.0, f64::NAN]),
            Err(Error::NonFinite(_))
        ));
        assert!(ReactionModel::new(Kinetics::LinearChain(vec![1.0]), signs(2)).is_err());
        assert!(ReactionModel::new(Kinetics::LinearChain(vec![1.0, -1.0]), signs(2)).is_err());
    }

    #[test]
    fn built_in_models_pass() {
        for kin in [
            Kinetics::LinearChain(vec![2.0, 0.5, 1.0]),
            Kinetics::ClippedMassAction(vec![1.0, 3.0, 0.5]),
        ] {
            let m = ReactionModel::new(kin, signs(3)).unwrap();
            let r = verify_hypotheses(&m, 20_000, &[-2.0; 3], &[3.0; 3], 42).unwrap();
            assert!(r.passes, "{r:?}");
            assert!(r.max_lipschitz_ratio > 0.0);
        }
    }

    #[test]
    fn unclipped_product_breaks_lipschitz_on_large_box() {
        let m = ReactionModel::new(Kinetics::UnclippedMassAction(vec![1.0; 3]), signs(3)).unwrap();
        let r = verify_hypotheses(&m, 5_000, &[0.0; 3], &[10.0; 3], 1).unwrap();
        assert!(!r.lipschitz_ok);
        assert!(r.vanishing_ok && r.nonnegative_ok);
        assert!(!r.passes);
    }

    #[test]
    fn report_is_deterministic_in_seed() {
        let m = ReactionModel::new(Kinetics::ClippedMassAction(vec![1.0; 2]), signs(2)).unwrap();
        let a = verify_hypotheses(&m, 500, &[0.0; 2], &[1.0; 2], 9).unwrap();
        let b = verify_hypotheses(&m, 500, &[0.0; 2], &[1.0; 2], 9).unwrap();
        assert_eq!(a, b);
    }
}
