use serde::{Deserialize, Serialize};

use crate::boundary::WallParams;
use crate::eigenbasis::{eigenpairs, EigenBasis};
use crate::error::{ensure_len, Error, Result};
use crate::kinetics::{Kinetics, ReactionModel, Sign};
use crate::spaces::{build_discretization_with, Discretization, RadialSpacing};

/// Initial or inlet profile on `[0, 1]`.
///
/// The bump shape depends on the axis it is sampled on: `(1 - r²)⁴` radially
/// and `sin²(π z)` axially. Both vanish at the wall inlet corner together
/// with the terms the channel and wall operators produce from them, so bump
/// data carry no corner singularity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Const(f64),
    Bump {
        base: f64,
        amp: f64,
    },
    /// Polynomial coefficients in increasing degree.
    Poly(Vec<f64>),
}

impl Profile {
    pub fn radial(&self, r: f64) -> f64 {
        match self {
            Profile::Const(c) => *c,
            Profile::Bump { base, amp } => base + amp * (1.0 - r * r).powi(4),
            Profile::Poly(c) => horner(c, r),
        }
    }

    pub fn axial(&self, z: f64) -> f64 {
        match self {
            Profile::Const(c) => *c,
            Profile::Bump { base, amp } => base + amp * (std::f64::consts::PI * z).sin().powi(2),
            Profile::Poly(c) => horner(c, z),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Profile::Const(c) => c.is_finite(),
            Profile::Bump { base, amp } => base.is_finite() && amp.is_finite(),
            Profile::Poly(c) => !c.is_empty() && c.iter().all(|v| v.is_finite()),
        }
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_r: usize,
    pub n_z: usize,
    pub n_t: usize,
    /// Number of eigenmodes.
    pub m: usize,
    #[serde(default)]
    pub radial: RadialSpacing,
}

/// Every constant, datum and grid size of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub beta_f: Vec<f64>,
    pub gamma_s: Vec<f64>,
    /// Axial diffusivity of the wall temperature (last component).
    pub theta_ns: f64,
    /// Regularizing diffusivities of components `1..N-1`.
    pub theta_reg: Vec<f64>,
    /// Kinetics and the signs `δ_i`.
    pub model: ReactionModel,
    pub inlet: Vec<Profile>,
    pub wall_init: Vec<Profile>,
    pub horizon: f64,
    pub grid: GridSpec,
}

/// Data sampled on the grids, ready for the solvers.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub disc: Discretization,
    /// Unit-diffusivity eigenbasis; the solvers scale by `β_if`.
    pub basis: EigenBasis,
    pub inlet: Vec<Vec<f64>>,
    pub beta_f: Vec<f64>,
    pub wall: WallParams,
    /// Whether the wall data were overridden for compatibility at `z = 0`.
    pub compatibility_overridden: bool,
}

fn positive(name: &'static str, v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter {
            name,
            reason: "every entry must be positive and finite".into(),
        });
    }
    Ok(())
}

impl ProblemSpec {
    /// Two components (one species and temperature), all constants one,
    /// clipped mass-action kinetics with unit rate, `T = 0.05`.
    pub fn reference() -> Self {
        Self {
            beta_f: vec![1.0, 1.0],
            gamma_s: vec![1.0, 1.0],
            theta_ns: 1.0,
            theta_reg: vec![1.0],
            model: ReactionModel {
                kinetics: Kinetics::ClippedMassAction(vec![1.0, 1.0]),
                signs: vec![Sign::Negative, Sign::Positive],
            },
            inlet: vec![
                Profile::Bump {
                    base: 0.8,
                    amp: 0.2,
                },
                Profile::Bump {
                    base: 0.5,
                    amp: 0.3,
                },
            ],
            wall_init: vec![
                Profile::Bump {
                    base: 0.8,
                    amp: -0.3,
                },
                Profile::Bump {
                    base: 0.5,
                    amp: 0.2,
                },
            ],
            horizon: 0.05,
            grid: GridSpec {
                n_r: 48,
                n_z: 49,
                n_t: 41,
                m: 12,
                radial: RadialSpacing::Uniform,
            },
        }
    }

    /// All data zero, zero kinetics.
    pub fn zero(n: usize) -> Self {
        let mut s = Self::reference();
        s.beta_f = vec![1.0; n];
        s.gamma_s = vec![1.0; n];
        s.theta_reg = vec![1.0; n - 1];
        s.model = ReactionModel::zero(n);
        s.inlet = vec![Profile::Const(0.0); n];
        s.wall_init = vec![Profile::Const(0.0); n];
        s
    }

    pub fn n_species(&self) -> usize {
        self.beta_f.len()
    }

    pub fn theta(&self) -> Vec<f64> {
        let mut t = self.theta_reg.clone();
        t.push(self.theta_ns);
        t
    }

    pub fn gamma_over_beta(&self) -> Vec<f64> {
        self.gamma_s
            .iter()
            .zip(&self.beta_f)
            .map(|(g, b)| g / b)
            .collect()
    }

    pub fn with_horizon(&self, horizon: f64) -> Self {
        Self {
            horizon,
            ..self.clone()
        }
    }

    pub fn with_theta_reg(&self, theta: f64) -> Self {
        Self {
            theta_reg: vec![theta; self.theta_reg.len()],
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_species();
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n_species",
                reason: "at least one component is required".into(),
            });
        }
        ensure_len(self.gamma_s.len(), n, "gamma_s")?;
        ensure_len(self.theta_reg.len(), n - 1, "theta_reg")?;
        ensure_len(self.model.n_species(), n, "delta")?;
        ensure_len(self.inlet.len(), n, "inlet")?;
        ensure_len(self.wall_init.len(), n, "wall_init")?;
        positive("beta_f", &self.beta_f)?;
        positive("gamma_s", &self.gamma_s)?;
        positive("theta_Ns", &[self.theta_ns])?;
        positive("horizon", &[self.horizon])?;
        if self.theta_reg.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::InvalidParameter {
                name: "theta_reg",
                reason: "entries must be nonnegative and finite".into(),
            });
        }
        if !self
            .inlet
            .iter()
            .chain(&self.wall_init)
            .all(Profile::is_finite)
        {
            return Err(Error::NonFinite("profile"));
        }
        // Re-validates rate constants against N.
        ReactionModel::new(self.model.kinetics.clone(), self.model.signs.clone())?;
        let g = &self.grid;
        if g.m == 0 || g.m + 2 >= g.n_r {
            return Err(Error::InvalidParameter {
                name: "grid.m",
                reason: format!(
                    "mode count {} must be in 1..{}",
                    g.m,
                    g.n_r.saturating_sub(2)
                ),
            });
        }
        Ok(())
    }

    pub fn discretization(&self) -> Result<Discretization> {
        let g = &self.grid;
        build_discretization_with(g.n_r, g.n_z, g.n_t, self.horizon, g.radial)
    }

    /// Samples the data, builds the basis and enforces `C_is0(0) = C_if0(1)`.
    pub fn prepare(&self) -> Result<Prepared> {
        self.validate()?;
        let disc = self.discretization()?;
        let basis = eigenpairs(&disc, 1.0, self.grid.m)?;
        self.prepare_with(disc, basis)
    }

    /// As [`ProblemSpec::prepare`] with a basis computed elsewhere.
    pub fn prepare_with(&self, disc: Discretization, basis: EigenBasis) -> Result<Prepared> {
        self.validate()?;
        let inlet: Vec<Vec<f64>> = self
            .inlet
            .iter()
            .map(|p| disc.sample_radial(|r| p.radial(r)))
            .collect();
        let mut u_s0: Vec<Vec<f64>> = self
            .wall_init
            .iter()
            .map(|p| disc.sample_axial(|z| p.axial(z)))
            .collect();
        let mut overridden = false;
        for (i, (w, f)) in u_s0.iter_mut().zip(&inlet).enumerate() {
            let wall = f[f.len() - 1];
            if w[0] != wall {
                if (w[0] - wall).abs() > 1e-12 * wall.abs().max(1.0) {
                    log::warn!(
                        "component {}: wall initial value {} at z = 0 differs from inlet wall value {}; using the inlet value",
                        i + 1,
                        w[0],
                        wall
                    );
                }
                w[0] = wall;
                overridden = true;
            }
        }
        let wall = WallParams {
            theta: self.theta(),
            gamma_over_beta: self.gamma_over_beta(),
            model: self.model.clone(),
            u_s0,
        };
        wall.validate(&disc)?;
        Ok(Prepared {
            disc,
            basis,
            inlet,
            beta_f: self.beta_f.clone(),
            wall,
            compatibility_overridden: overridden,
        })
    }
}
