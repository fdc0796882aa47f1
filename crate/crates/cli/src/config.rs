//! Run configuration: a flat TOML file with dotted keys.
//!
//! ```text
//! n_species = 2
//! beta_f = [1.0, 1.0]
//! gamma_s = [1.0, 1.0]
//! theta_Ns = 1.0
//! theta_reg = [1.0]
//! delta = [-1, 1]
//! kinetics.name = "clipped_mass_action"
//! kinetics.params = [1.0, 1.0]
//! inlet.shape = ["bump", "bump"]
//! inlet.params = [[0.8, 0.2], [0.5, 0.3]]
//! wall_init.shape = ["bump", "bump"]
//! wall_init.params = [[0.8, -0.3], [0.5, 0.2]]
//! horizon = 0.05
//! grid.n_r = 48
//! grid.n_z = 49
//! grid.n_t = 41
//! grid.m = 12
//! seed = 1
//! ```
//!
//! Optional keys: `grid.radial` (`"uniform"` or `"clustered_wall"`),
//! `tolerances.picard`, `tolerances.max_iter`, `tolerances.continuation`,
//! `continuation.thetas`, `sweep.horizons`, `audit.probe_pairs`,
//! `audit.epsilon`.

use std::fmt::Write as _;

use catconv::{GridSpec, Kinetics, Profile, ProblemSpec, RadialSpacing, ReactionModel, Sign};
use toml::{Table, Value};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub picard: f64,
    pub max_iter: usize,
    pub continuation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            picard: 1e-10,
            max_iter: 60,
            continuation: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub spec: ProblemSpec,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub thetas: Vec<f64>,
    pub sweep_horizons: Vec<f64>,
    pub probe_pairs: usize,
    pub epsilon: f64,
}

fn invalid(key: &str, reason: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// Typed access to a parsed table with full key paths in every error.
struct Reader<'a> {
    root: &'a Table,
}

impl<'a> Reader<'a> {
    fn lookup(&self, key: &str) -> Option<&'a Value> {
        let mut parts = key.split('.');
        let mut cur = self.root.get(parts.next()?)?;
        for p in parts {
            cur = cur.as_table()?.get(p)?;
        }
        Some(cur)
    }

    fn required(&self, key: &str) -> Result<&'a Value, CliError> {
        self.lookup(key).ok_or_else(|| invalid(key, "missing required key"))
    }

    fn float_of(key: &str, v: &Value) -> Result<f64, CliError> {
        let x = match v {
            Value::Float(f) => *f,
            Value::Integer(i) => *i as f64,
            _ => return Err(invalid(key, format!("expected a number, found {}", v.type_str()))),
        };
        if !x.is_finite() {
            return Err(invalid(key, "must be finite"));
        }
        Ok(x)
    }

    fn float(&self, key: &str) -> Result<f64, CliError> {
        Self::float_of(key, self.required(key)?)
    }

    fn float_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        self.lookup(key).map_or(Ok(default), |v| Self::float_of(key, v))
    }

    fn count_of(key: &str, v: &Value) -> Result<usize, CliError> {
        match v {
            Value::Integer(i) if *i >= 0 => Ok(*i as usize),
            Value::Integer(_) => Err(invalid(key, "must be nonnegative")),
            _ => Err(invalid(key, format!("expected an integer, found {}", v.type_str()))),
        }
    }

    fn count(&self, key: &str) -> Result<usize, CliError> {
        Self::count_of(key, self.required(key)?)
    }

    fn count_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        self.lookup(key).map_or(Ok(default), |v| Self::count_of(key, v))
    }

    fn array_of(key: &str, v: &'a Value) -> Result<&'a Vec<Value>, CliError> {
        v.as_array()
            .ok_or_else(|| invalid(key, format!("expected an array, found {}", v.type_str())))
    }

    fn floats_of(key: &str, v: &'a Value) -> Result<Vec<f64>, CliError> {
        Self::array_of(key, v)?
            .iter()
            .enumerate()
            .map(|(i, x)| Self::float_of(&format!("{key}[{i}]"), x))
            .collect()
    }

    fn floats(&self, key: &str) -> Result<Vec<f64>, CliError> {
        Self::floats_of(key, self.required(key)?)
    }

    fn floats_or(&self, key: &str, default: Vec<f64>) -> Result<Vec<f64>, CliError> {
        self.lookup(key).map_or(Ok(default), |v| Self::floats_of(key, v))
    }

    fn string(&self, key: &str) -> Result<&'a str, CliError> {
        let v = self.required(key)?;
        v.as_str()
            .ok_or_else(|| invalid(key, format!("expected a string, found {}", v.type_str())))
    }
}

fn sized(key: &str, v: Vec<f64>, n: usize) -> Result<Vec<f64>, CliError> {
    if v.len() != n {
        return Err(invalid(key, format!("expected {n} entries, found {}", v.len())));
    }
    Ok(v)
}

fn positive(key: &str, v: &[f64]) -> Result<(), CliError> {
    match v.iter().position(|x| *x <= 0.0) {
        Some(i) if v.len() > 1 => Err(invalid(&format!("{key}[{i}]"), "must be positive")),
        Some(_) => Err(invalid(key, "must be positive")),
        None => Ok(()),
    }
}

fn profiles(r: &Reader, prefix: &str, n: usize) -> Result<Vec<Profile>, CliError> {
    let shape_key = format!("{prefix}.shape");
    let params_key = format!("{prefix}.params");
    let shapes = Reader::array_of(&shape_key, r.required(&shape_key)?)?;
    let params = Reader::array_of(&params_key, r.required(&params_key)?)?;
    if shapes.len() != n {
        return Err(invalid(&shape_key, format!("expected {n} entries, found {}", shapes.len())));
    }
    if params.len() != n {
        return Err(invalid(&params_key, format!("expected {n} entries, found {}", params.len())));
    }
    shapes
        .iter()
        .zip(params)
        .enumerate()
        .map(|(i, (s, p))| {
            let sk = format!("{shape_key}[{i}]");
            let pk = format!("{params_key}[{i}]");
            let c = Reader::floats_of(&pk, p)?;
            match s.as_str() {
                Some("const") if c.len() == 1 => Ok(Profile::Const(c[0])),
                Some("bump") if c.len() == 2 => Ok(Profile::Bump { base: c[0], amp: c[1] }),
                Some("poly") if !c.is_empty() => Ok(Profile::Poly(c)),
                Some(name @ ("const" | "bump" | "poly")) => Err(invalid(
                    &pk,
                    format!("wrong parameter count {} for shape `{name}`", c.len()),
                )),
                _ => Err(invalid(&sk, "expected one of \"const\", \"bump\", \"poly\"")),
            }
        })
        .collect()
}

fn kinetics(r: &Reader, n: usize) -> Result<Kinetics, CliError> {
    let name = r.string("kinetics.name")?;
    let params = || -> Result<Vec<f64>, CliError> {
        let p = sized("kinetics.params", r.floats("kinetics.params")?, n)?;
        if p.iter().any(|k| *k < 0.0) {
            return Err(invalid("kinetics.params", "rate constants must be nonnegative"));
        }
        Ok(p)
    };
    match name {
        "zero" => Ok(Kinetics::Zero),
        "linear_chain" => Ok(Kinetics::LinearChain(params()?)),
        "clipped_mass_action" => Ok(Kinetics::ClippedMassAction(params()?)),
        "unclipped_mass_action" => Ok(Kinetics::UnclippedMassAction(params()?)),
        other => Err(invalid(
            "kinetics.name",
            format!(
                "unknown model `{other}`; expected zero, linear_chain, clipped_mass_action or unclipped_mass_action"
            ),
        )),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let root: Table = text.parse().map_err(|e: toml::de::Error| CliError::Parse(e.to_string()))?;
        let r = Reader { root: &root };

        let n = r.count("n_species")?;
        if n == 0 {
            return Err(invalid("n_species", "at least one component is required"));
        }
        let beta_f = sized("beta_f", r.floats("beta_f")?, n)?;
        positive("beta_f", &beta_f)?;
        let gamma_s = sized("gamma_s", r.floats("gamma_s")?, n)?;
        positive("gamma_s", &gamma_s)?;
        let theta_ns = r.float("theta_Ns")?;
        positive("theta_Ns", &[theta_ns])?;
        let theta_reg = sized("theta_reg", r.floats("theta_reg")?, n - 1)?;
        if let Some(i) = theta_reg.iter().position(|t| *t < 0.0) {
            return Err(invalid(&format!("theta_reg[{i}]"), "must be nonnegative"));
        }
        let delta = sized("delta", r.floats("delta")?, n)?;
        let signs = delta
            .iter()
            .enumerate()
            .map(|(i, d)| Sign::from_value(*d).ok_or_else(|| invalid(&format!("delta[{i}]"), "must be -1 or 1")))
            .collect::<Result<Vec<_>, _>>()?;
        let model = ReactionModel::new(kinetics(&r, n)?, signs).map_err(|e| invalid("kinetics.params", e.to_string()))?;
        let inlet = profiles(&r, "inlet", n)?;
        let wall_init = profiles(&r, "wall_init", n)?;
        let horizon = r.float("horizon")?;
        positive("horizon", &[horizon])?;

        let radial = match r.lookup("grid.radial") {
            None => RadialSpacing::Uniform,
            Some(v) => match v.as_str() {
                Some("uniform") => RadialSpacing::Uniform,
                Some("clustered_wall") => RadialSpacing::ClusteredWall,
                _ => return Err(invalid("grid.radial", "expected \"uniform\" or \"clustered_wall\"")),
            },
        };
        let grid = GridSpec {
            n_r: r.count("grid.n_r")?,
            n_z: r.count("grid.n_z")?,
            n_t: r.count("grid.n_t")?,
            m: r.count("grid.m")?,
            radial,
        };
        for (key, v) in [("grid.n_r", grid.n_r), ("grid.n_z", grid.n_z), ("grid.n_t", grid.n_t)] {
            if v < 3 {
                return Err(invalid(key, "need at least 3 nodes"));
            }
        }
        if grid.m == 0 || grid.m + 2 >= grid.n_r {
            return Err(invalid("grid.m", format!("must lie in 1..{}", grid.n_r - 2)));
        }

        let d = Tolerances::default();
        let tolerances = Tolerances {
            picard: r.float_or("tolerances.picard", d.picard)?,
            max_iter: r.count_or("tolerances.max_iter", d.max_iter)?,
            continuation: r.float_or("tolerances.continuation", d.continuation)?,
        };
        positive("tolerances.picard", &[tolerances.picard])?;
        positive("tolerances.continuation", &[tolerances.continuation])?;
        if tolerances.max_iter == 0 {
            return Err(invalid("tolerances.max_iter", "must be at least 1"));
        }
        let seed = match r.lookup("seed") {
            None => 0,
            Some(Value::Integer(i)) if *i >= 0 => *i as u64,
            Some(_) => return Err(invalid("seed", "expected a nonnegative integer")),
        };
        let thetas = r.floats_or("continuation.thetas", catconv::coupling::default_theta_sequence())?;
        if thetas.is_empty() || thetas.iter().any(|t| *t <= 0.0) || thetas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("continuation.thetas", "must be positive and strictly decreasing"));
        }
        let sweep_horizons = r.floats_or("sweep.horizons", (0..4).map(|k| horizon / f64::from(1 << k)).rev().collect())?;
        positive("sweep.horizons", &sweep_horizons)?;
        let probe_pairs = r.count_or("audit.probe_pairs", 4)?;
        let epsilon = r.float_or("audit.epsilon", 1e-2)?;
        positive("audit.epsilon", &[epsilon])?;

        let spec = ProblemSpec {
            beta_f,
            gamma_s,
            theta_ns,
            theta_reg,
            model,
            inlet,
            wall_init,
            horizon,
            grid,
        };
        spec.validate().map_err(|e| match e {
            catconv::Error::InvalidParameter { name, reason } => invalid(name, reason),
            other => invalid("config", other.to_string()),
        })?;
        Ok(Self {
            spec,
            tolerances,
            seed,
            thetas,
            sweep_horizons,
            probe_pairs,
            epsilon,
        })
    }

    /// The fully resolved configuration in the input format; parsing it
    /// yields `self` again.
    pub fn echo(&self) -> String {
        let s = &self.spec;
        let mut o = String::new();
        let list = |v: &[f64]| format!("[{}]", v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", "));
        let shapes = |p: &[Profile]| {
            let (names, params): (Vec<_>, Vec<_>) = p
                .iter()
                .map(|p| match p {
                    Profile::Const(c) => ("\"const\"", list(&[*c])),
                    Profile::Bump { base, amp } => ("\"bump\"", list(&[*base, *amp])),
                    Profile::Poly(c) => ("\"poly\"", list(c)),
                })
                .unzip();
            (format!("[{}]", names.join(", ")), format!("[{}]", params.join(", ")))
        };
        let delta: Vec<f64> = s.model.signs.iter().map(|d| d.value()).collect();
        let (inlet_shape, inlet_params) = shapes(&s.inlet);
        let (wall_shape, wall_params) = shapes(&s.wall_init);
        let _ = writeln!(o, "n_species = {}", s.n_species());
        let _ = writeln!(o, "beta_f = {}", list(&s.beta_f));
        let _ = writeln!(o, "gamma_s = {}", list(&s.gamma_s));
        let _ = writeln!(o, "theta_Ns = {:?}", s.theta_ns);
        let _ = writeln!(o, "theta_reg = {}", list(&s.theta_reg));
        let _ = writeln!(o, "delta = {}", list(&delta));
        let _ = writeln!(o, "kinetics.name = \"{}\"", s.model.kinetics.name());
        if !matches!(s.model.kinetics, Kinetics::Zero) {
            let _ = writeln!(o, "kinetics.params = {}", list(s.model.kinetics.rates()));
        }
        let _ = writeln!(o, "inlet.shape = {inlet_shape}");
        let _ = writeln!(o, "inlet.params = {inlet_params}");
        let _ = writeln!(o, "wall_init.shape = {wall_shape}");
        let _ = writeln!(o, "wall_init.params = {wall_params}");
        let _ = writeln!(o, "horizon = {:?}", s.horizon);
        let _ = writeln!(o, "grid.n_r = {}", s.grid.n_r);
        let _ = writeln!(o, "grid.n_z = {}", s.grid.n_z);
        let _ = writeln!(o, "grid.n_t = {}", s.grid.n_t);
        let _ = writeln!(o, "grid.m = {}", s.grid.m);
        let radial = match s.grid.radial {
            RadialSpacing::Uniform => "uniform",
            RadialSpacing::ClusteredWall => "clustered_wall",
        };
        let _ = writeln!(o, "grid.radial = \"{radial}\"");
        let _ = writeln!(o, "tolerances.picard = {:?}", self.tolerances.picard);
        let _ = writeln!(o, "tolerances.max_iter = {}", self.tolerances.max_iter);
        let _ = writeln!(o, "tolerances.continuation = {:?}", self.tolerances.continuation);
        let _ = writeln!(o, "continuation.thetas = {}", list(&self.thetas));
        let _ = writeln!(o, "sweep.horizons = {}", list(&self.sweep_horizons));
        let _ = writeln!(o, "audit.probe_pairs = {}", self.probe_pairs);
        let _ = writeln!(o, "audit.epsilon = {:?}", self.epsilon);
        let _ = writeln!(o, "seed = {}", self.seed);
        o
    }
}
