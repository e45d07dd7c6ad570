use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every tunable of the optimizer.
///
/// Field names are descriptive; [`SabresConfig::set`] also accepts the short
/// keys commonly used for them (`n`, `m`, `g0`, `p`, `gamma`, `tau_e`, `s_g`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SabresConfig {
    /// Number of trajectories (bins).
    pub trajectories: usize,
    /// Monte-Carlo realizations per trajectory.
    pub realizations: usize,
    /// Initial gain of the decreasing gain sequence.
    pub initial_gain: f64,
    /// Gain decay power; the gain at iteration `t` is `base / t^power`.
    pub gain_power: f64,
    /// Per-dimension Brownian noise intensity. `None` means 1% of the box width.
    pub noise_intensity: Option<Vec<f64>>,
    /// Iterations a triggered repulsive mutation stays active.
    pub perturbation_window: u64,
    /// Factor applied to the gain base on the first gain restart, and upper
    /// limit of the random factor on later restarts.
    pub gain_restart_scale: f64,
    /// The exploration trigger is only checked on multiples of this iteration count.
    pub explore_interval: u64,
    /// Probability that an eligible exploration check fires.
    pub explore_probability: f64,
    /// Exploration needs `var(newest) > ratio * var(oldest)` of population fitness.
    pub explore_variance_ratio: f64,
    /// The gain restarts when the current gain drops below this floor.
    pub gain_floor: f64,
    /// Objective evaluation budget.
    pub max_fes: u64,
    /// A run stops once its best error is at or below this value.
    pub target_error: f64,
    /// Enables the repulsive mutation.
    pub exploration: bool,
    /// Adds Brownian increments to every particle on every step.
    pub predict_diffusion: bool,
    /// Pairwise distances below this are clamped in the repulsion drift.
    pub repulsion_eps: f64,
    /// Drift magnitude cap as a fraction of the box width.
    pub drift_max_fraction: f64,
}

impl Default for SabresConfig {
    fn default() -> Self {
        Self {
            trajectories: 10,
            realizations: 10,
            initial_gain: 10.0,
            gain_power: 0.62,
            noise_intensity: None,
            perturbation_window: 5,
            gain_restart_scale: 2.0,
            explore_interval: 1000,
            explore_probability: 0.1,
            explore_variance_ratio: 0.5,
            gain_floor: 0.05,
            max_fes: 200_000,
            target_error: 1e-8,
            exploration: true,
            predict_diffusion: false,
            repulsion_eps: 1e-8,
            drift_max_fraction: 0.1,
        }
    }
}

/// Keys accepted by [`SabresConfig::set`], long name first.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("trajectories", "n"),
    ("realizations", "m"),
    ("initial_gain", "g0"),
    ("gain_power", "p"),
    ("noise_intensity", "gamma"),
    ("perturbation_window", "tau_e"),
    ("gain_restart_scale", "s_g"),
    ("explore_interval", "er_interval"),
    ("explore_probability", "er_prob"),
    ("explore_variance_ratio", "er_var_ratio"),
    ("gain_floor", "et_threshold"),
    ("max_fes", "max_fes"),
    ("target_error", "target_error"),
    ("exploration", "exploration"),
    ("predict_diffusion", "predict_diffusion"),
    ("repulsion_eps", "eps_rep"),
    ("drift_max_fraction", "drift_max_fraction"),
];

impl SabresConfig {
    /// Defaults with the per-dimension settings: `p = 0.7` and a budget of
    /// 1e6 evaluations from 20 dimensions up, `p = 0.62` and 2e5 below.
    pub fn for_dimension(dim: usize) -> Self {
        let mut c = Self::default();
        if dim >= 20 {
            c.gain_power = 0.7;
            c.max_fes = 1_000_000;
        }
        c
    }

    pub fn population_size(&self) -> usize {
        self.trajectories * self.realizations
    }

    /// Noise intensity per dimension for a box of the given width.
    pub fn resolved_noise(&self, dim: usize, width: f64) -> Result<Vec<f64>> {
        match &self.noise_intensity {
            None => Ok(vec![0.01 * width; dim]),
            Some(g) if g.len() == 1 => Ok(vec![g[0]; dim]),
            Some(g) if g.len() == dim => Ok(g.clone()),
            Some(g) => Err(Error::DimensionMismatch {
                expected: dim,
                found: g.len(),
            }),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.trajectories < 2 {
            return fail(format!("n = {} must be at least 2", self.trajectories));
        }
        if self.realizations < 2 {
            return fail(format!("m = {} must be at least 2", self.realizations));
        }
        if !(self.initial_gain > 0.0 && self.initial_gain.is_finite()) {
            return fail(format!("g0 = {} must be positive", self.initial_gain));
        }
        if !(self.gain_power > 0.0 && self.gain_power <= 1.0) {
            return fail(format!("p = {} must lie in (0, 1]", self.gain_power));
        }
        if let Some(g) = &self.noise_intensity {
            if g.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return fail("every gamma entry must be positive".into());
            }
            if g.len() != 1 && g.len() != dim {
                return fail(format!(
                    "gamma has {} entries, expected 1 or {dim}",
                    g.len()
                ));
            }
        }
        if self.perturbation_window < 1 {
            return fail("tau_e must be at least 1".into());
        }
        if !(self.gain_restart_scale > 0.0 && self.gain_restart_scale.is_finite()) {
            return fail(format!("s_g = {} must be positive", self.gain_restart_scale));
        }
        if self.explore_interval < 1 {
            return fail("er_interval must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.explore_probability) {
            return fail(format!("er_prob = {} must lie in [0, 1]", self.explore_probability));
        }
        if !(self.explore_variance_ratio >= 0.0) {
            return fail("er_var_ratio must be non-negative".into());
        }
        if !(self.gain_floor > 0.0) {
            return fail(format!("et_threshold = {} must be positive", self.gain_floor));
        }
        if self.max_fes < self.population_size() as u64 {
            return fail(format!(
                "max_fes = {} is below one population evaluation (n*m = {})",
                self.max_fes,
                self.population_size()
            ));
        }
        if !(self.target_error > 0.0) {
            return fail(format!("target_error = {} must be positive", self.target_error));
        }
        if !(self.repulsion_eps >= 0.0) {
            return fail("eps_rep must be non-negative".into());
        }
        if !(self.drift_max_fraction > 0.0) {
            return fail("drift_max_fraction must be positive".into());
        }
        Ok(())
    }

    /// Sets one field from its textual value. Accepts long names and short keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| {
            Error::InvalidArgument(format!("cannot parse `{value}` as {what} for `{key}`"))
        };
        let real = || value.trim().parse::<f64>().map_err(|_| bad("a real number"));
        let count = || -> Result<u64> {
            let v = value.trim();
            v.parse::<u64>().or_else(|_| {
                // accept 2e5-style integers
                let f: f64 = v.parse().map_err(|_| bad("a count"))?;
                if f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
                    Ok(f as u64)
                } else {
                    Err(bad("a count"))
                }
            })
        };
        let flag = || match value.trim() {
            "true" | "1" | "on" | "yes" => Ok(true),
            "false" | "0" | "off" | "no" => Ok(false),
            _ => Err(bad("a boolean")),
        };
        let long = CONFIG_KEYS
            .iter()
            .find(|(l, s)| *l == key || *s == key)
            .map(|(l, _)| *l)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown config key `{key}`; known keys: {}",
                    CONFIG_KEYS
                        .iter()
                        .map(|(l, s)| if l == s { l.to_string() } else { format!("{l}/{s}") })
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })?;
        match long {
            "trajectories" => self.trajectories = count()? as usize,
            "realizations" => self.realizations = count()? as usize,
            "initial_gain" => self.initial_gain = real()?,
            "gain_power" => self.gain_power = real()?,
            "noise_intensity" => {
                let values = value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>().map_err(|_| bad("a list of reals")))
                    .collect::<Result<Vec<_>>>()?;
                self.noise_intensity = Some(values);
            }
            "perturbation_window" => self.perturbation_window = count()?,
            "gain_restart_scale" => self.gain_restart_scale = real()?,
            "explore_interval" => self.explore_interval = count()?,
            "explore_probability" => self.explore_probability = real()?,
            "explore_variance_ratio" => self.explore_variance_ratio = real()?,
            "gain_floor" => self.gain_floor = real()?,
            "max_fes" => self.max_fes = count()?,
            "target_error" => self.target_error = real()?,
            "exploration" => self.exploration = flag()?,
            "predict_diffusion" => self.predict_diffusion = flag()?,
            "repulsion_eps" => self.repulsion_eps = real()?,
            "drift_max_fraction" => self.drift_max_fraction = real()?,
            _ => unreachable!("key table and match are out of sync: {long}"),
        }
        Ok(())
    }
}
