//! The optimizer state machine.
//!
//! One [`step`] runs, in order: the exploration trigger, the repulsive mutation
//! of one representative realization per trajectory (or the identity), the gain
//! restart check, the gain-weighted innovation update of every particle, and
//! greedy rejection against each particle's previous fitness. [`run`] repeats
//! steps until the target error is reached or the evaluation budget runs out.

mod config;

use serde::{Deserialize, Serialize};

pub use config::{SabresConfig, CONFIG_KEYS};

use crate::benchmarks::{error_value, ObjectiveSpec};
use crate::error::{Error, Result};
use crate::harness::trace::{record_trace, TracePoint, TraceSchedule};
use crate::rng::RandomStream;

/// The streams a run draws from.
///
/// Each trajectory and each particle owns a stream keyed by its index, so a
/// particle's draws never depend on the order particles are visited.
#[derive(Debug, Clone)]
pub struct EngineRng {
    /// Exploration coin flips and random gain restarts.
    pub control: RandomStream,
    /// Representative picks and mutation noise, one per trajectory.
    pub trajectories: Vec<RandomStream>,
    /// Initial positions, scrambling draws and diffusion noise, one per particle.
    pub particles: Vec<RandomStream>,
}

impl EngineRng {
    pub fn new(seed: u64, trajectories: usize, realizations: usize) -> Self {
        let root = RandomStream::new(seed);
        let traj_root = root.substream(1);
        let part_root = root.substream(2);
        Self {
            control: root.substream(0),
            trajectories: (0..trajectories as u64).map(|i| traj_root.substream(i)).collect(),
            particles: (0..(trajectories * realizations) as u64)
                .map(|p| part_root.substream(p))
                .collect(),
        }
    }
}

/// Population and bookkeeping of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineState {
    trajectories: usize,
    realizations: usize,
    dim: usize,
    lower: f64,
    upper: f64,
    /// `positions[((i * m) + k) * dim + d]`.
    positions: Vec<f64>,
    /// Objective value of each particle, `fitness[i * m + k]`.
    fitness: Vec<f64>,
    pub tau: u64,
    pub fes_used: u64,
    pub gain_base: f64,
    pub restart_count: u32,
    pub mutation_remaining: u64,
    /// `[oldest, newest]` population fitness variance.
    pub var_history: [f64; 2],
    pub best_error: f64,
    best_index: usize,
    noise: Vec<f64>,
    drift_cap: f64,
}

impl EngineState {
    pub fn trajectories(&self) -> usize {
        self.trajectories
    }

    pub fn realizations(&self) -> usize {
        self.realizations
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn position(&self, i: usize, k: usize) -> &[f64] {
        let start = self.offset(i, k);
        &self.positions[start..start + self.dim]
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn fitness_of(&self, i: usize, k: usize) -> f64 {
        self.fitness[i * self.realizations + k]
    }

    pub fn best_position(&self) -> &[f64] {
        let start = self.best_index * self.dim;
        &self.positions[start..start + self.dim]
    }

    /// Noise intensity in effect, one entry per dimension.
    pub fn noise(&self) -> &[f64] {
        &self.noise
    }

    pub fn drift_cap(&self) -> f64 {
        self.drift_cap
    }

    fn offset(&self, i: usize, k: usize) -> usize {
        (i * self.realizations + k) * self.dim
    }

    /// State over an explicit population, at `tau = 1` with the gain base of
    /// `config`. `positions` is laid out as `[(i * m + k) * dim + d]`.
    pub fn from_population(
        config: &SabresConfig,
        spec: &ObjectiveSpec,
        trajectories: usize,
        realizations: usize,
        positions: Vec<f64>,
    ) -> Result<Self> {
        let dim = spec.dim;
        let expected = trajectories * realizations * dim;
        if trajectories == 0 || realizations == 0 {
            return Err(Error::InvalidArgument("population must be non-empty".into()));
        }
        if positions.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: positions.len(),
            });
        }
        let fitness = positions
            .chunks(dim)
            .map(|x| spec.eval(x))
            .collect::<Result<Vec<_>>>()?;
        let variance = population_variance(&fitness);
        let mut state = EngineState {
            trajectories,
            realizations,
            dim,
            lower: spec.lower_bound,
            upper: spec.upper_bound,
            positions,
            fitness,
            tau: 1,
            fes_used: (trajectories * realizations) as u64,
            gain_base: config.initial_gain,
            restart_count: 0,
            mutation_remaining: 0,
            var_history: [variance, variance],
            best_error: f64::INFINITY,
            best_index: 0,
            noise: config.resolved_noise(dim, spec.width())?,
            drift_cap: config.drift_max_fraction * spec.width(),
        };
        state.refresh_best(spec)?;
        Ok(state)
    }

    fn refresh_best(&mut self, spec: &ObjectiveSpec) -> Result<()> {
        let (idx, &f) = self
            .fitness
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("population is never empty");
        self.best_index = idx;
        self.best_error = error_value(f, spec.f_star)?;
        Ok(())
    }
}

/// One representative realization index per trajectory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepresentativeSet {
    pub picks: Vec<usize>,
}

/// Singularity handling for the repulsion drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Repulsion {
    /// Pairwise distances below this use `±1/eps` instead of `1/diff`.
    pub eps: f64,
    /// Cap on the magnitude of the summed drift.
    pub cap: f64,
}

impl Repulsion {
    /// No clamping and no cap; the raw pairwise sum.
    pub const UNCAPPED: Repulsion = Repulsion {
        eps: 0.0,
        cap: f64::INFINITY,
    };
}

/// Repulsion felt by entry `i` of a one-dimensional configuration:
/// `sum_{j != i} 1 / (x_i - x_j)`, each term clamped below `eps`, the total
/// clamped to `[-cap, cap]`. Coincident points are separated by index order
/// (the lower index is pushed up).
pub fn repulsive_drift(positions: &[f64], i: usize, repulsion: Repulsion) -> f64 {
    let xi = positions[i];
    let total: f64 = positions
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, &xj)| {
            let diff = xi - xj;
            if diff.abs() < repulsion.eps || diff == 0.0 {
                let sign = if diff > 0.0 || (diff == 0.0 && i < j) {
                    1.0
                } else {
                    -1.0
                };
                if repulsion.eps > 0.0 {
                    sign / repulsion.eps
                } else {
                    sign * f64::INFINITY
                }
            } else {
                1.0 / diff
            }
        })
        .sum();
    total.clamp(-repulsion.cap, repulsion.cap)
}

/// Initial population drawn uniformly in the search box.
pub fn init_population(
    config: &SabresConfig,
    spec: &ObjectiveSpec,
    rng: &mut EngineRng,
) -> Result<EngineState> {
    let dim = spec.dim;
    config.validate(dim)?;
    let (n, m) = (config.trajectories, config.realizations);
    if rng.trajectories.len() != n || rng.particles.len() != n * m {
        return Err(Error::InvalidArgument(
            "random streams were created for a different population shape".into(),
        ));
    }
    let (lo, hi) = (spec.lower_bound, spec.upper_bound);
    let mut positions = Vec::with_capacity(n * m * dim);
    for stream in &mut rng.particles {
        for _ in 0..dim {
            positions.push(stream.uniform(lo, hi)?);
        }
    }
    EngineState::from_population(config, spec, n, m, positions)
}

/// `gain_base / tau^p`.
pub fn current_gain(state: &EngineState, config: &SabresConfig) -> f64 {
    state.gain_base / (state.tau as f64).powf(config.gain_power)
}

/// Restarts the gain sequence when it has decayed below the floor. The first
/// restart multiplies the base by `s_g`; later ones by a uniform factor in
/// `[1, s_g)`. Returns whether a restart happened.
pub fn check_gain_restart(
    state: &mut EngineState,
    config: &SabresConfig,
    control: &mut RandomStream,
) -> Result<bool> {
    if current_gain(state, config) >= config.gain_floor {
        return Ok(false);
    }
    let factor = if state.restart_count == 0 {
        config.gain_restart_scale
    } else {
        let s = config.gain_restart_scale;
        control.uniform(s.min(1.0), s.max(1.0))?
    };
    state.gain_base *= factor;
    state.restart_count += 1;
    Ok(true)
}

/// Decides whether this step mutates. An open perturbation window always
/// mutates; otherwise, on multiples of the interval, a coin flip and the
/// variance-ratio test must both pass to open a new window of `tau_e` steps.
pub fn check_exploration_trigger(
    state: &mut EngineState,
    config: &SabresConfig,
    control: &mut RandomStream,
) -> bool {
    if !config.exploration {
        return false;
    }
    if state.mutation_remaining == 0 && state.tau.is_multiple_of(config.explore_interval) {
        let coin = control.next_unit();
        if exploration_fires(state, config, coin) {
            state.mutation_remaining = config.perturbation_window;
        }
    }
    if state.mutation_remaining > 0 {
        state.mutation_remaining -= 1;
        true
    } else {
        false
    }
}

/// The gate that opens a new perturbation window, given the coin drawn for it:
/// `tau` on the interval, `coin < er_prob`, and `var(newest) > ratio * var(oldest)`.
pub fn exploration_fires(state: &EngineState, config: &SabresConfig, coin: f64) -> bool {
    let [oldest, newest] = state.var_history;
    state.tau.is_multiple_of(config.explore_interval)
        && coin < config.explore_probability
        && newest > config.explore_variance_ratio * oldest
}

/// One realization index per trajectory, uniform over `[0, m)`.
pub fn select_representatives(
    config: &SabresConfig,
    trajectory_streams: &mut [RandomStream],
) -> Result<RepresentativeSet> {
    let picks = trajectory_streams
        .iter_mut()
        .take(config.trajectories)
        .map(|s| s.index(config.realizations))
        .collect::<Result<Vec<_>>>()?;
    Ok(RepresentativeSet { picks })
}

/// Repulsive mutation: each representative moves by the repulsion drift of the
/// representatives' coordinates plus `gamma_d` times a standard normal, one
/// dimension at a time. Every other realization is copied unchanged. Results
/// are clamped to the box.
pub fn exploratory_update(
    state: &EngineState,
    reps: &RepresentativeSet,
    repulsion: Repulsion,
    trajectory_streams: &mut [RandomStream],
) -> Vec<f64> {
    let (n, dim) = (state.trajectories, state.dim);
    let mut proposals = state.positions.clone();
    let mut column = vec![0.0; n];
    for d in 0..dim {
        for (i, c) in column.iter_mut().enumerate() {
            *c = state.positions[state.offset(i, reps.picks[i]) + d];
        }
        for i in 0..n {
            let drift = repulsive_drift(&column, i, repulsion);
            let noise = state.noise[d] * trajectory_streams[i].standard_normal();
            let idx = state.offset(i, reps.picks[i]) + d;
            proposals[idx] = (column[i] + drift + noise).clamp(state.lower, state.upper);
        }
    }
    proposals
}

/// Candidates produced by the innovation update and the partners each particle used.
#[derive(Debug, Clone)]
pub struct DirectionalUpdate {
    pub candidates: Vec<f64>,
    /// `(sigma_n(i), sigma_m(k))` for particle `i * m + k`.
    pub partners: Vec<(usize, usize)>,
}

/// Innovation update: each particle draws a partner trajectory `!= i` and a
/// partner realization `!= k`, then moves to `x - gain * (x_partner - x)`,
/// clamped to the box.
pub fn directional_update(
    proposals: &[f64],
    state: &EngineState,
    gain: f64,
    particle_streams: &mut [RandomStream],
) -> Result<DirectionalUpdate> {
    let (n, m, dim) = (state.trajectories, state.realizations, state.dim);
    let mut candidates = vec![0.0; proposals.len()];
    let mut partners = Vec::with_capacity(n * m);
    for i in 0..n {
        for k in 0..m {
            let stream = &mut particle_streams[i * m + k];
            let si = stream.index_excluding(n, i)?;
            let sk = stream.index_excluding(m, k)?;
            partners.push((si, sk));
            let own = state.offset(i, k);
            let peer = state.offset(si, sk);
            for d in 0..dim {
                let x = proposals[own + d];
                let innovation = proposals[peer + d] - x;
                candidates[own + d] = (x - gain * innovation).clamp(state.lower, state.upper);
            }
        }
    }
    Ok(DirectionalUpdate {
        candidates,
        partners,
    })
}

/// Evaluates every candidate and keeps it iff it is not worse than the stored
/// particle. Returns how many candidates were accepted.
pub fn rejection_sample(
    state: &mut EngineState,
    candidates: &[f64],
    spec: &ObjectiveSpec,
) -> Result<usize> {
    let dim = state.dim;
    let mut accepted = 0;
    for (p, candidate) in candidates.chunks(dim).enumerate() {
        let f_new = spec.eval(candidate)?;
        if f_new <= state.fitness[p] {
            state.positions[p * dim..(p + 1) * dim].copy_from_slice(candidate);
            state.fitness[p] = f_new;
            accepted += 1;
            let err = error_value(f_new, spec.f_star)?;
            if err < state.best_error {
                state.best_error = err;
                state.best_index = p;
            }
        }
    }
    state.fes_used += candidates.len() as u64 / dim as u64;
    Ok(accepted)
}

/// What happened during one [`step`].
#[derive(Debug, Clone)]
pub struct StepReport {
    pub mutated: bool,
    pub representatives: Option<RepresentativeSet>,
    pub gain_restarted: bool,
    pub gain: f64,
    pub partners: Vec<(usize, usize)>,
    pub accepted: usize,
}

/// One full iteration.
pub fn step(
    state: &mut EngineState,
    spec: &ObjectiveSpec,
    config: &SabresConfig,
    rng: &mut EngineRng,
) -> Result<StepReport> {
    let mutated = check_exploration_trigger(state, config, &mut rng.control);
    let repulsion = Repulsion {
        eps: config.repulsion_eps,
        cap: state.drift_cap,
    };
    let (mut proposals, representatives) = if mutated {
        let reps = select_representatives(config, &mut rng.trajectories)?;
        let proposals = exploratory_update(state, &reps, repulsion, &mut rng.trajectories);
        (proposals, Some(reps))
    } else {
        (state.positions.clone(), None)
    };
    if config.predict_diffusion {
        add_diffusion(state, &mut proposals, representatives.as_ref(), &mut rng.particles);
    }

    let gain_restarted = check_gain_restart(state, config, &mut rng.control)?;
    let gain = current_gain(state, config);
    let update = directional_update(&proposals, state, gain, &mut rng.particles)?;
    let accepted = rejection_sample(state, &update.candidates, spec)?;

    state.var_history = [state.var_history[1], population_variance(&state.fitness)];
    state.tau += 1;
    Ok(StepReport {
        mutated,
        representatives,
        gain_restarted,
        gain,
        partners: update.partners,
        accepted,
    })
}

/// Brownian increment on every particle that the mutation did not already move.
fn add_diffusion(
    state: &EngineState,
    proposals: &mut [f64],
    reps: Option<&RepresentativeSet>,
    particle_streams: &mut [RandomStream],
) {
    let (m, dim) = (state.realizations, state.dim);
    for (p, stream) in particle_streams.iter_mut().enumerate() {
        let (i, k) = (p / m, p % m);
        if reps.is_some_and(|r| r.picks[i] == k) {
            continue;
        }
        for d in 0..dim {
            let v = &mut proposals[p * dim + d];
            *v = (*v + state.noise[d] * stream.standard_normal()).clamp(state.lower, state.upper);
        }
    }
}

/// Population variance (divisor `N`).
pub fn population_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TargetReached,
    BudgetExhausted,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::TargetReached => "target_reached",
            Termination::BudgetExhausted => "budget_exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub best_error: f64,
    pub best_value: f64,
    pub best_position: Vec<f64>,
    pub fes_used: u64,
    pub iterations: u64,
    pub restarts: u32,
    pub termination: Termination,
    pub trace: Vec<TracePoint>,
}

/// Runs from a fresh population until the target error is reached or another
/// step would exceed the evaluation budget.
pub fn run(config: &SabresConfig, spec: &ObjectiveSpec, seed: u64) -> Result<RunResult> {
    run_with(config, spec, seed, |_, _| {})
}

/// [`run`] with a callback invoked after initialization and after every step.
pub fn run_with<F>(config: &SabresConfig, spec: &ObjectiveSpec, seed: u64, mut observe: F) -> Result<RunResult>
where
    F: FnMut(&EngineState, Option<&StepReport>),
{
    let mut rng = EngineRng::new(seed, config.trajectories, config.realizations);
    let mut state = init_population(config, spec, &mut rng)?;
    let batch = config.population_size() as u64;
    let mut schedule = TraceSchedule::new(batch, config.max_fes);
    let mut trace = Vec::new();
    observe(&state, None);
    if schedule.due(state.fes_used) {
        trace.push(record_trace(&state, spec)?);
    }
    while state.best_error > config.target_error && state.fes_used + batch <= config.max_fes {
        let report = step(&mut state, spec, config, &mut rng)?;
        observe(&state, Some(&report));
        if schedule.due(state.fes_used) {
            trace.push(record_trace(&state, spec)?);
        }
    }
    if trace.last().map(|t| t.fes) != Some(state.fes_used) {
        trace.push(record_trace(&state, spec)?);
    }
    let termination = if state.best_error <= config.target_error {
        Termination::TargetReached
    } else {
        Termination::BudgetExhausted
    };
    Ok(RunResult {
        best_error: state.best_error,
        best_value: state.fitness[state.best_index],
        best_position: state.best_position().to_vec(),
        fes_used: state.fes_used,
        iterations: state.tau - 1,
        restarts: state.restart_count,
        termination,
        trace,
    })
}

#[cfg(test)]
mod tests;
