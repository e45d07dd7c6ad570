use proptest::prelude::*;

use super::*;
use crate::benchmarks::{registry, BaseFunction, ObjectiveSpec};

fn sphere(dim: usize) -> ObjectiveSpec {
    ObjectiveSpec::base("sphere", BaseFunction::Sphere, dim, None).unwrap()
}

fn quiet_config() -> SabresConfig {
    SabresConfig {
        noise_intensity: Some(vec![0.0]),
        ..SabresConfig::default()
    }
}

fn state_from(
    config: &SabresConfig,
    spec: &ObjectiveSpec,
    n: usize,
    m: usize,
    positions: Vec<f64>,
) -> EngineState {
    EngineState::from_population(config, spec, n, m, positions).unwrap()
}

#[test]
fn init_population_fills_box() {
    let config = SabresConfig::default();
    let spec = registry::build("f1", 10).unwrap();
    let mut rng = EngineRng::new(42, 10, 10);
    let state = init_population(&config, &spec, &mut rng).unwrap();
    assert_eq!(state.positions().len(), 10 * 10 * 10);
    assert!(state.positions().iter().all(|x| (-100.0..100.0).contains(x)));
    assert_eq!(state.fes_used, 100);
    assert_eq!(state.tau, 1);
    assert_eq!(state.gain_base, 10.0);
    assert_eq!(state.mutation_remaining, 0);
    assert_eq!(state.var_history[0], state.var_history[1]);
    for (p, f) in state.fitness().iter().enumerate() {
        assert_eq!(*f, spec.eval(&state.positions()[p * 10..(p + 1) * 10]).unwrap());
    }

    let again = init_population(&config, &spec, &mut EngineRng::new(42, 10, 10)).unwrap();
    assert_eq!(state, again);
}

#[test]
fn init_population_rejects_invalid_config() {
    let config = SabresConfig {
        trajectories: 1,
        ..SabresConfig::default()
    };
    let mut rng = EngineRng::new(1, 1, 10);
    assert!(matches!(
        init_population(&config, &sphere(2), &mut rng),
        Err(Error::Config(_))
    ));
}

#[test]
fn gain_values() {
    let config = SabresConfig::default();
    let mut state = state_from(&config, &sphere(1), 2, 2, vec![1.0, 2.0, 3.0, 4.0]);
    assert_eq!(current_gain(&state, &config), 10.0);
    state.tau = 100;
    // 10 * 100^-0.62 = 0.575439937337157 (30-digit reference)
    assert!((current_gain(&state, &config) - 0.575_439_937_337_157).abs() < 1e-12);
    let linear = SabresConfig {
        gain_power: 1.0,
        ..SabresConfig::default()
    };
    state.tau = 10;
    assert_eq!(current_gain(&state, &linear), 1.0);
}

#[test]
fn gain_restart_threshold() {
    let config = SabresConfig::default();
    let mut control = RandomStream::new(3);
    let mut state = state_from(&config, &sphere(1), 2, 2, vec![1.0, 2.0, 3.0, 4.0]);

    // gain ~ 0.0510 stays
    state.tau = 4982;
    assert!(current_gain(&state, &config) > 0.051);
    assert!(!check_gain_restart(&mut state, &config, &mut control).unwrap());
    assert_eq!(state.gain_base, 10.0);

    // gain ~ 0.0490 restarts, first restart doubles
    state.tau = 5315;
    assert!(current_gain(&state, &config) < 0.049);
    assert!(check_gain_restart(&mut state, &config, &mut control).unwrap());
    assert_eq!(state.gain_base, 20.0);
    assert_eq!(state.restart_count, 1);

    // later restarts multiply by u in [1, s_g)
    state.gain_base = 10.0;
    assert!(check_gain_restart(&mut state, &config, &mut control).unwrap());
    assert!((10.0..20.0).contains(&state.gain_base), "{}", state.gain_base);
    assert_eq!(state.restart_count, 2);
}

#[test]
fn exploration_gate() {
    let config = SabresConfig::default();
    let mut state = state_from(&config, &sphere(1), 2, 2, vec![1.0, 2.0, 3.0, 4.0]);
    state.var_history = [1.0, 0.9];

    state.tau = 999;
    assert!(!exploration_fires(&state, &config, 0.05));
    state.tau = 1000;
    assert!(exploration_fires(&state, &config, 0.05));
    assert!(!exploration_fires(&state, &config, 0.5));
    state.var_history = [1.0, 0.4];
    assert!(!exploration_fires(&state, &config, 0.05));
}

#[test]
fn exploration_window_lasts_tau_e_steps() {
    let config = SabresConfig {
        explore_probability: 1.0,
        ..SabresConfig::default()
    };
    let mut control = RandomStream::new(1);
    let mut state = state_from(&config, &sphere(1), 2, 2, vec![1.0, 2.0, 3.0, 4.0]);
    state.var_history = [1.0, 0.9];
    state.tau = 999;
    assert!(!check_exploration_trigger(&mut state, &config, &mut control));
    let mut fired = vec![];
    for tau in 1000..1008 {
        state.tau = tau;
        fired.push(check_exploration_trigger(&mut state, &config, &mut control));
    }
    assert_eq!(fired, [true, true, true, true, true, false, false, false]);

    let off = SabresConfig {
        exploration: false,
        ..config
    };
    state.tau = 2000;
    assert!(!check_exploration_trigger(&mut state, &off, &mut control));
}

#[test]
fn representatives() {
    let mut streams: Vec<RandomStream> = (0..10).map(RandomStream::new).collect();
    let single = SabresConfig {
        realizations: 1,
        ..SabresConfig::default()
    };
    assert_eq!(select_representatives(&single, &mut streams).unwrap().picks, vec![0; 10]);

    let config = SabresConfig::default();
    let mut a: Vec<RandomStream> = (0..10).map(RandomStream::new).collect();
    let mut b = a.clone();
    let picks = select_representatives(&config, &mut a).unwrap();
    assert_eq!(picks.picks.len(), 10);
    assert!(picks.picks.iter().all(|&p| p < 10));
    assert_eq!(picks, select_representatives(&config, &mut b).unwrap());
}

#[test]
fn drift_examples() {
    let x = [0.0, 1.0, 3.0];
    let d0 = repulsive_drift(&x, 0, Repulsion::UNCAPPED);
    assert!((d0 - (-1.0 - 1.0 / 3.0)).abs() < 1e-15);
    let total: f64 = (0..3).map(|i| repulsive_drift(&x, i, Repulsion::UNCAPPED)).sum();
    assert!(total.abs() < 1e-15);

    let capped = Repulsion { eps: 1e-6, cap: 20.0 };
    assert_eq!(repulsive_drift(&[5.0, 5.0], 0, capped), 20.0);
    assert_eq!(repulsive_drift(&[5.0, 5.0], 1, capped), -20.0);
    let clamp_only = Repulsion { eps: 1e-6, cap: f64::INFINITY };
    assert_eq!(repulsive_drift(&[5.0, 5.0], 0, clamp_only), 1e6);
    assert_eq!(repulsive_drift(&[5.0, 5.0 + 1e-9], 0, clamp_only), -1e6);
}

#[test]
fn exploratory_update_two_trajectories() {
    let config = quiet_config();
    let spec = sphere(1);
    let state = state_from(&config, &spec, 2, 1, vec![0.0, 2.0]);
    let reps = RepresentativeSet { picks: vec![0, 0] };
    let mut streams: Vec<RandomStream> = (0..2).map(RandomStream::new).collect();
    let p = exploratory_update(&state, &reps, Repulsion::UNCAPPED, &mut streams);
    assert_eq!(p, vec![-0.5, 2.5]);
}

#[test]
fn exploratory_update_clamps_to_box() {
    let config = quiet_config();
    let spec = sphere(1);
    let state = state_from(&config, &spec, 2, 1, vec![-99.99, -99.98]);
    let reps = RepresentativeSet { picks: vec![0, 0] };
    let mut streams: Vec<RandomStream> = (0..2).map(RandomStream::new).collect();
    let p = exploratory_update(&state, &reps, Repulsion { eps: 1e-8, cap: 20.0 }, &mut streams);
    assert_eq!(p[0], -100.0);
    assert!((p[1] - (-79.98)).abs() < 1e-12);
}

#[test]
fn exploratory_update_leaves_non_representatives() {
    let config = SabresConfig::default();
    let spec = registry::build("f4", 3).unwrap();
    let mut rng = EngineRng::new(5, 4, 3);
    let cfg = SabresConfig {
        trajectories: 4,
        realizations: 3,
        ..config
    };
    let state = init_population(&cfg, &spec, &mut rng).unwrap();
    let reps = select_representatives(&cfg, &mut rng.trajectories).unwrap();
    let p = exploratory_update(
        &state,
        &reps,
        Repulsion { eps: 1e-8, cap: 20.0 },
        &mut rng.trajectories,
    );
    for i in 0..4 {
        for k in 0..3 {
            let off = (i * 3 + k) * 3;
            let same = p[off..off + 3]
                .iter()
                .zip(state.position(i, k))
                .all(|(a, b)| a.to_bits() == b.to_bits());
            assert_eq!(same, k != reps.picks[i], "particle ({i},{k})");
        }
    }
}

#[test]
fn directional_update_examples() {
    let config = SabresConfig::default();
    let spec = sphere(1);
    let state = state_from(&config, &spec, 2, 2, vec![0.0, 0.0, 4.0, 4.0]);
    let mut streams: Vec<RandomStream> = (0..4).map(RandomStream::new).collect();

    // n = m = 2 forces partner (1 - i, 1 - k)
    let u = directional_update(state.positions(), &state, 0.5, &mut streams).unwrap();
    assert_eq!(u.partners, vec![(1, 1), (1, 0), (0, 1), (0, 0)]);
    assert_eq!(u.candidates, vec![-2.0, -2.0, 6.0, 6.0]);

    let zero = directional_update(state.positions(), &state, 0.0, &mut streams).unwrap();
    assert_eq!(zero.candidates, state.positions());

    let flat = state_from(&config, &spec, 2, 2, vec![3.0; 4]);
    let u = directional_update(flat.positions(), &flat, 0.7, &mut streams).unwrap();
    assert_eq!(u.candidates, vec![3.0; 4]);
}

#[test]
fn directional_update_clamps() {
    let config = SabresConfig::default();
    let spec = sphere(1);
    let state = state_from(&config, &spec, 2, 2, vec![-90.0, -90.0, 90.0, 90.0]);
    let mut streams: Vec<RandomStream> = (0..4).map(RandomStream::new).collect();
    let u = directional_update(state.positions(), &state, 10.0, &mut streams).unwrap();
    assert_eq!(u.candidates, vec![-100.0, -100.0, 100.0, 100.0]);
}

#[test]
fn rejection_rules() {
    let config = SabresConfig::default();
    let spec = sphere(1);
    // fitness 3 and 5
    let mut state = state_from(&config, &spec, 2, 1, vec![3f64.sqrt(), 5f64.sqrt()]);
    let before = state.positions().to_vec();
    // candidate fitness 5 for the first (worse), 3 for the second (better)
    let accepted = rejection_sample(&mut state, &[5f64.sqrt(), 3f64.sqrt()], &spec).unwrap();
    assert_eq!(accepted, 1);
    assert_eq!(state.positions()[0], before[0]);
    assert_eq!(state.positions()[1], 3f64.sqrt());
    assert_eq!(state.fes_used, 4);

    // equal fitness accepts the new point
    let accepted = rejection_sample(&mut state, &[-(3f64.sqrt()), 0.5], &spec).unwrap();
    assert_eq!(accepted, 2);
    assert_eq!(state.positions()[0], -(3f64.sqrt()));
    assert!((state.best_error - 0.25).abs() < 1e-15);
}

#[test]
fn step_accounting() {
    let config = SabresConfig::default();
    let spec = registry::build("f1", 10).unwrap();
    let mut rng = EngineRng::new(8, 10, 10);
    let mut state = init_population(&config, &spec, &mut rng).unwrap();
    let before = state.best_error;
    let report = step(&mut state, &spec, &config, &mut rng).unwrap();
    assert_eq!(report.gain, 10.0);
    assert_eq!(state.fes_used, 200);
    assert_eq!(state.tau, 2);
    assert!(state.best_error <= before);
    assert!(report.partners.iter().enumerate().all(|(p, &(si, sk))| si != p / 10 && sk != p % 10));
}

#[test]
fn run_solves_two_dimensional_sphere() {
    let config = SabresConfig::default();
    let spec = registry::build("sphere", 2).unwrap();
    let r = run(&config, &spec, 1).unwrap();
    assert_eq!(r.termination, Termination::TargetReached);
    assert_eq!(r.best_error, 1e-8);
    assert!(r.fes_used < config.max_fes);
    assert_eq!(r.trace.last().unwrap().min_error, r.best_error);
    assert_eq!(r.trace.last().unwrap().fes, r.fes_used);
}

#[test]
fn run_with_minimal_budget_takes_no_step() {
    let config = SabresConfig {
        max_fes: 100,
        ..SabresConfig::default()
    };
    let spec = registry::build("f1", 10).unwrap();
    let r = run(&config, &spec, 3).unwrap();
    assert_eq!(r.iterations, 0);
    assert_eq!(r.fes_used, 100);
    assert_eq!(r.termination, Termination::BudgetExhausted);
    let mut rng = EngineRng::new(3, 10, 10);
    let init = init_population(&config, &spec, &mut rng).unwrap();
    assert_eq!(r.best_error, init.best_error);
}

#[test]
fn run_is_deterministic() {
    let config = SabresConfig {
        max_fes: 20_000,
        ..SabresConfig::default()
    };
    let spec = registry::build("f4", 5).unwrap();
    assert_eq!(run(&config, &spec, 11).unwrap(), run(&config, &spec, 11).unwrap());
    assert_ne!(run(&config, &spec, 11).unwrap(), run(&config, &spec, 12).unwrap());
}

#[test]
fn invariants_over_a_run_with_restarts_and_mutation() {
    // small gain and short interval so restarts and mutation windows both occur
    let config = SabresConfig {
        trajectories: 4,
        realizations: 3,
        initial_gain: 1.0,
        gain_power: 0.9,
        explore_interval: 50,
        explore_probability: 0.5,
        max_fes: 12 * 3000,
        ..SabresConfig::default()
    };
    let spec = registry::build("f4", 3).unwrap();
    let (lo, hi) = (spec.lower_bound, spec.upper_bound);
    let mut prev_fitness: Option<Vec<f64>> = None;
    let mut prev_best = f64::INFINITY;
    let mut prev_gain: Option<(u32, f64)> = None;
    let mut mutations = 0;
    let mut restarts = 0;
    let r = run_with(&config, &spec, 21, |state, report| {
        assert!(state.positions().iter().all(|x| (lo..=hi).contains(x)));
        assert_eq!(state.fes_used, 12 * state.tau);
        assert!(state.best_error <= prev_best);
        prev_best = state.best_error;
        if let Some(prev) = &prev_fitness {
            assert!(state.fitness().iter().zip(prev).all(|(a, b)| a <= b));
        }
        prev_fitness = Some(state.fitness().to_vec());
        if let Some(report) = report {
            for (p, &(si, sk)) in report.partners.iter().enumerate() {
                assert!(si != p / 3 && sk != p % 3);
            }
            mutations += usize::from(report.mutated);
            if report.gain_restarted {
                restarts += 1;
            } else if let Some((count, g)) = prev_gain {
                if count == state.restart_count {
                    assert!(report.gain < g, "gain must decrease between restarts");
                }
            }
            assert!(report.gain > 0.0);
            prev_gain = Some((state.restart_count, report.gain));
        }
    })
    .unwrap();
    assert!(mutations > 0, "no mutation window opened");
    assert!(restarts > 1, "expected several gain restarts, got {restarts}");
    assert_eq!(r.restarts, restarts);
}

/// Independent double-loop evaluation of the repulsive mutation with the
/// noise suppressed: x_i + sum_{j != i} 1 / (x_i - x_j) per dimension.
fn brute_force_mutation(reps: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = reps.len();
    let dim = reps[0].len();
    let mut out = reps.to_vec();
    for i in 0..n {
        for d in 0..dim {
            let mut drift = 0.0;
            for j in 0..n {
                if j != i {
                    drift += 1.0 / (reps[i][d] - reps[j][d]);
                }
            }
            out[i][d] = reps[i][d] + drift;
        }
    }
    out
}

#[test]
fn exploratory_update_matches_brute_force() {
    let mut s = RandomStream::new(314);
    let config = SabresConfig {
        noise_intensity: Some(vec![0.0]),
        ..SabresConfig::default()
    };
    for n in 2..=4 {
        for dim in 1..=2 {
            let spec = sphere(dim).with_bounds(-1e6, 1e6).unwrap();
            for _ in 0..100 {
                let m = 2;
                let positions: Vec<f64> = (0..n * m * dim)
                    .map(|_| s.uniform(-50.0, 50.0).unwrap())
                    .collect();
                let state = state_from(&config, &spec, n, m, positions);
                let reps = RepresentativeSet {
                    picks: (0..n).map(|_| s.index(m).unwrap()).collect(),
                };
                let mut streams: Vec<RandomStream> = (0..n as u64).map(RandomStream::new).collect();
                let got = exploratory_update(&state, &reps, Repulsion::UNCAPPED, &mut streams);
                let rep_points: Vec<Vec<f64>> =
                    (0..n).map(|i| state.position(i, reps.picks[i]).to_vec()).collect();
                let want = brute_force_mutation(&rep_points);
                for i in 0..n {
                    let off = (i * m + reps.picks[i]) * dim;
                    for d in 0..dim {
                        assert!((got[off + d] - want[i][d]).abs() <= 1e-12 * want[i][d].abs().max(1.0));
                    }
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn drift_is_antisymmetric(xs in proptest::collection::vec(-100.0f64..100.0, 2..12)) {
        let total: f64 = (0..xs.len()).map(|i| repulsive_drift(&xs, i, Repulsion::UNCAPPED)).sum();
        let scale: f64 = (0..xs.len()).map(|i| repulsive_drift(&xs, i, Repulsion::UNCAPPED).abs()).sum();
        prop_assert!(total.abs() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn gain_matches_closed_form(tau in 1u64..1_000_000, base in 0.1f64..50.0, power in 0.05f64..1.0) {
        let config = SabresConfig { gain_power: power, ..SabresConfig::default() };
        let spec = sphere(1);
        let mut state = state_from(&config, &spec, 2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        state.tau = tau;
        state.gain_base = base;
        let want = base * (-(power) * (tau as f64).ln()).exp();
        prop_assert!((current_gain(&state, &config) - want).abs() <= 1e-12 * want.max(1.0));
    }
}
