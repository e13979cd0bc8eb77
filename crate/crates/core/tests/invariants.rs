//! Cross-cutting invariants: scheduling independence, per-step algebraic
//! inequalities, and config serialization round-trips.

use loopid::experiment::{
    run_experiment, run_single, ExperimentConfig, PriorSpec, SweepSpec, ThetaMode,
};
use loopid::{PolicySpec, Vec2};

fn small_sweep_config() -> ExperimentConfig {
    ExperimentConfig {
        horizon: 200,
        num_runs: 32,
        theta: ThetaMode::Fixed { value: [0.9, 1.0] },
        prior: PriorSpec {
            mean: [0.0, 0.0],
            cov: [[1.0, 0.0], [0.0, 1.0]],
        },
        noise_var: 0.1,
        q: 1.0,
        r: 1.0,
        policy: PolicySpec::SinModulated { gain: -1.2 },
        sweep: Some(SweepSpec {
            path: "policy.gain".to_string(),
            grid: vec![-1.3, -1.0],
        }),
        guard: 1e6,
        seed: 0x1271,
        constraint_budget: None,
    }
}

#[test]
fn results_do_not_depend_on_the_thread_pool_size() {
    let config = small_sweep_config();
    let mut outputs = Vec::new();
    for threads in [1usize, 4] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool");
        outputs.push(pool.install(|| run_experiment(&config).unwrap()));
    }
    // Bitwise equality: every mean, stderr, and bound must agree exactly.
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn channel_power_never_exceeds_twice_state_plus_noise_power() {
    // Pointwise algebra: y = x_next - w, so y^2 <= 2 x_next^2 + 2 w^2.
    let config = ExperimentConfig {
        sweep: None,
        num_runs: 16,
        ..small_sweep_config()
    };
    for i in 0..config.num_runs as u32 {
        let result = run_single(&config, i).unwrap();
        let traj = &result.trajectory;
        for t in 0..traj.channel_inputs.len() {
            let y2 = traj.channel_inputs[t] * traj.channel_inputs[t];
            let bound = 2.0 * traj.states[t + 1] * traj.states[t + 1]
                + 2.0 * traj.noises[t] * traj.noises[t];
            assert!(
                y2 <= bound + 1e-12 * bound.max(1.0),
                "run {i} step {t}: {y2} > {bound}"
            );
        }
    }
}

#[test]
fn sampled_parameters_are_unbiased_through_the_experiment_path() {
    let config = ExperimentConfig {
        horizon: 1,
        num_runs: 10_000,
        theta: ThetaMode::SamplePrior,
        prior: PriorSpec {
            mean: [0.4, 0.8],
            cov: [[0.09, 0.02], [0.02, 0.04]],
        },
        noise_var: 0.1,
        q: 1.0,
        r: 1.0,
        policy: PolicySpec::Zero,
        sweep: None,
        guard: 1e6,
        seed: 0xB1A5,
        constraint_budget: None,
    };
    let n = config.num_runs as f64;
    let mut sum = Vec2::ZERO;
    for i in 0..config.num_runs as u32 {
        sum = sum + run_single(&config, i).unwrap().theta;
    }
    let mean = sum.scale(1.0 / n);
    // 4 standard errors of the mean in each coordinate.
    for (got, (want, var)) in [
        (mean[0], (0.4, 0.09)),
        (mean[1], (0.8, 0.04)),
    ] {
        let se = (var / n).sqrt();
        assert!(
            (got - want).abs() <= 4.0 * se,
            "{got} vs {want} (se {se})"
        );
    }
}

#[test]
fn config_json_round_trips_and_rejects_unknown_fields() {
    let config = small_sweep_config();
    let json = serde_json::to_string_pretty(&config).unwrap();
    let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
    assert_eq!(config, back);

    // Tagged policy encoding is snake_case.
    assert!(json.contains("\"kind\": \"sin_modulated\""));

    let with_extra = json.replace("\"horizon\"", "\"horizzon\"");
    assert!(serde_json::from_str::<ExperimentConfig>(&with_extra).is_err());
}

#[test]
fn replayed_sweeps_are_bitwise_identical() {
    let config = small_sweep_config();
    let a = run_experiment(&config).unwrap();
    let b = run_experiment(&config).unwrap();
    assert_eq!(a, b);
}
