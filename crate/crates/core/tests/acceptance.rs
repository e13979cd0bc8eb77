//! End-to-end acceptance suite.
//!
//! Each test prints one `ACCEPTANCE n: ... PASS/FAIL` line (visible with
//! `cargo test --test acceptance -- --nocapture`) and asserts the same
//! condition, so the suite doubles as a human-readable checklist. Criterion
//! 10 (byte-identical output across thread counts) exercises the command
//! line binary and lives in the CLI crate's acceptance suite.

use std::time::{Duration, Instant};

use once_cell::sync::Lazy;

use loopid::estimator::{batch_regularized_lse, rls_update};
use loopid::experiment::{
    aggregate, evaluate_bound_checks, run_experiment, run_single, BoundCheck, ExperimentConfig,
    PriorSpec, RunResult, SweepRow, SweepSpec, ThetaMode,
};
use loopid::infotheory::{
    awgn_capacity, independence_diagnostics, step_utility, step_utility_closed_form,
};
use loopid::sysid::{draw_noise_sequence, simulate_trajectory};
use loopid::{Belief, Mat2, PolicySpec, RngStream, Vec2};

fn report(n: u32, what: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {n}: {what} ... {status}");
    assert!(pass, "acceptance {n} ({what}): {detail}");
}

fn unit_prior() -> PriorSpec {
    PriorSpec {
        mean: [0.0, 0.0],
        cov: [[1.0, 0.0], [0.0, 1.0]],
    }
}

/// The figure-reproduction sweep: modulated feedback on the reference plant,
/// six gains, 1000 runs of 2000 steps each.
fn reference_sweep_config() -> ExperimentConfig {
    ExperimentConfig {
        horizon: 2000,
        num_runs: 1000,
        theta: ThetaMode::Fixed { value: [0.9, 1.0] },
        prior: unit_prior(),
        noise_var: 0.1,
        q: 1.0,
        r: 1.0,
        policy: PolicySpec::SinModulated { gain: -1.2 },
        sweep: Some(SweepSpec {
            path: "policy.gain".to_string(),
            grid: vec![-1.4, -1.3, -1.2, -1.1, -1.0, -0.9],
        }),
        guard: 1e6,
        seed: 0x5EED_2026,
        constraint_budget: None,
    }
}

static REFERENCE_SWEEP: Lazy<(Vec<SweepRow>, Duration)> = Lazy::new(|| {
    let started = Instant::now();
    let rows = run_experiment(&reference_sweep_config()).expect("reference sweep");
    (rows, started.elapsed())
});

/// Small test matrix covering every policy kind and both parameter modes.
fn test_matrix() -> Vec<(&'static str, ExperimentConfig)> {
    let base = ExperimentConfig {
        horizon: 300,
        num_runs: 40,
        theta: ThetaMode::Fixed { value: [0.9, 1.0] },
        prior: unit_prior(),
        noise_var: 0.1,
        q: 1.0,
        r: 1.0,
        policy: PolicySpec::Linear { gain: -1.2 },
        sweep: None,
        guard: 1e6,
        seed: 0xBEEF_0001,
        constraint_budget: None,
    };

    let mut linear = base.clone();
    linear.seed = 0xBEEF_0001;

    let mut modulated = base.clone();
    modulated.policy = PolicySpec::SinModulated { gain: -1.2 };
    modulated.seed = 0xBEEF_0002;

    let mut open_loop = base.clone();
    open_loop.policy = PolicySpec::OpenLoop {
        sequence: (0..300).map(|t| ((t % 7) as f64 - 3.0) / 3.0).collect(),
    };
    open_loop.seed = 0xBEEF_0003;

    let mut unexcited = base.clone();
    unexcited.policy = PolicySpec::Zero;
    unexcited.seed = 0xBEEF_0004;

    let mut sampled = base.clone();
    sampled.theta = ThetaMode::SamplePrior;
    sampled.prior = PriorSpec {
        mean: [0.5, 1.0],
        cov: [[0.04, 0.0], [0.0, 0.04]],
    };
    sampled.policy = PolicySpec::Linear { gain: -0.6 };
    sampled.seed = 0xBEEF_0005;

    vec![
        ("linear feedback", linear),
        ("modulated feedback", modulated),
        ("open loop", open_loop),
        ("no input", unexcited),
        ("sampled parameters", sampled),
    ]
}

struct MatrixRun {
    name: &'static str,
    config: ExperimentConfig,
    results: Vec<RunResult>,
    checks: Vec<BoundCheck>,
}

static MATRIX: Lazy<Vec<MatrixRun>> = Lazy::new(|| {
    test_matrix()
        .into_iter()
        .map(|(name, config)| {
            let results: Vec<RunResult> = (0..config.num_runs as u32)
                .map(|i| run_single(&config, i).expect("matrix run"))
                .collect();
            let stats = aggregate(&results, &config).expect("matrix aggregate");
            let checks = evaluate_bound_checks(&stats, config.theta_sampled());
            MatrixRun {
                name,
                config,
                results,
                checks,
            }
        })
        .collect()
});

fn find_check<'c>(checks: &'c [BoundCheck], name: &str) -> &'c BoundCheck {
    checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("no check named {name}"))
}

#[test]
fn criterion_01_batch_and_recursive_estimates_agree() {
    let started = Instant::now();
    let mut rng = RngStream::new(0xAC01, 0);
    let horizon = 50;
    let mut worst = 0.0f64;

    for case in 0..200u32 {
        // Random stable closed loop: pick the pole, solve for the gain.
        let a = 1.2 * (2.0 * rng.uniform() - 1.0);
        let b = 0.3 + 1.2 * rng.uniform();
        let pole = 0.95 * (2.0 * rng.uniform() - 1.0);
        let k = (pole - a) / b;
        let noise_var = 0.05 + 0.95 * rng.uniform();

        let l00 = 0.5 + 1.5 * rng.uniform();
        let l10 = 1.5 * (2.0 * rng.uniform() - 1.0);
        let l11 = 0.5 + 1.5 * rng.uniform();
        let prior = Belief::new(
            Vec2::new(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0),
            Mat2([
                [l00 * l00, l00 * l10],
                [l00 * l10, l10 * l10 + l11 * l11],
            ]),
        )
        .expect("random prior");

        let noises = draw_noise_sequence(noise_var, horizon, &mut rng).unwrap();
        let policy = PolicySpec::Linear { gain: k };
        let traj = simulate_trajectory(Vec2::new(a, b), &policy, horizon, &noises, 1e9).unwrap();
        assert!(!traj.diverged, "case {case} diverged unexpectedly");

        let mut chained = prior.clone();
        for t in 0..horizon {
            chained = rls_update(&chained, traj.regressors[t], traj.states[t + 1], noise_var)
                .unwrap();
        }
        let batch = batch_regularized_lse(
            &prior,
            &traj.regressors,
            &traj.states[1..],
            noise_var,
        )
        .unwrap();

        let mean_scale = batch.mean[0].abs().max(batch.mean[1].abs()).max(1.0);
        let cov_scale = batch.cov.max_abs();
        for i in 0..2 {
            let dm = (chained.mean[i] - batch.mean[i]).abs() / mean_scale;
            worst = worst.max(dm);
            for j in 0..2 {
                let dc = (chained.cov.0[i][j] - batch.cov.0[i][j]).abs() / cov_scale;
                worst = worst.max(dc);
            }
        }
    }

    let elapsed = started.elapsed();
    report(
        1,
        "chained recursive updates match the batch solution",
        worst <= 1e-9 && elapsed < Duration::from_secs(5),
        &format!("worst relative deviation {worst:.3e}, elapsed {elapsed:?}"),
    );
}

#[test]
fn criterion_02_step_utility_matches_its_closed_form() {
    let started = Instant::now();
    let mut rng = RngStream::new(0xAC02, 0);
    let mut worst = 0.0f64;

    for _ in 0..10_000 {
        let l00 = 0.5 + 2.0 * rng.uniform();
        let l10 = 1.5 * (2.0 * rng.uniform() - 1.0);
        let l11 = 0.5 + 2.0 * rng.uniform();
        let cov = Mat2([
            [l00 * l00, l00 * l10],
            [l00 * l10, l10 * l10 + l11 * l11],
        ]);
        let belief = Belief::new(Vec2::ZERO, cov).unwrap();
        let z = Vec2::new(
            6.0 * rng.uniform() - 3.0,
            6.0 * rng.uniform() - 3.0,
        );
        let noise_var = 0.05 + 1.95 * rng.uniform();
        let next = rls_update(&belief, z, rng.normal(), noise_var).unwrap();

        let via_dets = step_utility(&belief.cov, &next.cov).unwrap();
        let closed = step_utility_closed_form(&belief.cov, z, noise_var).unwrap();
        worst = worst.max((via_dets - closed).abs());
    }

    let elapsed = started.elapsed();
    report(
        2,
        "determinant-ratio utility equals its closed form",
        worst <= 1e-10 && elapsed < Duration::from_secs(1),
        &format!("worst absolute deviation {worst:.3e}, elapsed {elapsed:?}"),
    );
}

#[test]
fn criterion_03_covariance_shrinks_and_utility_is_nonnegative() {
    let mut min_eig = f64::INFINITY;
    let mut min_gain = f64::INFINITY;
    let mut steps = 0usize;

    for run in MATRIX.iter() {
        for result in &run.results {
            let mut belief = run.config.prior.to_belief().unwrap();
            for (t, &z) in result.trajectory.regressors.iter().enumerate() {
                let next = rls_update(
                    &belief,
                    z,
                    result.trajectory.states[t + 1],
                    run.config.noise_var,
                )
                .unwrap();
                let shrink = Mat2([
                    [
                        belief.cov.0[0][0] - next.cov.0[0][0],
                        belief.cov.0[0][1] - next.cov.0[0][1],
                    ],
                    [
                        belief.cov.0[1][0] - next.cov.0[1][0],
                        belief.cov.0[1][1] - next.cov.0[1][1],
                    ],
                ]);
                let (lo, _) = shrink.eigenvalues_sym();
                min_eig = min_eig.min(lo);
                min_gain = min_gain.min(result.ledger.step_bits[t]);
                belief = next;
                steps += 1;
            }
        }
    }

    report(
        3,
        "covariance never grows and per-step utility is nonnegative",
        min_eig >= -1e-10 && min_gain >= -1e-10,
        &format!(
            "min shrink eigenvalue {min_eig:.3e}, min step utility {min_gain:.3e} over {steps} steps"
        ),
    );
}

#[test]
fn criterion_04_unexcited_direction_information_is_preserved() {
    let mut worst = 0.0f64;

    for &gain in &[-1.4, -1.2, -0.9] {
        let config = ExperimentConfig {
            horizon: 500,
            num_runs: 20,
            theta: ThetaMode::Fixed { value: [0.9, 1.0] },
            prior: unit_prior(),
            noise_var: 0.1,
            q: 1.0,
            r: 1.0,
            policy: PolicySpec::Linear { gain },
            sweep: None,
            guard: 1e6,
            seed: 0xD1_0004,
            constraint_budget: None,
        };
        let prior_info = config.prior.to_belief().unwrap().information().unwrap();
        // Every regressor [x, k x] is orthogonal to d = [-k, 1].
        let d = Vec2::new(-gain, 1.0);
        let before = prior_info.quad_form(d);

        for i in 0..config.num_runs as u32 {
            let result = run_single(&config, i).unwrap();
            assert!(!result.trajectory.diverged);
            let after = result.final_belief.information().unwrap().quad_form(d);
            worst = worst.max((after - before).abs() / before.abs());
        }
    }

    report(
        4,
        "closed-loop blind direction keeps its prior information",
        worst <= 1e-9,
        &format!("worst relative change {worst:.3e}"),
    );
}

#[test]
fn criterion_05_sweep_learning_rates_stay_under_capacity() {
    let (rows, elapsed) = &*REFERENCE_SWEEP;
    let mut min_gap = f64::INFINITY;
    let mut detail = String::new();

    for row in rows {
        let rate = row.stats.rate_bits_per_step;
        let capacity = row.stats.bounds.capacity_of_mean_power;
        let gap = capacity - rate;
        min_gap = min_gap.min(gap);
        detail.push_str(&format!(
            "gain {:+.1}: rate {:.4} < C {:.4} (gap {:.4}); ",
            row.grid_value, rate, capacity, gap
        ));
    }

    let runtime_ok = *elapsed < Duration::from_secs(300);
    report(
        5,
        "every sweep row learns strictly below channel capacity",
        min_gap > 0.0 && runtime_ok,
        &format!("{detail}elapsed {elapsed:?}"),
    );
}

#[test]
fn criterion_06_power_is_bounded_by_the_excitation_cost() {
    let mut pass = true;
    let mut detail = String::new();

    for run in MATRIX.iter() {
        let c = find_check(&run.checks, "mean power vs cost power bound");
        pass &= c.pass;
        detail.push_str(&format!("{}: {:.4} <= {:.4}; ", run.name, c.lhs, c.rhs));
    }
    for row in &REFERENCE_SWEEP.0 {
        let checks = evaluate_bound_checks(&row.stats, false);
        let c = find_check(&checks, "mean power vs cost power bound");
        pass &= c.pass;
        detail.push_str(&format!(
            "gain {:+.1}: {:.4} <= {:.4}; ",
            row.grid_value, c.lhs, c.rhs
        ));
    }

    report(
        6,
        "mean channel power obeys the cost-derived bound",
        pass,
        &detail,
    );
}

#[test]
fn criterion_07_cumulative_utility_obeys_the_capacity_chain() {
    let mut pass = true;
    let mut detail = String::new();

    let mut verify = |label: String, checks: &[BoundCheck]| {
        let cumulative = find_check(checks, "cumulative utility vs stepwise capacity sum");
        let concavity = find_check(checks, "stepwise capacity sum vs aggregate capacity");
        pass &= cumulative.pass && concavity.pass;
        detail.push_str(&format!(
            "{label}: L {:.3} <= sum C {:.3} <= T C {:.3}; ",
            cumulative.lhs, concavity.lhs, concavity.rhs
        ));
    };

    for run in MATRIX.iter() {
        verify(run.name.to_string(), &run.checks);
    }
    for row in &REFERENCE_SWEEP.0 {
        let checks = evaluate_bound_checks(&row.stats, false);
        verify(format!("gain {:+.1}", row.grid_value), &checks);
    }

    report(
        7,
        "cumulative utility sits under the stepwise and aggregate capacity sums",
        pass,
        &detail,
    );
}

#[test]
fn criterion_08_mean_determinant_dominates_its_lower_bound() {
    let mut pass = true;
    let mut detail = String::new();

    for run in MATRIX.iter() {
        let c = find_check(&run.checks, "determinant lower bound vs mean final determinant");
        pass &= c.pass;
        detail.push_str(&format!("{}: {:.3e} <= {:.3e}; ", run.name, c.lhs, c.rhs));
    }
    for row in &REFERENCE_SWEEP.0 {
        let checks = evaluate_bound_checks(&row.stats, false);
        let c = find_check(&checks, "determinant lower bound vs mean final determinant");
        pass &= c.pass;
        detail.push_str(&format!(
            "gain {:+.1}: {:.3e} <= {:.3e}; ",
            row.grid_value, c.lhs, c.rhs
        ));
    }

    report(
        8,
        "mean final determinant stays above the utility-implied floor",
        pass,
        &detail,
    );
}

#[test]
fn criterion_09_single_step_anchor_value_is_exact() {
    let config = ExperimentConfig {
        horizon: 1,
        num_runs: 200,
        theta: ThetaMode::SamplePrior,
        prior: unit_prior(),
        noise_var: 0.1,
        q: 1.0,
        r: 1.0,
        policy: PolicySpec::OpenLoop {
            sequence: vec![1.0],
        },
        sweep: None,
        guard: 1e6,
        seed: 0xD1_0009,
        constraint_budget: None,
    };

    // x_0 = 0 and u_0 = 1 make the first regressor [0, 1] for every run, so
    // each run gains exactly half the base-2 log of 1 + 1/0.1 = 11.
    let expected = 0.5 * 11f64.log2();
    let mut worst_run = 0.0f64;
    let results: Vec<RunResult> = (0..config.num_runs as u32)
        .map(|i| run_single(&config, i).unwrap())
        .collect();
    for r in &results {
        worst_run = worst_run.max((r.ledger.cumulative_bits - expected).abs());
    }
    let stats = aggregate(&results, &config).unwrap();
    let mean_dev = (stats.cumulative_bits - expected).abs();

    report(
        9,
        "one-step open-loop run gains exactly the closed-form bits",
        worst_run <= 1e-10 && mean_dev <= 1e-10,
        &format!("worst per-run deviation {worst_run:.3e}, mean deviation {mean_dev:.3e}"),
    );
}

#[test]
fn criterion_11_diagnostics_separate_white_from_correlated_states() {
    // White reference: i.i.d. Gaussian series fed straight in.
    let runs = 64usize;
    let len = 400usize;
    let mut series = Vec::with_capacity(runs);
    for i in 0..runs {
        let mut stream = RngStream::new(0xD1A6_2026, i as u64);
        series.push((0..len).map(|_| stream.normal()).collect::<Vec<f64>>());
    }
    let white = independence_diagnostics(&series, &series).unwrap();
    let mut white_ok = true;
    let mut detail = String::new();
    for lag in 0..white.lag_autocorr.len() {
        let r = white.lag_autocorr[lag].unwrap();
        let band = white.lag_halfwidth[lag];
        white_ok &= r.abs() <= band;
        detail.push_str(&format!("white lag {}: {r:+.4} (band {band:.4}); ", lag + 1));
    }

    // Correlated reference: linear feedback on the reference plant leaves a
    // closed-loop pole of 0.9 - 1.2 = -0.3.
    let config = ExperimentConfig {
        horizon: len,
        num_runs: runs,
        theta: ThetaMode::Fixed { value: [0.9, 1.0] },
        prior: unit_prior(),
        noise_var: 0.1,
        q: 1.0,
        r: 1.0,
        policy: PolicySpec::Linear { gain: -1.2 },
        sweep: None,
        guard: 1e6,
        seed: 0xD1A6_0011,
        constraint_budget: None,
    };
    let mut states = Vec::with_capacity(runs);
    let mut channels = Vec::with_capacity(runs);
    for i in 0..runs as u32 {
        let r = run_single(&config, i).unwrap();
        assert!(!r.trajectory.diverged);
        states.push(r.trajectory.states.clone());
        channels.push(r.trajectory.channel_inputs.clone());
    }
    let colored = independence_diagnostics(&states, &channels).unwrap();
    let r1 = colored.lag_autocorr[0].unwrap();
    let band1 = colored.lag_halfwidth[0];
    let colored_ok = r1.abs() > band1;
    detail.push_str(&format!("feedback lag 1: {r1:+.4} (band {band1:.4})"));

    report(
        11,
        "autocorrelation bands admit white states and flag feedback states",
        white_ok && colored_ok,
        &detail,
    );
}

#[test]
fn capacity_helper_matches_reference_points() {
    // Sanity anchor used by several criteria above.
    assert!((awgn_capacity(0.3, 0.1).unwrap() - 1.0).abs() < 1e-12);
    assert!((awgn_capacity(0.1, 0.1).unwrap() - 0.5).abs() < 1e-12);
}
