//! Information accounting and capacity bounds, all in bits (base-2 logs).
//!
//! The per-step utility of an update is the D-optimality gain
//! `F_t = (1/2) log2 det(Pi_{t-1}) - (1/2) log2 det(Pi_t)`, its cumulative
//! sum telescopes to `L_T = (1/2) log2 (det Pi_0 / det Pi_T)`, and the rate
//! `L_T / T` is bounded through the power of the noiseless response
//! `y_t = z_{t-1}^T theta` by the Gaussian-channel capacity
//! `C(P) = (1/2) log2 (1 + P / W)`:
//!
//! ```text
//! mean F_t <= C(P_t)            per step
//! mean L_T <= sum_t C(P_t) <= T C(P)      (concavity of C)
//! mean det Pi_T >= det Pi_0 * 2^(-2 mean L_T)
//! P <= (2/q) J + 2 W            (power from the excitation cost)
//! ```

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};
use crate::stats::{self, KahanSum};

/// Number of autocorrelation lags reported by the diagnostics.
pub const DIAG_MAX_LAG: usize = 5;
/// Minimum number of runs the pooled diagnostics accept.
pub const DIAG_MIN_RUNS: usize = 30;
/// Two-sided 95% normal quantile used for diagnostic bands.
const Z_95: f64 = 1.96;

/// Utility gained by one covariance shrink, in bits.
pub fn step_utility(prev: &Mat2, next: &Mat2) -> Result<f64> {
    prev.check_spd("previous covariance")?;
    next.check_spd("next covariance")?;
    Ok(0.5 * (prev.det().log2() - next.det().log2()))
}

/// Same quantity straight from the regressor, via the determinant lemma:
/// `F = (1/2) log2 (1 + z^T Pi z / W)`.
pub fn step_utility_closed_form(prev: &Mat2, z: Vec2, noise_var: f64) -> Result<f64> {
    prev.check_spd("previous covariance")?;
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::invalid(format!(
            "noise variance must be a finite positive number, got {noise_var}"
        )));
    }
    if !z.is_finite() {
        return Err(Error::invalid("regressor must be finite"));
    }
    Ok(0.5 * (1.0 + prev.quad_form(z) / noise_var).log2())
}

/// Capacity of the additive-Gaussian-noise channel at signal power `power`
/// and noise variance `noise_var`, in bits per use.
pub fn awgn_capacity(power: f64, noise_var: f64) -> Result<f64> {
    if !(power >= 0.0) || !power.is_finite() {
        return Err(Error::invalid(format!(
            "power must be finite and nonnegative, got {power}"
        )));
    }
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::invalid(format!(
            "noise variance must be a finite positive number, got {noise_var}"
        )));
    }
    Ok(0.5 * (1.0 + power / noise_var).log2())
}

/// Both aggregate capacity bounds from a per-step power profile:
/// `(sum_t C(P_t), T * C(mean_t P_t))`. Concavity of `C` orders them.
pub fn capacity_bound_chain(powers: &[f64], noise_var: f64) -> Result<(f64, f64)> {
    if powers.is_empty() {
        return Err(Error::invalid("power profile is empty"));
    }
    let mut cap_sum = KahanSum::new();
    let mut pow_sum = KahanSum::new();
    for &p in powers {
        cap_sum.add(awgn_capacity(p, noise_var)?);
        pow_sum.add(p);
    }
    let mean_power = pow_sum.value() / powers.len() as f64;
    let aggregate = powers.len() as f64 * awgn_capacity(mean_power, noise_var)?;
    Ok((cap_sum.value(), aggregate))
}

/// Lower bound on the expected final determinant:
/// `det Pi_0 * 2^(-2 L)` for cumulative utility `L >= 0` bits.
pub fn det_lower_bound(det_prior: f64, cumulative_bits: f64) -> Result<f64> {
    if !(det_prior > 0.0) || !det_prior.is_finite() {
        return Err(Error::invalid(format!(
            "prior determinant must be finite and positive, got {det_prior}"
        )));
    }
    if !(cumulative_bits >= 0.0) || !cumulative_bits.is_finite() {
        return Err(Error::invalid(format!(
            "cumulative utility must be finite and nonnegative, got {cumulative_bits}"
        )));
    }
    Ok(det_prior * (-2.0 * cumulative_bits).exp2())
}

/// Power bound implied by an average excitation cost `J` at state weight `q`:
/// `P <= (2/q) J + 2 W`.
pub fn power_bound_from_cost(cost: f64, q: f64, noise_var: f64) -> Result<f64> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::config("q", format!("must be positive, got {q}")));
    }
    if !(cost >= 0.0) || !cost.is_finite() {
        return Err(Error::invalid(format!(
            "cost must be finite and nonnegative, got {cost}"
        )));
    }
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::invalid(format!(
            "noise variance must be a finite positive number, got {noise_var}"
        )));
    }
    Ok((2.0 / q) * cost + 2.0 * noise_var)
}

/// Per-run record of utility gains, in bits.
#[derive(Clone, Debug, PartialEq)]
pub struct UtilityLedger {
    /// `F_1 .. F_T`.
    pub step_bits: Vec<f64>,
    /// `L_T = sum_t F_t` (compensated).
    pub cumulative_bits: f64,
    pub log2_det_prior: f64,
    pub log2_det_final: f64,
}

impl UtilityLedger {
    /// Builds the ledger from the determinant sequence `det Pi_0 .. det Pi_T`.
    pub fn from_dets(dets: &[f64]) -> Result<Self> {
        if dets.is_empty() {
            return Err(Error::invalid("determinant sequence is empty"));
        }
        if let Some(d) = dets.iter().find(|d| !(**d > 0.0) || !d.is_finite()) {
            return Err(Error::invalid(format!(
                "determinants must be finite and positive, got {d}"
            )));
        }
        let step_bits: Vec<f64> = dets
            .windows(2)
            .map(|w| 0.5 * (w[0].log2() - w[1].log2()))
            .collect();
        let cumulative_bits = stats::sum(&step_bits);
        Ok(UtilityLedger {
            step_bits,
            cumulative_bits,
            log2_det_prior: dets[0].log2(),
            log2_det_final: dets[dets.len() - 1].log2(),
        })
    }
}

/// Everything the bound chain needs from one aggregated experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    /// Monte Carlo estimate of `P_t = E[y_t^2]`, one entry per step.
    pub step_power: Vec<f64>,
    /// `P = mean_t P_t`.
    pub mean_power: f64,
    /// `C(P_t)` per step.
    pub step_capacity: Vec<f64>,
    /// `sum_t C(P_t)`.
    pub sum_step_capacity: f64,
    /// `C(P)`.
    pub capacity_of_mean_power: f64,
    /// `T * C(P)`.
    pub aggregate_capacity: f64,
    /// `(2/q) J + 2 W` at the estimated mean cost.
    pub cost_power_bound: f64,
    /// `det Pi_0 * 2^(-2 L)` at the estimated mean cumulative utility.
    pub det_lower_bound: f64,
}

impl BoundReport {
    pub fn assemble(
        step_power: Vec<f64>,
        noise_var: f64,
        q: f64,
        mean_cost: f64,
        det_prior: f64,
        cumulative_bits: f64,
    ) -> Result<Self> {
        let (sum_step_capacity, aggregate_capacity) =
            capacity_bound_chain(&step_power, noise_var)?;
        let mean_power = stats::mean(&step_power);
        let capacity_of_mean_power = awgn_capacity(mean_power, noise_var)?;
        let step_capacity = step_power
            .iter()
            .map(|&p| awgn_capacity(p, noise_var))
            .collect::<Result<Vec<f64>>>()?;
        let cost_power_bound = power_bound_from_cost(mean_cost, q, noise_var)?;
        let det_lower_bound = det_lower_bound(det_prior, cumulative_bits)?;
        Ok(BoundReport {
            step_power,
            mean_power,
            step_capacity,
            sum_step_capacity,
            capacity_of_mean_power,
            aggregate_capacity,
            cost_power_bound,
            det_lower_bound,
        })
    }
}

/// Pooled second-order diagnostics for the closed-loop processes.
#[derive(Clone, Debug, PartialEq)]
pub struct IndependenceDiagnostics {
    /// Pooled state autocorrelation at lags `1..=DIAG_MAX_LAG`; `None` when
    /// the pooled variance is degenerate (constant sequences).
    pub lag_autocorr: [Option<f64>; DIAG_MAX_LAG],
    /// 95% half-width `1.96 / sqrt(#pairs)` per lag.
    pub lag_halfwidth: [f64; DIAG_MAX_LAG],
    /// Excess kurtosis of the channel inputs per time slice across runs;
    /// `None` where the slice variance is degenerate.
    pub kurtosis_excess: Vec<Option<f64>>,
}

/// Computes pooled autocorrelations of the state sequences (lags 1..=5, with
/// 95% white-noise bands) and per-slice excess kurtosis of the channel
/// inputs. Pairs never straddle run boundaries.
pub fn independence_diagnostics(
    states: &[Vec<f64>],
    channels: &[Vec<f64>],
) -> Result<IndependenceDiagnostics> {
    for (name, set) in [("states", states), ("channels", channels)] {
        if set.len() < DIAG_MIN_RUNS {
            return Err(Error::InsufficientRuns {
                got: set.len(),
                need: DIAG_MIN_RUNS,
            });
        }
        let len = set[0].len();
        if set.iter().any(|row| row.len() != len) {
            return Err(Error::LengthMismatch(format!(
                "{name} sequences do not share a common horizon"
            )));
        }
    }
    let state_len = states[0].len();
    if state_len < 2 {
        return Err(Error::invalid(
            "state sequences must have at least two samples",
        ));
    }

    // Pooled mean and centered energy across every run and sample.
    let total = (states.len() * state_len) as f64;
    let mut mean_acc = KahanSum::new();
    for row in states {
        for &x in row {
            mean_acc.add(x);
        }
    }
    let pooled_mean = mean_acc.value() / total;
    let mut energy = KahanSum::new();
    for row in states {
        for &x in row {
            let d = x - pooled_mean;
            energy.add(d * d);
        }
    }
    let s0 = energy.value();
    let degenerate = s0 <= 1e-24 * total * pooled_mean.mul_add(pooled_mean, 1.0);

    let mut lag_autocorr = [None; DIAG_MAX_LAG];
    let mut lag_halfwidth = [0.0; DIAG_MAX_LAG];
    for lag in 1..=DIAG_MAX_LAG {
        let pairs_per_run = state_len.saturating_sub(lag);
        let pairs = (states.len() * pairs_per_run) as f64;
        lag_halfwidth[lag - 1] = if pairs > 0.0 {
            Z_95 / pairs.sqrt()
        } else {
            f64::INFINITY
        };
        if degenerate || pairs == 0.0 {
            continue;
        }
        let mut cross = KahanSum::new();
        for row in states {
            for t in 0..pairs_per_run {
                cross.add((row[t] - pooled_mean) * (row[t + lag] - pooled_mean));
            }
        }
        lag_autocorr[lag - 1] = Some(cross.value() / s0);
    }

    // Excess kurtosis per time slice of the channel inputs.
    let chan_len = channels[0].len();
    let runs = channels.len() as f64;
    let mut kurtosis_excess = Vec::with_capacity(chan_len);
    for t in 0..chan_len {
        let mut m = KahanSum::new();
        for row in channels {
            m.add(row[t]);
        }
        let slice_mean = m.value() / runs;
        let (mut m2, mut m4) = (KahanSum::new(), KahanSum::new());
        for row in channels {
            let d = row[t] - slice_mean;
            let d2 = d * d;
            m2.add(d2);
            m4.add(d2 * d2);
        }
        let m2 = m2.value() / runs;
        let m4 = m4.value() / runs;
        if m2 <= 1e-24 * slice_mean.mul_add(slice_mean, 1.0) {
            kurtosis_excess.push(None);
        } else {
            kurtosis_excess.push(Some(m4 / (m2 * m2) - 3.0));
        }
    }

    Ok(IndependenceDiagnostics {
        lag_autocorr,
        lag_halfwidth,
        kurtosis_excess,
    })
}
