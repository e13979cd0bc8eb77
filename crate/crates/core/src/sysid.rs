//! Scalar linear-Gaussian plant, excitation policies, and closed-loop
//! trajectory simulation.
//!
//! The plant is `x_{t+1} = a x_t + b u_t + w_t` with `x_0 = 0` and
//! `w_t ~ N(0, noise_var)` i.i.d. The regressor at step `t` is
//! `z_t = [x_t, u_t]`, and the noiseless response `y_{t+1} = a x_t + b u_t`
//! is recorded alongside the states (it is the quantity whose power the
//! capacity bounds constrain).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::Belief;
use crate::linalg::Vec2;
use crate::rng::RngStream;

/// True plant parameters and noise level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemSpec {
    pub a: f64,
    pub b: f64,
    /// Strictly positive process-noise variance.
    pub noise_var: f64,
    /// Initial state. The model pins this to zero; validation rejects
    /// anything else.
    pub x0: f64,
}

impl SystemSpec {
    pub fn new(a: f64, b: f64, noise_var: f64) -> Self {
        SystemSpec {
            a,
            b,
            noise_var,
            x0: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::config("theta", "parameters must be finite"));
        }
        if !(self.noise_var > 0.0) || !self.noise_var.is_finite() {
            return Err(Error::config(
                "noise_var",
                format!("must be a finite positive number, got {}", self.noise_var),
            ));
        }
        if self.x0 != 0.0 {
            return Err(Error::config(
                "x0",
                format!("initial state is fixed at 0, got {}", self.x0),
            ));
        }
        Ok(())
    }

    pub fn theta(&self) -> Vec2 {
        Vec2::new(self.a, self.b)
    }
}

/// Deterministic excitation policy `u_t = g_t(x_0..x_t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    /// `u_t = gain * x_t`
    Linear { gain: f64 },
    /// `u_t = gain * x_t * (1 + sin x_t)`
    SinModulated { gain: f64 },
    /// `u_t = sequence[t]`
    OpenLoop { sequence: Vec<f64> },
    /// `u_t = 0`
    Zero,
}

impl PolicySpec {
    /// Input at step `t` given the state history `x_0..x_t`.
    pub fn eval(&self, t: usize, history: &[f64]) -> Result<f64> {
        if history.len() != t + 1 {
            return Err(Error::LengthMismatch(format!(
                "policy at step {t} needs history x_0..x_{t} ({} states), got {}",
                t + 1,
                history.len()
            )));
        }
        let x = history[t];
        match self {
            PolicySpec::Linear { gain } => Ok(gain * x),
            PolicySpec::SinModulated { gain } => Ok(gain * x * (1.0 + x.sin())),
            PolicySpec::OpenLoop { sequence } => sequence.get(t).copied().ok_or_else(|| {
                Error::config(
                    "policy.sequence",
                    format!("open-loop sequence has {} entries, step {t} requested", sequence.len()),
                )
            }),
            PolicySpec::Zero => Ok(0.0),
        }
    }

    /// Feedback gain, for the policy kinds that have one.
    pub fn gain(&self) -> Option<f64> {
        match self {
            PolicySpec::Linear { gain } | PolicySpec::SinModulated { gain } => Some(*gain),
            _ => None,
        }
    }

    /// Same policy kind with the gain replaced (sweep support).
    pub fn with_gain(&self, gain: f64) -> Result<PolicySpec> {
        match self {
            PolicySpec::Linear { .. } => Ok(PolicySpec::Linear { gain }),
            PolicySpec::SinModulated { .. } => Ok(PolicySpec::SinModulated { gain }),
            _ => Err(Error::config(
                "sweep.path",
                "policy.gain can only be swept for linear or sin_modulated policies",
            )),
        }
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        match self {
            PolicySpec::Linear { gain } | PolicySpec::SinModulated { gain } => {
                if !gain.is_finite() {
                    return Err(Error::config("policy.gain", "gain must be finite"));
                }
            }
            PolicySpec::OpenLoop { sequence } => {
                if sequence.len() < horizon {
                    return Err(Error::config(
                        "policy.sequence",
                        format!(
                            "open-loop sequence has {} entries but the horizon is {horizon}",
                            sequence.len()
                        ),
                    ));
                }
                if sequence.iter().any(|u| !u.is_finite()) {
                    return Err(Error::config("policy.sequence", "entries must be finite"));
                }
            }
            PolicySpec::Zero => {}
        }
        Ok(())
    }
}

/// Complete record of one closed-loop rollout.
///
/// For a full rollout over horizon `T`: `states` holds `x_0..x_T`, the other
/// per-step vectors hold `T` entries. When the divergence guard trips, the
/// partial record up to and including the offending state is retained and
/// `diverged` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub states: Vec<f64>,
    pub inputs: Vec<f64>,
    pub noises: Vec<f64>,
    /// `z_t = [x_t, u_t]` for each executed step.
    pub regressors: Vec<Vec2>,
    /// `y_{t+1} = a x_t + b u_t` for each executed step.
    pub channel_inputs: Vec<f64>,
    pub diverged: bool,
}

impl Trajectory {
    /// Number of executed steps.
    pub fn horizon(&self) -> usize {
        self.inputs.len()
    }

    /// Recomputes the dynamics and the `y_{t+1} = x_{t+1} - w_t` identity.
    pub fn check_consistency(&self, theta: Vec2, tol: f64) -> Result<()> {
        let steps = self.horizon();
        if self.states.len() != steps + 1
            || self.noises.len() != steps
            || self.regressors.len() != steps
            || self.channel_inputs.len() != steps
        {
            return Err(Error::LengthMismatch(format!(
                "trajectory with {} states, {} inputs, {} noises, {} regressors, {} channel inputs",
                self.states.len(),
                self.inputs.len(),
                self.noises.len(),
                self.regressors.len(),
                self.channel_inputs.len()
            )));
        }
        for t in 0..steps {
            let drift = theta[0] * self.states[t] + theta[1] * self.inputs[t];
            let expect = drift + self.noises[t];
            if (self.states[t + 1] - expect).abs() > tol {
                return Err(Error::invalid(format!(
                    "state recomputation failed at step {t}: {} vs {expect}",
                    self.states[t + 1]
                )));
            }
            if (self.channel_inputs[t] - (self.states[t + 1] - self.noises[t])).abs() > tol {
                return Err(Error::invalid(format!(
                    "channel input at step {t} is not x - w: {} vs {}",
                    self.channel_inputs[t],
                    self.states[t + 1] - self.noises[t]
                )));
            }
        }
        Ok(())
    }
}

/// One step of the plant.
pub fn system_step(x: f64, u: f64, system: &SystemSpec, w: f64) -> f64 {
    (system.a * x + system.b * u) + w
}

/// Draws `horizon` process-noise values `w_t ~ N(0, noise_var)`.
pub fn draw_noise_sequence(
    noise_var: f64,
    horizon: usize,
    stream: &mut RngStream,
) -> Result<Vec<f64>> {
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::config(
            "noise_var",
            format!("must be a finite positive number, got {noise_var}"),
        ));
    }
    if horizon == 0 {
        return Err(Error::config("horizon", "must be at least 1"));
    }
    let sd = noise_var.sqrt();
    Ok((0..horizon).map(|_| sd * stream.normal()).collect())
}

/// Draws one parameter pair from a Gaussian prior belief.
pub fn sample_parameters(prior: &Belief, stream: &mut RngStream) -> Result<Vec2> {
    prior.cov.check_spd("prior covariance")?;
    // Closed-form lower Cholesky factor of the 2x2 covariance.
    let c = prior.cov.0;
    let l00 = c[0][0].sqrt();
    let l10 = c[0][1] / l00;
    let l11 = (c[1][1] - l10 * l10).sqrt();
    if !(l11 > 0.0) {
        return Err(Error::NotSpd(
            "prior covariance is numerically rank-deficient".to_string(),
        ));
    }
    let n0 = stream.normal();
    let n1 = stream.normal();
    Ok(Vec2::new(
        prior.mean[0] + l00 * n0,
        prior.mean[1] + l10 * n0 + l11 * n1,
    ))
}

/// Rolls the closed loop forward for `horizon` steps under the given policy
/// and noise sequence.
///
/// The guard stops the rollout when `|x_{t+1}|` exceeds it (or becomes
/// non-finite); the partial record is retained with `diverged = true`.
pub fn simulate_trajectory(
    theta: Vec2,
    policy: &PolicySpec,
    horizon: usize,
    noises: &[f64],
    guard: f64,
) -> Result<Trajectory> {
    if noises.len() != horizon {
        return Err(Error::LengthMismatch(format!(
            "horizon {horizon} but {} noise values",
            noises.len()
        )));
    }
    if !theta.is_finite() {
        return Err(Error::invalid("theta must be finite"));
    }
    if !(guard > 0.0) || !guard.is_finite() {
        return Err(Error::config(
            "guard",
            format!("must be a finite positive number, got {guard}"),
        ));
    }

    let mut states = Vec::with_capacity(horizon + 1);
    let mut inputs = Vec::with_capacity(horizon);
    let mut used_noises = Vec::with_capacity(horizon);
    let mut regressors = Vec::with_capacity(horizon);
    let mut channel_inputs = Vec::with_capacity(horizon);
    let mut diverged = false;

    states.push(0.0);
    for t in 0..horizon {
        let x = states[t];
        let u = policy.eval(t, &states)?;
        let z = Vec2::new(x, u);
        let y = theta.dot(z);
        let w = noises[t];
        let x_next = y + w;
        inputs.push(u);
        used_noises.push(w);
        regressors.push(z);
        channel_inputs.push(y);
        states.push(x_next);
        if !x_next.is_finite() || x_next.abs() > guard {
            diverged = true;
            break;
        }
    }

    Ok(Trajectory {
        states,
        inputs,
        noises: used_noises,
        regressors,
        channel_inputs,
        diverged,
    })
}
