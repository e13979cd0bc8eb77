//! Regularized least-squares estimation of the parameter pair.
//!
//! The working form is the covariance recursion (a Kalman filter for the
//! static-parameter observation model `x_{t+1} = z_t^T theta + w_t`):
//!
//! ```text
//! Pi'    = Pi - (Pi z)(Pi z)^T / (W + z^T Pi z)
//! theta' = theta + (Pi z) (x_next - z^T theta) / (W + z^T Pi z)
//! ```
//!
//! `batch_regularized_lse` solves the same problem from scratch via the
//! normal equations in information form, and exists as an independent route
//! for cross-checking the recursion; the two must always agree and are
//! deliberately kept separate.

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};

/// Gaussian belief over `theta = [a, b]`: mean estimate, error covariance,
/// and the number of absorbed observations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Belief {
    pub mean: Vec2,
    pub cov: Mat2,
    pub step: usize,
}

impl Belief {
    /// A belief at step 0 with a validated SPD covariance.
    pub fn new(mean: Vec2, cov: Mat2) -> Result<Self> {
        let b = Belief { mean, cov, step: 0 };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(Error::invalid("belief mean must be finite"));
        }
        self.cov.check_spd("belief covariance")
    }

    pub fn det(&self) -> f64 {
        self.cov.det()
    }

    /// Information matrix `Pi^-1`.
    pub fn information(&self) -> Result<Mat2> {
        self.cov.check_spd("belief covariance")?;
        self.cov.inverse()
    }
}

/// One recursive update with regressor `z` and observation `x_next`.
pub fn rls_update(belief: &Belief, z: Vec2, x_next: f64, noise_var: f64) -> Result<Belief> {
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::invalid(format!(
            "noise variance must be a finite positive number, got {noise_var}"
        )));
    }
    if !z.is_finite() || !x_next.is_finite() {
        return Err(Error::invalid(format!(
            "regressor and observation must be finite, got z = {z:?}, x_next = {x_next}"
        )));
    }
    let pz = belief.cov.matvec(z);
    let denom = noise_var + z.dot(pz);
    let cov = (belief.cov - pz.outer(pz).scale(1.0 / denom)).symmetrize();
    let innovation = x_next - z.dot(belief.mean);
    let mean = belief.mean + pz.scale(innovation / denom);
    Ok(Belief {
        mean,
        cov,
        step: belief.step + 1,
    })
}

/// Solves the regularized least-squares problem in one shot from the full
/// record, via the normal equations:
///
/// ```text
/// M    = Pi_0^-1 + sum z_t z_t^T / W
/// rhs  = Pi_0^-1 theta_0 + sum z_t x_{t+1} / W
/// Pi_T = M^-1,  theta_T = Pi_T rhs
/// ```
pub fn batch_regularized_lse(
    prior: &Belief,
    regressors: &[Vec2],
    observations: &[f64],
    noise_var: f64,
) -> Result<Belief> {
    if regressors.len() != observations.len() {
        return Err(Error::LengthMismatch(format!(
            "{} regressors vs {} observations",
            regressors.len(),
            observations.len()
        )));
    }
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::invalid(format!(
            "noise variance must be a finite positive number, got {noise_var}"
        )));
    }
    let w_inv = 1.0 / noise_var;
    let mut info = prior.information()?;
    let mut rhs = info.matvec(prior.mean);
    for (z, &x) in regressors.iter().zip(observations) {
        info = info + z.outer(*z).scale(w_inv);
        rhs = rhs + z.scale(x * w_inv);
    }
    let cov = info.inverse()?.symmetrize();
    let mean = cov.matvec(rhs);
    Ok(Belief {
        mean,
        cov,
        step: prior.step + regressors.len(),
    })
}

/// Accumulated information matrix `Pi_0^-1 + sum z_t z_t^T / W`.
pub fn information_matrix(prior: &Belief, regressors: &[Vec2], noise_var: f64) -> Result<Mat2> {
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::invalid(format!(
            "noise variance must be a finite positive number, got {noise_var}"
        )));
    }
    let w_inv = 1.0 / noise_var;
    let mut info = prior.information()?;
    for z in regressors {
        info = info + z.outer(*z).scale(w_inv);
    }
    Ok(info)
}
