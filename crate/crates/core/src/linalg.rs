//! Fixed-size 2-vector and 2x2 matrix arithmetic.
//!
//! Everything the estimator needs at this size — determinant, inverse,
//! eigenvalues, quadratic forms — has an exact closed-form expression, so the
//! crate carries no general linear-algebra dependency.

use std::ops::{Add, Index, Mul, Sub};

use crate::error::{Error, Result};

/// Column 2-vector.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2(pub [f64; 2]);

impl Vec2 {
    pub const ZERO: Vec2 = Vec2([0.0, 0.0]);

    pub fn new(a: f64, b: f64) -> Self {
        Vec2([a, b])
    }

    pub fn dot(self, rhs: Vec2) -> f64 {
        self.0[0] * rhs.0[0] + self.0[1] * rhs.0[1]
    }

    /// Outer product `self * rhs^T`.
    pub fn outer(self, rhs: Vec2) -> Mat2 {
        Mat2([
            [self.0[0] * rhs.0[0], self.0[0] * rhs.0[1]],
            [self.0[1] * rhs.0[0], self.0[1] * rhs.0[1]],
        ])
    }

    pub fn scale(self, s: f64) -> Vec2 {
        Vec2([self.0[0] * s, self.0[1] * s])
    }

    pub fn is_finite(self) -> bool {
        self.0[0].is_finite() && self.0[1].is_finite()
    }
}

impl Index<usize> for Vec2 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1]])
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1]])
    }
}

/// Row-major 2x2 matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn det(self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn matvec(self, v: Vec2) -> Vec2 {
        Vec2([
            self.0[0][0] * v.0[0] + self.0[0][1] * v.0[1],
            self.0[1][0] * v.0[0] + self.0[1][1] * v.0[1],
        ])
    }

    /// Quadratic form `v^T M v`.
    pub fn quad_form(self, v: Vec2) -> f64 {
        v.dot(self.matvec(v))
    }

    pub fn scale(self, s: f64) -> Mat2 {
        Mat2([
            [self.0[0][0] * s, self.0[0][1] * s],
            [self.0[1][0] * s, self.0[1][1] * s],
        ])
    }

    /// Exact symmetrization `(M + M^T) / 2`.
    pub fn symmetrize(self) -> Mat2 {
        let off = 0.5 * (self.0[0][1] + self.0[1][0]);
        Mat2([[self.0[0][0], off], [off, self.0[1][1]]])
    }

    pub fn inverse(self) -> Result<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return Err(Error::invalid(format!(
                "2x2 matrix is singular or non-finite (det = {d})"
            )));
        }
        Ok(Mat2([
            [self.0[1][1] / d, -self.0[0][1] / d],
            [-self.0[1][0] / d, self.0[0][0] / d],
        ]))
    }

    /// Eigenvalues of a symmetric matrix, smallest first.
    ///
    /// Closed form: `m ± sqrt(((a - d)/2)^2 + b^2)` with `m = trace/2`.
    pub fn eigenvalues_sym(self) -> (f64, f64) {
        let m = 0.5 * self.trace();
        let half_gap = 0.5 * (self.0[0][0] - self.0[1][1]);
        let r = half_gap.hypot(self.0[0][1]);
        (m - r, m + r)
    }

    pub fn max_abs(self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    pub fn is_symmetric(self, tol: f64) -> bool {
        (self.0[0][1] - self.0[1][0]).abs() <= tol
    }

    /// Checks symmetry and positive definiteness (Sylvester criterion).
    pub fn check_spd(self, what: &str) -> Result<()> {
        if self.0.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NotSpd(format!("{what} has non-finite entries")));
        }
        let tol = 1e-12 * self.max_abs().max(1.0);
        if !self.is_symmetric(tol) {
            return Err(Error::NotSpd(format!(
                "{what} is asymmetric: m01 = {}, m10 = {}",
                self.0[0][1], self.0[1][0]
            )));
        }
        if !(self.0[0][0] > 0.0 && self.det() > 0.0) {
            let (lo, hi) = self.eigenvalues_sym();
            return Err(Error::NotSpd(format!(
                "{what} has eigenvalues {lo}, {hi}"
            )));
        }
        Ok(())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2([
            [self.0[0][0] + rhs.0[0][0], self.0[0][1] + rhs.0[0][1]],
            [self.0[1][0] + rhs.0[1][0], self.0[1][1] + rhs.0[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2([
            [self.0[0][0] - rhs.0[0][0], self.0[0][1] - rhs.0[0][1]],
            [self.0[1][0] - rhs.0[1][0], self.0[1][1] - rhs.0[1][1]],
        ])
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        self.scale(s)
    }
}
