//! Compensated accumulation helpers.
//!
//! All Monte Carlo reductions run in run-index order with Neumaier
//! compensated summation, so aggregates do not depend on how work was
//! scheduled across threads.

/// Neumaier variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice, in order.
pub(crate) fn sum(xs: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    debug_assert!(!xs.is_empty());
    sum(xs) / xs.len() as f64
}

/// Two-pass sample variance (denominator n - 1). `None` for fewer than two
/// samples.
pub(crate) fn sample_variance(xs: &[f64], mean: f64) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let mut acc = KahanSum::new();
    for &x in xs {
        let d = x - mean;
        acc.add(d * d);
    }
    Some(acc.value() / (xs.len() - 1) as f64)
}

/// Standard error of the sample mean. `None` for fewer than two samples.
pub(crate) fn standard_error(xs: &[f64], mean: f64) -> Option<f64> {
    sample_variance(xs, mean).map(|v| (v / xs.len() as f64).sqrt())
}
