//! Small estimators shared by the walk and campaign code.

use serde::{Deserialize, Serialize};

/// The two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// A binomial count with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        assert!(successes <= trials, "more successes than trials");
        Self { successes, trials }
    }

    pub fn from_flags<I: IntoIterator<Item = bool>>(flags: I) -> Self {
        let (mut s, mut t) = (0, 0);
        for f in flags {
            t += 1;
            s += f as u64;
        }
        Self::new(s, t)
    }

    /// `NaN` when there are no trials.
    pub fn estimate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Wilson score interval at normal quantile `z`. With no trials the
    /// interval is all of `[0, 1]`.
    pub fn wilson(&self, z: f64) -> (f64, f64) {
        if self.trials == 0 {
            return (0.0, 1.0);
        }
        let n = self.trials as f64;
        let phat = self.estimate();
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let centre = (phat + z2 / (2.0 * n)) / denom;
        let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        // the exact interval always contains phat; clamp away rounding at s = 0 or s = n
        ((centre - half).clamp(0.0, phat), (centre + half).clamp(phat, 1.0))
    }

    pub fn wilson95(&self) -> (f64, f64) {
        self.wilson(Z95)
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub count: u64,
    pub mean: f64,
    /// Zero for fewer than two samples.
    pub std_err: f64,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let count = xs.len() as u64;
        if xs.is_empty() {
            return Self {
                count,
                mean: f64::NAN,
                std_err: 0.0,
            };
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std_err = if xs.len() < 2 {
            0.0
        } else {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        };
        Self {
            count,
            mean,
            std_err,
        }
    }

    /// Normal-approximation interval `mean ± z * std_err`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.mean - z * self.std_err, self.mean + z * self.std_err)
    }
}
