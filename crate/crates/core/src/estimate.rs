//! Monte Carlo estimates and two-route comparisons.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, stderr: 0.0, samples: 0 }
    }
}

/// Sample mean with its standard error.
pub fn mean_estimate(values: impl Iterator<Item = f64>) -> Estimate {
    let (mut s1, mut s2, mut count) = (0.0, 0.0, 0usize);
    for v in values {
        s1 += v;
        s2 += v * v;
        count += 1;
    }
    if count == 0 {
        return Estimate { value: 0.0, stderr: 0.0, samples: 0 };
    }
    let mean = s1 / count as f64;
    let var = (s2 / count as f64 - mean * mean).max(0.0);
    Estimate {
        value: mean,
        stderr: (var / count as f64).sqrt(),
        samples: count,
    }
}

/// The same quantity computed along two independent routes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoRouteCheck {
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
    pub diff: f64,
    pub samples: usize,
}

impl TwoRouteCheck {
    pub fn new(lhs: f64, lhs_stderr: f64, rhs: f64, rhs_stderr: f64, samples: usize) -> Self {
        TwoRouteCheck {
            lhs,
            lhs_stderr,
            rhs,
            rhs_stderr,
            diff: lhs - rhs,
            samples,
        }
    }

    pub fn combined_stderr(&self) -> f64 {
        self.lhs_stderr.hypot(self.rhs_stderr)
    }

    /// `|diff| <= sigmas * stderr + rel * max(|lhs|, |rhs|)`.
    pub fn agrees(&self, sigmas: f64, rel: f64) -> bool {
        let scale = self.lhs.abs().max(self.rhs.abs());
        self.diff.abs() <= sigmas * self.combined_stderr() + rel * scale
    }
}
