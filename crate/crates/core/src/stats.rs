//! Small statistical helpers shared by the estimators and reports.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// A Monte Carlo proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub hits: u64,
    pub trials: u64,
    pub estimate: f64,
    pub std_error: f64,
}

impl Proportion {
    pub fn new(hits: u64, trials: u64) -> Self {
        let estimate = if trials == 0 {
            0.0
        } else {
            hits as f64 / trials as f64
        };
        let std_error = if trials == 0 {
            0.0
        } else {
            (estimate * (1.0 - estimate) / trials as f64).sqrt()
        };
        Self {
            hits,
            trials,
            estimate,
            std_error,
        }
    }

    /// True when `self` is not smaller than `other` by more than `k`
    /// combined standard errors.
    pub fn not_below(&self, other: &Proportion, k: f64) -> bool {
        self.estimate >= other.estimate - k * self.combined_std_error(other)
    }

    pub fn combined_std_error(&self, other: &Proportion) -> f64 {
        self.std_error.hypot(other.std_error)
    }
}

/// Plug-in entropy (bits) of an empirical distribution given by counts.
/// Independent of the order the counts arrive in, bit for bit.
pub fn plugin_entropy<I: IntoIterator<Item = u64>>(counts: I) -> f64 {
    let mut counts: Vec<u64> = counts.into_iter().filter(|&c| c > 0).collect();
    counts.sort_unstable();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let h: f64 = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// Miller–Madow first-order bias correction in bits: (m - 1) / (2N ln 2).
pub fn miller_madow_correction(occupied: usize, samples: u64) -> f64 {
    if samples == 0 || occupied == 0 {
        return 0.0;
    }
    (occupied as f64 - 1.0) / (2.0 * samples as f64 * std::f64::consts::LN_2)
}

/// Frequency table of a sample stream.
pub fn frequencies<T: Eq + Hash + Clone, I: IntoIterator<Item = T>>(items: I) -> HashMap<T, u64> {
    let mut map = HashMap::new();
    for item in items {
        *map.entry(item).or_insert(0) += 1;
    }
    map
}

/// Kolmogorov–Smirnov statistic of a sample against Uniform(0, 1).
pub fn ks_uniform_statistic(sample: &[f64]) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let lo = u - i as f64 / n;
            let hi = (i + 1) as f64 / n - u;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at significance `alpha` for `n` samples.
pub fn ks_critical_value(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Pearson chi-square statistic of observed counts against a uniform law.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// Upper critical value of the chi-square law with `dof` degrees of freedom.
pub fn chi_square_critical(dof: usize, alpha: f64) -> f64 {
    ChiSquared::new(dof as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - alpha)
}
