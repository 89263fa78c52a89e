//! Information-density typicality and Monte Carlo checks of its lemmas.
//!
//! A pair of sequences is jointly δ-typical when its normalized information
//! density lies within δ of the target mutual information (boundary
//! included). The typical set itself is never materialized.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::source::{self, DensityRatio, SourceParams};
use crate::stats::Proportion;

/// Smallest trial count accepted by the estimators.
pub const MIN_TRIALS: u64 = 1_000;

/// Expected hit count below which a bracket check is inconclusive.
pub const MIN_EXPECTED_HITS: f64 = 100.0;

/// Slack `delta` and target mutual information of the typicality test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypicalityConfig {
    delta: f64,
    target_mi: f64,
}

impl TypicalityConfig {
    pub fn new(delta: f64, target_mi: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid("delta", format!("must be positive and finite, got {delta}")));
        }
        if !(target_mi >= 0.0 && target_mi.is_finite()) {
            return Err(invalid("target_mi", format!("must be finite and non-negative, got {target_mi}")));
        }
        Ok(Self { delta, target_mi })
    }

    /// Configuration targeting `I(X;Y)` of `params`.
    pub fn for_source(params: &SourceParams, delta: f64) -> Result<Self> {
        let mi = source::mutual_information(params)
            .finite()
            .ok_or(Error::DegenerateDensity)?;
        Self::new(delta, mi)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn target_mi(&self) -> f64 {
        self.target_mi
    }
}

/// `|density_sum / n - target_mi| <= delta`.
#[inline]
pub fn is_jointly_typical(cfg: &TypicalityConfig, density_sum: f64, n: usize) -> bool {
    debug_assert!(n >= 1);
    (density_sum / n as f64 - cfg.target_mi).abs() <= cfg.delta
}

fn check_estimator_inputs(params: &SourceParams, cfg: &TypicalityConfig, n: usize, trials: u64) -> Result<DensityRatio> {
    if n == 0 {
        return Err(invalid("n", "block length must be at least 1"));
    }
    if trials < MIN_TRIALS {
        return Err(invalid("trials", format!("need at least {MIN_TRIALS}, got {trials}")));
    }
    let ratio = DensityRatio::new(params)?;
    let mi = source::mutual_information(params).to_f64();
    if (cfg.target_mi - mi).abs() > 1e-12 * mi.max(1.0) {
        return Err(invalid(
            "target_mi",
            format!("{} does not match I(X;Y) = {mi}", cfg.target_mi),
        ));
    }
    Ok(ratio)
}

/// Whether trial `index` of the correlated stream `seed` yields a jointly
/// typical source pair. The protocol draws its source pairs from the same
/// streams, so its E1 count is the complement of this estimator's hits.
pub fn trial_is_typical(
    params: &SourceParams,
    ratio: &DensityRatio,
    cfg: &TypicalityConfig,
    n: usize,
    seed: u64,
    index: u64,
) -> bool {
    let mut rng = rng::trial_rng(seed, index);
    let pair = source::sample_pairs_with(params, n, &mut rng);
    is_jointly_typical(cfg, ratio.sum_bits(&pair.x_seq, &pair.y_seq), n)
}

/// Monte Carlo estimate of `Pr{(X^n, Y^n) jointly δ-typical}`.
pub fn estimate_joint_typicality_probability(
    params: &SourceParams,
    cfg: &TypicalityConfig,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<Proportion> {
    let ratio = check_estimator_inputs(params, cfg, n, trials)?;
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&t| trial_is_typical(params, &ratio, cfg, n, seed, t))
        .count() as u64;
    Ok(Proportion::new(hits, trials))
}

/// Outcome of comparing an estimate with the two-sided exponent bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BracketStatus {
    Inside,
    Outside,
    /// Too few expected hits for the check to mean anything.
    Inconclusive,
}

/// Probability that an independently paired `(x^n, y^n)` is jointly typical,
/// together with the bracket `[2^{-n(I+δ)}, 2^{-n(I-δ)}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairingEstimate {
    pub n: usize,
    pub probability: Proportion,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// `log2(p) / n`, `-inf` when no hits were observed.
    pub exponent: f64,
    /// Delta-method standard error of `exponent`.
    pub exponent_std_error: f64,
    pub status: BracketStatus,
}

impl PairingEstimate {
    pub fn is_sufficient(&self) -> bool {
        self.status != BracketStatus::Inconclusive
    }
}

/// Monte Carlo estimate of `p_X^n p_Y^n(T_δ)` with the bracket check at
/// `k_sigma` standard errors.
pub fn estimate_independent_pairing_probability(
    params: &SourceParams,
    cfg: &TypicalityConfig,
    n: usize,
    trials: u64,
    seed: u64,
    k_sigma: f64,
) -> Result<PairingEstimate> {
    let ratio = check_estimator_inputs(params, cfg, n, trials)?;
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = rng::trial_rng(seed, t);
            let pair = source::sample_independent_with(params, n, &mut rng);
            is_jointly_typical(cfg, ratio.sum_bits(&pair.x_seq, &pair.y_seq), n)
        })
        .count() as u64;
    let probability = Proportion::new(hits, trials);

    let nf = n as f64;
    let (mi, delta) = (cfg.target_mi, cfg.delta);
    let lower_bound = (-nf * (mi + delta)).exp2();
    let upper_bound = (-nf * (mi - delta)).exp2();
    let (exponent, exponent_std_error) = if hits == 0 {
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        let p = probability.estimate;
        (
            p.log2() / nf,
            probability.std_error / (p * std::f64::consts::LN_2 * nf),
        )
    };

    let status = if trials as f64 * upper_bound.min(1.0) < MIN_EXPECTED_HITS {
        BracketStatus::Inconclusive
    } else {
        let slack = k_sigma * probability.std_error;
        let inside = probability.estimate + slack >= lower_bound
            && probability.estimate - slack <= upper_bound;
        if inside {
            BracketStatus::Inside
        } else {
            BracketStatus::Outside
        }
    };

    Ok(PairingEstimate {
        n,
        probability,
        lower_bound,
        upper_bound,
        exponent,
        exponent_std_error,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicate_boundaries() {
        let cfg = TypicalityConfig::new(0.25, 0.5).unwrap();
        assert!(is_jointly_typical(&cfg, 10.0 * 0.5, 10));
        assert!(is_jointly_typical(&cfg, 8.0 * 0.75, 8));
        assert!(is_jointly_typical(&cfg, 8.0 * 0.25, 8));
        assert!(!is_jointly_typical(&cfg, 8.0 * 1.0, 8));
        assert!(!is_jointly_typical(&cfg, 0.0, 8));
    }

    #[test]
    fn config_validation() {
        assert!(TypicalityConfig::new(0.0, 0.5).is_err());
        assert!(TypicalityConfig::new(0.1, -0.5).is_err());
        assert!(TypicalityConfig::new(0.1, f64::INFINITY).is_err());
        assert!(TypicalityConfig::for_source(&SourceParams::standard(1.0).unwrap(), 0.1).is_err());
    }

    #[test]
    fn independent_source_is_always_typical() {
        let params = SourceParams::standard(0.0).unwrap();
        let cfg = TypicalityConfig::for_source(&params, 0.01).unwrap();
        let p = estimate_joint_typicality_probability(&params, &cfg, 1, 1000, 3).unwrap();
        assert_eq!(p.estimate, 1.0);
        let q = estimate_independent_pairing_probability(&params, &cfg, 4, 1000, 3, 3.0).unwrap();
        assert_eq!(q.probability.estimate, 1.0);
        assert_eq!(q.status, BracketStatus::Inside);
    }

    #[test]
    fn estimator_rejects_bad_inputs() {
        let params = SourceParams::standard(0.5).unwrap();
        let cfg = TypicalityConfig::for_source(&params, 0.1).unwrap();
        assert!(estimate_joint_typicality_probability(&params, &cfg, 10, 999, 0).is_err());
        assert!(estimate_joint_typicality_probability(&params, &cfg, 0, 1000, 0).is_err());
        let wrong = TypicalityConfig::new(0.1, 0.3).unwrap();
        assert!(estimate_joint_typicality_probability(&params, &wrong, 10, 1000, 0).is_err());
    }

    #[test]
    fn too_few_trials_is_inconclusive() {
        let params = SourceParams::standard(0.8).unwrap();
        let cfg = TypicalityConfig::for_source(&params, 0.05).unwrap();
        // trials * 2^{-n(I - delta)} = 1000 * 2^{-40 * 0.687} << 100
        let q = estimate_independent_pairing_probability(&params, &cfg, 40, 1000, 1, 3.0).unwrap();
        assert_eq!(q.status, BracketStatus::Inconclusive);
        assert!(!q.is_sufficient());
    }

    #[test]
    fn estimates_are_reproducible() {
        let params = SourceParams::standard(0.6).unwrap();
        let cfg = TypicalityConfig::for_source(&params, 0.2).unwrap();
        let a = estimate_joint_typicality_probability(&params, &cfg, 12, 2000, 8).unwrap();
        let b = estimate_joint_typicality_probability(&params, &cfg, 12, 2000, 8).unwrap();
        assert_eq!(a, b);
    }
}
