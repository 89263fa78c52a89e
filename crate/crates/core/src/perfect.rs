//! Zero-communication key agreement for perfectly correlated sources.
//!
//! With `|rho| = 1`, `Y = g(X)` for an invertible affine `g`. Terminal A maps
//! its symbol through the standard normal CDF of the standardized value and
//! quantizes the result into `2^key_bits` equal-width cells. Terminal B does
//! the same with `g^{-1}(Y)`. No message is ever sent.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::normal;
use crate::rng;
use crate::source::{self, SourceParams};
use crate::stats::{self, Proportion};

/// Largest supported key size; an `f64` in (0, 1) carries 53 bits.
pub const MAX_KEY_BITS: u32 = 52;

/// Smallest and largest values `uniformize` returns.
const UNIT_FLOOR: f64 = f64::MIN_POSITIVE;
const UNIT_CEIL: f64 = 1.0 - f64::EPSILON / 2.0;

/// `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearMap {
    slope: f64,
    intercept: f64,
}

impl LinearMap {
    pub fn new(slope: f64, intercept: f64) -> Result<Self> {
        if slope == 0.0 || !slope.is_finite() || !intercept.is_finite() {
            return Err(invalid("slope", format!("need a finite non-zero slope, got {slope}")));
        }
        Ok(Self { slope, intercept })
    }

    /// The map `g` with `Y = g(X)` almost surely.
    pub fn from_source(params: &SourceParams) -> Result<Self> {
        if !params.is_perfectly_correlated() {
            return Err(not_perfect(params));
        }
        let slope = params.rho().signum() * params.sd_y() / params.sd_x();
        Self::new(slope, params.mu_y() - slope * params.mu_x())
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    pub fn invert(&self, y: f64) -> f64 {
        (y - self.intercept) / self.slope
    }
}

fn not_perfect(params: &SourceParams) -> Error {
    Error::Precondition(format!(
        "rho = {} is not +/-1; use the binning protocol for partially correlated sources",
        params.rho()
    ))
}

/// Key size `|K| = 2^key_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiscretizerConfig {
    key_bits: u32,
}

impl DiscretizerConfig {
    pub fn new(key_bits: u32) -> Result<Self> {
        if !(1..=MAX_KEY_BITS).contains(&key_bits) {
            return Err(invalid(
                "key_bits",
                format!("must lie in 1..={MAX_KEY_BITS}, got {key_bits}"),
            ));
        }
        Ok(Self { key_bits })
    }

    pub fn key_bits(&self) -> u32 {
        self.key_bits
    }

    pub fn key_count(&self) -> u64 {
        1u64 << self.key_bits
    }
}

/// `Phi((x - mu_x) / sd_x)`, clamped to the open unit interval.
///
/// Beyond roughly eight standard deviations the CDF saturates in `f64`; the
/// output is then pinned to the nearest representable value inside (0, 1).
pub fn uniformize(params: &SourceParams, x: f64) -> f64 {
    let z = (x - params.mu_x()) / params.sd_x();
    normal::cdf(z).clamp(UNIT_FLOOR, UNIT_CEIL)
}

/// `floor(u * 2^key_bits) + 1`, a key in `1..=2^key_bits`.
pub fn discretize(cfg: &DiscretizerConfig, u: f64) -> u64 {
    let cells = cfg.key_count();
    // Scaling by a power of two is exact, so u < 1 maps below `cells`.
    let k = (u * cells as f64).floor() as u64 + 1;
    k.clamp(1, cells)
}

/// Terminal A's key from its observation.
pub fn key_from_x(params: &SourceParams, cfg: &DiscretizerConfig, x: f64) -> u64 {
    discretize(cfg, uniformize(params, x))
}

/// Terminal B's key from its observation.
pub fn key_from_y(params: &SourceParams, map: &LinearMap, cfg: &DiscretizerConfig, y: f64) -> u64 {
    key_from_x(params, cfg, map.invert(y))
}

/// Agreement and key statistics of the perfect-correlation scheme.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerfectReport {
    pub schema_version: &'static str,
    pub rho: f64,
    pub key_bits: u32,
    pub trials: u64,
    pub seed: u64,
    pub agreement: Proportion,
    pub plugin_entropy_bits: f64,
    pub chi_square: f64,
    pub chi_square_critical: f64,
    pub ks_statistic: f64,
    pub ks_critical: f64,
    /// Messages sent over the channel; the scheme has no channel.
    pub channel_uses: u64,
}

/// Significance level of the uniformity checks in [`PerfectReport`].
pub const UNIFORMITY_ALPHA: f64 = 0.01;

/// Runs `trials` single-symbol key agreements.
pub fn run_perfect_scheme(params: &SourceParams, cfg: &DiscretizerConfig, trials: u64, seed: u64) -> Result<PerfectReport> {
    let map = LinearMap::from_source(params)?;
    if trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    let draws: Vec<(u64, u64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::trial_rng(seed, t);
            let pair = source::sample_pairs_with(params, 1, &mut rng);
            let (x, y) = (pair.x_seq[0], pair.y_seq[0]);
            let u = uniformize(params, x);
            (discretize(cfg, u), key_from_y(params, &map, cfg, y), u)
        })
        .collect();

    let agreed = draws.iter().filter(|(k, l, _)| k == l).count() as u64;
    let (counts, uniforms) = if cfg.key_count() <= 1 << 24 {
        let mut counts = vec![0u64; cfg.key_count() as usize];
        for (k, _, _) in &draws {
            counts[(*k - 1) as usize] += 1;
        }
        (counts, draws.iter().map(|d| d.2).collect::<Vec<_>>())
    } else {
        let freq = stats::frequencies(draws.iter().map(|d| d.0));
        (freq.into_values().collect(), draws.iter().map(|d| d.2).collect())
    };
    let plugin = stats::plugin_entropy(counts.iter().copied());
    let (chi_square, chi_square_critical) = if cfg.key_count() <= 1 << 24 {
        (
            stats::chi_square_uniform(&counts),
            stats::chi_square_critical(counts.len() - 1, UNIFORMITY_ALPHA),
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(PerfectReport {
        schema_version: crate::protocol::SCHEMA_VERSION,
        rho: params.rho(),
        key_bits: cfg.key_bits,
        trials,
        seed,
        agreement: Proportion::new(agreed, trials),
        plugin_entropy_bits: plugin,
        chi_square,
        chi_square_critical,
        ks_statistic: stats::ks_uniform_statistic(&uniforms),
        ks_critical: stats::ks_critical_value(UNIFORMITY_ALPHA, uniforms.len()),
        channel_uses: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniformize_reference_points() {
        let p = SourceParams::new(2.0, 0.0, 9.0, 1.0, 1.0).unwrap();
        assert_eq!(uniformize(&p, 2.0), 0.5);
        assert!((uniformize(&p, 2.0 + 3.0 * 1.6448536269514722) - 0.95).abs() < 1e-7);
        let hi = uniformize(&p, 1e6);
        let lo = uniformize(&p, -1e6);
        assert!(hi < 1.0 && lo > 0.0);
    }

    #[test]
    fn discretize_cells() {
        let two = DiscretizerConfig::new(2).unwrap();
        assert_eq!(discretize(&two, 0.6), 3);
        assert_eq!(discretize(&two, 0.0), 1);
        assert_eq!(discretize(&two, 0.25), 2);
        let one = DiscretizerConfig::new(1).unwrap();
        assert_eq!(discretize(&one, 0.49), 1);
        assert_eq!(discretize(&one, UNIT_CEIL), 2);
        assert_eq!(discretize(&DiscretizerConfig::new(20).unwrap(), UNIT_CEIL), 1 << 20);
        assert!(DiscretizerConfig::new(0).is_err());
        assert!(DiscretizerConfig::new(53).is_err());
    }

    #[test]
    fn linear_map_signs() {
        let p = SourceParams::new(1.0, 3.0, 4.0, 9.0, -1.0).unwrap();
        let g = LinearMap::from_source(&p).unwrap();
        assert_eq!(g.slope(), -1.5);
        assert_eq!(g.intercept(), 4.5);
        assert!((g.invert(g.apply(0.7)) - 0.7).abs() < 1e-15);
        assert!(LinearMap::from_source(&SourceParams::standard(0.99).unwrap()).is_err());
        assert!(LinearMap::new(0.0, 1.0).is_err());
    }

    #[test]
    fn single_trial_wide_key_agrees() {
        let p = SourceParams::new(0.5, -1.0, 2.0, 0.3, -1.0).unwrap();
        let r = run_perfect_scheme(&p, &DiscretizerConfig::new(20).unwrap(), 1, 4).unwrap();
        assert_eq!(r.agreement.estimate, 1.0);
        assert_eq!(r.channel_uses, 0);
    }

    #[test]
    fn partial_correlation_is_rejected() {
        let p = SourceParams::standard(0.5).unwrap();
        assert!(matches!(
            run_perfect_scheme(&p, &DiscretizerConfig::new(4).unwrap(), 10, 0),
            Err(Error::Precondition(_))
        ));
    }
}
