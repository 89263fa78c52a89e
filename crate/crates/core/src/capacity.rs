//! Common-randomness capacity within the Gaussian auxiliary family.
//!
//! The auxiliary variable is restricted to `U = X + N` with `N` Gaussian and
//! independent of `(X, Y)`, so `U - X - Y` holds by construction. Within this
//! family `I(U;X) - I(U;Y)` is continuous and strictly decreasing in the
//! noise variance, and the constrained maximum of `I(U;X)` sits where the
//! constraint is active. The result is the capacity expression evaluated over
//! this family only, which is a lower bound on the unrestricted maximum.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::information::Information;
use crate::source::SourceParams;

/// Absolute tolerance on the constraint gap at the returned optimizer, in bits.
pub const GAP_TOLERANCE: f64 = 1e-9;
/// Hard cap on bisection iterations.
pub const MAX_ITERATIONS: usize = 200;
/// Initial bracket on `noise_var / var_x`.
pub const INITIAL_BRACKET: (f64, f64) = (1e-12, 1e12);
const BRACKET_LIMIT: (f64, f64) = (1e-300, 1e300);

/// Gaussian test channel `U = X + N`, `N ~ N(0, noise_var)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestChannel {
    noise_var: f64,
}

impl TestChannel {
    pub fn new(noise_var: f64) -> Result<Self> {
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return Err(invalid(
                "noise_var",
                format!("must be positive and finite, got {noise_var}"),
            ));
        }
        Ok(Self { noise_var })
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    /// Variance of `U`.
    pub fn aux_var(&self, params: &SourceParams) -> f64 {
        params.var_x() + self.noise_var
    }

    /// Law of the pair `(X, U)`.
    pub fn xu_law(&self, params: &SourceParams) -> Result<SourceParams> {
        let var_u = self.aux_var(params);
        SourceParams::new(
            params.mu_x(),
            params.mu_x(),
            params.var_x(),
            var_u,
            (params.var_x() / var_u).sqrt(),
        )
    }

    /// Law of the pair `(Y, U)`.
    pub fn yu_law(&self, params: &SourceParams) -> Result<SourceParams> {
        let var_u = self.aux_var(params);
        SourceParams::new(
            params.mu_y(),
            params.mu_x(),
            params.var_y(),
            var_u,
            params.rho() * (params.var_x() / var_u).sqrt(),
        )
    }
}

/// Closed-form `(I(U;X), I(U;Y))` in bits.
pub fn aux_mutual_informations(params: &SourceParams, ch: &TestChannel) -> Result<(f64, f64)> {
    if params.is_perfectly_correlated() {
        return Err(Error::DegenerateDensity);
    }
    let snr = params.var_x() / ch.noise_var;
    let i_ux = 0.5 * snr.ln_1p() / LN_2;
    let share = params.var_x() / (params.var_x() + ch.noise_var);
    let rho_uy_sq = params.rho() * params.rho() * share;
    let i_uy = -0.5 * (-rho_uy_sq).ln_1p() / LN_2;
    Ok((i_ux, i_uy.min(i_ux)))
}

/// `I(U;X) - I(U;Y)`.
pub fn constraint_gap(params: &SourceParams, ch: &TestChannel) -> Result<f64> {
    let (i_ux, i_uy) = aux_mutual_informations(params, ch)?;
    Ok(i_ux - i_uy)
}

/// Capacity value with its optimizing test channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityResult {
    pub value: Information,
    /// `None` for the infinite case and for `C(W) = 0`, where the supremum
    /// is only approached as `noise_var -> inf`.
    pub optimizer: Option<TestChannel>,
    /// Achieved gap minus `C(W)`.
    pub constraint_slack: f64,
    pub iterations: usize,
}

fn gap_at(params: &SourceParams, log_ratio: f64) -> f64 {
    let ch = TestChannel {
        noise_var: params.var_x() * log_ratio.exp(),
    };
    constraint_gap(params, &ch).expect("finite correlation checked by caller")
}

/// Maximum of `I(U;X)` subject to `I(U;X) - I(U;Y) <= channel_capacity`
/// over Gaussian test channels, by bisection on `log(noise_var)`.
pub fn cr_capacity(params: &SourceParams, channel_capacity: f64) -> Result<CapacityResult> {
    if !(channel_capacity >= 0.0 && channel_capacity.is_finite()) {
        return Err(invalid(
            "channel_capacity",
            format!("must be finite and non-negative, got {channel_capacity}"),
        ));
    }
    if params.is_perfectly_correlated() {
        return Ok(CapacityResult {
            value: Information::Infinite,
            optimizer: None,
            constraint_slack: 0.0,
            iterations: 0,
        });
    }
    if channel_capacity == 0.0 {
        return Ok(CapacityResult {
            value: Information::Finite(0.0),
            optimizer: None,
            constraint_slack: 0.0,
            iterations: 0,
        });
    }

    // Gap is decreasing in noise_var: lo has gap above the target, hi below.
    let mut lo = INITIAL_BRACKET.0.ln();
    let mut hi = INITIAL_BRACKET.1.ln();
    while gap_at(params, lo) < channel_capacity {
        lo *= 2.0;
        if lo < BRACKET_LIMIT.0.ln() {
            return Err(Error::Numerical {
                what: "capacity bracket (small noise)",
                achieved: channel_capacity - gap_at(params, lo),
            });
        }
    }
    while gap_at(params, hi) > channel_capacity {
        hi *= 2.0;
        if hi > BRACKET_LIMIT.1.ln() {
            return Err(Error::Numerical {
                what: "capacity bracket (large noise)",
                achieved: gap_at(params, hi) - channel_capacity,
            });
        }
    }

    let mut iterations = 0;
    let mut mid = 0.5 * (lo + hi);
    let mut gap = gap_at(params, mid);
    while (gap - channel_capacity).abs() > GAP_TOLERANCE {
        if iterations == MAX_ITERATIONS || hi - lo < f64::EPSILON * hi.abs().max(1.0) {
            return Err(Error::Numerical {
                what: "capacity bisection",
                achieved: (gap - channel_capacity).abs(),
            });
        }
        if gap > channel_capacity {
            lo = mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
        gap = gap_at(params, mid);
        iterations += 1;
    }

    let ch = TestChannel::new(params.var_x() * mid.exp())?;
    let (i_ux, _) = aux_mutual_informations(params, &ch)?;
    Ok(CapacityResult {
        value: Information::Finite(i_ux),
        optimizer: Some(ch),
        constraint_slack: gap - channel_capacity,
        iterations,
    })
}
