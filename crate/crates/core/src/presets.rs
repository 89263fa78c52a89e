//! Desk-scale protocol configurations.
//!
//! The default codebook sizes grow as `2^{n(I(U;X) + 2δ)}`, which is out of
//! reach for most block lengths a workstation can simulate. These presets fix
//! the bin and column rates explicitly so that runs at different block lengths
//! stay comparable and within the default scalar budget.

use crate::capacity::{aux_mutual_informations, TestChannel};
use crate::error::{invalid, Result};
use crate::protocol::{ProtocolConfig, Sizing};
use crate::source::SourceParams;

pub const BELOW_CAPACITY_SMALL: &str = "below-capacity-small";
pub const BELOW_CAPACITY_LARGE: &str = "below-capacity-large";
pub const OVERSIZED_N2_BASELINE: &str = "oversized-n2-baseline";
pub const OVERSIZED_N2: &str = "oversized-n2";

pub const NAMES: [&str; 4] = [
    BELOW_CAPACITY_SMALL,
    BELOW_CAPACITY_LARGE,
    OVERSIZED_N2_BASELINE,
    OVERSIZED_N2,
];

const PRESET_TRIALS: u64 = 2_000;
const PRESET_SEED: u64 = 20_240_601;

/// Standard source and test channel with `I(U;X) = 0.6` and `I(U;Y) = 0.35`.
///
/// `noise_var = 1 / (2^{1.2} - 1)` fixes `I(U;X)`; the correlation then
/// solves `-1/2 log2(1 - rho^2 var_x / (var_x + noise_var)) = 0.35`.
pub fn below_capacity_law() -> (SourceParams, TestChannel) {
    let noise_var = 1.0 / (1.2f64.exp2() - 1.0);
    let share = 1.0 - (-1.2f64).exp2();
    let rho = ((1.0 - (-0.7f64).exp2()) / share).sqrt();
    (
        SourceParams::standard(rho).expect("rho below one"),
        TestChannel::new(noise_var).expect("positive noise"),
    )
}

/// Below-capacity configuration at block length `n`: `δ = 0.25`, bins at
/// rate 0.6 (about `I(U;X)`), a single column per bin, noiseless index channel.
pub fn below_capacity(n: usize) -> ProtocolConfig {
    let (source, ch) = below_capacity_law();
    let mut cfg = ProtocolConfig::new(source, ch, n, 0.25, PRESET_TRIALS, PRESET_SEED);
    cfg.sizing = Sizing::Rates {
        bin_rate: 0.6,
        column_rate: 0.0,
    };
    cfg
}

/// Source and test channel of the column-collision comparison:
/// `rho = 0.95`, `noise_var = 1.6`.
pub fn collision_law() -> (SourceParams, TestChannel) {
    (
        SourceParams::standard(0.95).expect("rho below one"),
        TestChannel::new(1.6).expect("positive noise"),
    )
}

/// Column-collision comparison at `n = 24`, `δ = 0.1`, with `2^{n/4}` bins.
/// The baseline uses `N2 = 2^{n(I(U;Y) - 2δ)}`; the oversized variant
/// `N2 = 2^{n(I(U;Y) + 2δ)}`.
pub fn collision(oversized: bool) -> ProtocolConfig {
    let (source, ch) = collision_law();
    let delta = 0.1;
    let (_, i_uy) = aux_mutual_informations(&source, &ch).expect("finite correlation");
    let column_rate = if oversized {
        i_uy + 2.0 * delta
    } else {
        i_uy - 2.0 * delta
    };
    let mut cfg = ProtocolConfig::new(source, ch, 24, delta, PRESET_TRIALS, PRESET_SEED);
    cfg.sizing = Sizing::Rates {
        bin_rate: 0.25,
        column_rate,
    };
    cfg
}

/// Looks a preset up by name.
pub fn by_name(name: &str) -> Result<ProtocolConfig> {
    match name {
        BELOW_CAPACITY_SMALL => Ok(below_capacity(16)),
        BELOW_CAPACITY_LARGE => Ok(below_capacity(32)),
        OVERSIZED_N2_BASELINE => Ok(collision(false)),
        OVERSIZED_N2 => Ok(collision(true)),
        other => Err(invalid(
            "preset",
            format!("unknown preset `{other}`; expected one of {}", NAMES.join(", ")),
        )),
    }
}
