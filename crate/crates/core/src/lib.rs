//! Common randomness from a bivariate Gaussian source with one-way
//! communication over a rate-limited channel.
//!
//! - [`source`]: the source law, sampling, information density, and closed-form
//!   and quadrature mutual information.
//! - [`typicality`]: the information-density typicality test and Monte Carlo
//!   checks of its concentration and independent-pairing bounds.
//! - [`capacity`]: the capacity expression over Gaussian test channels.
//! - [`codebook`] and [`protocol`]: the random binning scheme, simulated end to end.
//! - [`perfect`]: the zero-communication scheme for `|rho| = 1`.
//!
//! All information quantities are in bits.

pub mod capacity;
pub mod codebook;
pub mod error;
pub mod information;
pub mod normal;
pub mod perfect;
pub mod presets;
pub mod protocol;
pub mod quadrature;
pub mod rng;
pub mod source;
pub mod stats;
pub mod typicality;

pub use capacity::{cr_capacity, CapacityResult, TestChannel};
pub use codebook::{build_codebook, Codebook, CodebookParams, Codeword};
pub use error::{Error, Result};
pub use information::Information;
pub use perfect::{run_perfect_scheme, DiscretizerConfig, LinearMap, PerfectReport};
pub use protocol::{run_trials, IndexChannel, ProtocolConfig, Sizing, TrialOutcome, TrialReport};
pub use source::{mutual_information, SamplePair, SourceParams};
pub use stats::Proportion;
pub use typicality::{is_jointly_typical, TypicalityConfig};
