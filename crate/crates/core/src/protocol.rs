//! End-to-end binning protocol for `|rho| < 1`.
//!
//! Terminal A finds the lexicographically first codeword jointly typical with
//! its observation and sends the bin index over an [`IndexChannel`]. Terminal
//! B searches the received bin for the unique codeword jointly typical with
//! its own observation. Failures map onto the sentinel `u0` so both keys live
//! on the same alphabet.
//!
//! The channel is abstracted as a message pipe with a residual error
//! probability, standing in for a capacity-achieving code over `W`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{aux_mutual_informations, TestChannel};
use crate::codebook::{self, build_codebook, message_count, Codebook, CodebookParams, Codeword, MessageCount};
use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::source::{self, DensityRatio, SourceParams};
use crate::stats::{self, Proportion};
use crate::typicality::{is_jointly_typical, TypicalityConfig};

/// Report schema version.
pub const SCHEMA_VERSION: &str = "1";

/// Minimum stream length for key-entropy estimates.
pub const MIN_ENTROPY_SAMPLES: usize = 1_000;

/// Message pipe delivering the sent index with probability `1 - error_prob`
/// and a uniformly random different index otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexChannel {
    error_prob: f64,
    message_count: u64,
}

impl IndexChannel {
    pub fn new(error_prob: f64, message_count: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&error_prob) {
            return Err(invalid("error_prob", format!("must lie in [0, 1], got {error_prob}")));
        }
        if message_count == 0 {
            return Err(invalid("message_count", "need at least one message"));
        }
        Ok(Self {
            error_prob,
            message_count,
        })
    }

    pub fn error_prob(&self) -> f64 {
        self.error_prob
    }

    pub fn message_count(&self) -> u64 {
        self.message_count
    }
}

/// Sends message `bin` (1-based) through the channel.
///
/// Always consumes one uniform draw for the error decision and one more
/// when an error occurs. A single-message channel cannot corrupt.
pub fn transmit<R: Rng + ?Sized>(channel: &IndexChannel, bin: u64, rng: &mut R) -> u64 {
    debug_assert!((1..=channel.message_count).contains(&bin));
    let flip = rng.random::<f64>() < channel.error_prob;
    if !flip || channel.message_count < 2 {
        return bin;
    }
    // Uniform over the other message_count - 1 indices.
    let other = rng.random_range(1..channel.message_count);
    if other >= bin {
        other + 1
    } else {
        other
    }
}

/// Typicality tests for the pairs `(X, U)` and `(Y, U)`.
#[derive(Debug, Clone, Copy)]
pub struct AuxTests {
    xu: DensityRatio,
    yu: DensityRatio,
    xu_cfg: TypicalityConfig,
    yu_cfg: TypicalityConfig,
}

impl AuxTests {
    pub fn new(source: &SourceParams, ch: &TestChannel, delta: f64) -> Result<Self> {
        let (i_ux, i_uy) = aux_mutual_informations(source, ch)?;
        Ok(Self {
            xu: DensityRatio::new(&ch.xu_law(source)?)?,
            yu: DensityRatio::new(&ch.yu_law(source)?)?,
            xu_cfg: TypicalityConfig::new(delta, i_ux)?,
            yu_cfg: TypicalityConfig::new(delta, i_uy)?,
        })
    }

    #[inline]
    pub fn xu_typical(&self, x_seq: &[f64], u: &[f64]) -> bool {
        is_jointly_typical(&self.xu_cfg, self.xu.sum_bits(x_seq, u), x_seq.len())
    }

    #[inline]
    pub fn yu_typical(&self, y_seq: &[f64], u: &[f64]) -> bool {
        is_jointly_typical(&self.yu_cfg, self.yu.sum_bits(y_seq, u), y_seq.len())
    }
}

fn check_len(codebook: &Codebook, seq: &[f64], name: &'static str) -> Result<()> {
    if seq.len() != codebook.n() {
        return Err(invalid(
            name,
            format!("length {} differs from block length {}", seq.len(), codebook.n()),
        ));
    }
    Ok(())
}

/// Encoder scan with precomputed tests.
pub fn encode_with(codebook: &Codebook, tests: &AuxTests, x_seq: &[f64]) -> (u64, Codeword) {
    let n = codebook.n();
    for bin in 1..=codebook.n1() {
        for (j, u) in codebook.bin(bin).chunks_exact(n).enumerate() {
            if tests.xu_typical(x_seq, u) {
                return (
                    bin,
                    Codeword::Entry {
                        bin,
                        column: j as u64 + 1,
                    },
                );
            }
        }
    }
    (codebook.failure_message(), Codeword::Sentinel)
}

/// Returns the bin message and key of the lexicographically first codeword
/// jointly δ-typical with `x_seq` under `p_XU`; `(N1 + 1, u0)` when none is.
pub fn encode(
    codebook: &Codebook,
    x_seq: &[f64],
    source: &SourceParams,
    ch: &TestChannel,
    delta: f64,
) -> Result<(u64, Codeword)> {
    check_len(codebook, x_seq, "x_seq")?;
    let tests = AuxTests::new(source, ch, delta)?;
    Ok(encode_with(codebook, &tests, x_seq))
}

/// Decoder scan with precomputed tests.
pub fn decode_with(codebook: &Codebook, tests: &AuxTests, y_seq: &[f64], received_bin: u64) -> Codeword {
    if received_bin > codebook.n1() {
        return Codeword::Sentinel;
    }
    let n = codebook.n();
    let mut found = None;
    for (j, u) in codebook.bin(received_bin).chunks_exact(n).enumerate() {
        if tests.yu_typical(y_seq, u) {
            if found.is_some() {
                return Codeword::Sentinel;
            }
            found = Some(j as u64 + 1);
        }
    }
    match found {
        Some(column) => Codeword::Entry {
            bin: received_bin,
            column,
        },
        None => Codeword::Sentinel,
    }
}

/// Returns the unique column of bin `received_bin` jointly δ-typical with
/// `y_seq` under `p_YU`, or `u0` when there is none or several.
pub fn decode(
    codebook: &Codebook,
    y_seq: &[f64],
    received_bin: u64,
    source: &SourceParams,
    ch: &TestChannel,
    delta: f64,
) -> Result<Codeword> {
    check_len(codebook, y_seq, "y_seq")?;
    if received_bin == 0 || received_bin > codebook.failure_message() {
        return Err(invalid(
            "received_bin",
            format!("must lie in 1..={}, got {received_bin}", codebook.failure_message()),
        ));
    }
    let tests = AuxTests::new(source, ch, delta)?;
    Ok(decode_with(codebook, &tests, y_seq, received_bin))
}

/// Error-event flags of one trial.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EventFlags {
    /// Source pair not jointly typical.
    pub e1: bool,
    /// Encoder found no codeword.
    pub e2: bool,
    /// A wrong column of the received bin is typical with `y^n`.
    pub e3: bool,
    /// The encoder's column in the received bin is not typical with `y^n`.
    pub e4: bool,
    /// The channel delivered a different bin.
    pub channel_error: bool,
}

impl EventFlags {
    pub fn any(&self) -> bool {
        self.e1 || self.e2 || self.e3 || self.e4 || self.channel_error
    }
}

/// One protocol run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialOutcome {
    pub k_index: Codeword,
    pub l_index: Codeword,
    pub sent_bin: u64,
    pub received_bin: u64,
    pub events: EventFlags,
    pub agreed: bool,
}

/// How the codebook is sized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sizing {
    /// `N1 = 2^{n(I(U;X) - I(U;Y) + 4δ)}`, `N2 = 2^{n(I(U;Y) - 2δ)}`.
    Default,
    /// `N1 = 2^{n * bin_rate}`, `N2 = 2^{n * column_rate}`.
    Rates { bin_rate: f64, column_rate: f64 },
    /// Fixed sizes.
    Explicit { n1: u64, n2: u64 },
}

/// Full description of a Monte Carlo campaign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolConfig {
    pub source: SourceParams,
    pub test_channel: TestChannel,
    pub n: usize,
    pub delta: f64,
    pub error_prob: f64,
    pub sizing: Sizing,
    pub trials: u64,
    pub master_seed: u64,
    pub budget: u64,
    /// `C(W)` for the reported rate check, when known.
    pub channel_capacity: Option<f64>,
    /// Margin `δ'` of the rate check.
    pub rate_margin: f64,
}

impl ProtocolConfig {
    pub fn new(source: SourceParams, test_channel: TestChannel, n: usize, delta: f64, trials: u64, master_seed: u64) -> Self {
        Self {
            source,
            test_channel,
            n,
            delta,
            error_prob: 0.0,
            sizing: Sizing::Default,
            trials,
            master_seed,
            budget: codebook::DEFAULT_BUDGET,
            channel_capacity: None,
            rate_margin: 0.0,
        }
    }

    pub fn codebook_params(&self) -> Result<CodebookParams> {
        let (i_ux, i_uy) = aux_mutual_informations(&self.source, &self.test_channel)?;
        match self.sizing {
            Sizing::Default => CodebookParams::new(self.n, self.delta, i_ux, i_uy),
            Sizing::Rates { bin_rate, column_rate } => {
                CodebookParams::with_rates(self.n, self.delta, i_ux, i_uy, bin_rate, column_rate)
            }
            Sizing::Explicit { n1, n2 } => CodebookParams::with_sizes(self.n, self.delta, i_ux, i_uy, n1, n2),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.source.is_perfectly_correlated() {
            return Err(Error::Precondition(
                "perfectly correlated sources need no communication; use the perfect-correlation scheme".into(),
            ));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "need at least one trial"));
        }
        Ok(())
    }
}

/// Codebook sizes and per-trial outcomes of a campaign.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub codebook: CodebookParams,
    pub outcomes: Vec<TrialOutcome>,
}

/// Runs every trial of `cfg` and returns the raw outcomes.
pub fn simulate(cfg: &ProtocolConfig) -> Result<Simulation> {
    cfg.validate()?;
    let params = cfg.codebook_params()?;
    let book = build_codebook(&params, &cfg.source, &cfg.test_channel, cfg.master_seed, cfg.budget)?;
    let tests = AuxTests::new(&cfg.source, &cfg.test_channel, cfg.delta)?;
    let xy = DensityRatio::new(&cfg.source)?;
    let xy_cfg = TypicalityConfig::for_source(&cfg.source, cfg.delta)?;
    let channel = IndexChannel::new(cfg.error_prob, message_count(&params).messages)?;

    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            // Same stream layout as the typicality estimator: the source pair
            // comes first, then the channel draws.
            let mut rng = rng::trial_rng(cfg.master_seed, t);
            let pair = source::sample_pairs_with(&cfg.source, cfg.n, &mut rng);
            let e1 = !is_jointly_typical(&xy_cfg, xy.sum_bits(&pair.x_seq, &pair.y_seq), cfg.n);
            let (sent_bin, k_index) = encode_with(&book, &tests, &pair.x_seq);
            let received_bin = transmit(&channel, sent_bin, &mut rng);
            let l_index = decode_with(&book, &tests, &pair.y_seq, received_bin);
            let events = classify(&book, &tests, &pair.y_seq, e1, k_index, sent_bin, received_bin);
            TrialOutcome {
                k_index,
                l_index,
                sent_bin,
                received_bin,
                events,
                agreed: k_index == l_index,
            }
        })
        .collect();

    Ok(Simulation {
        codebook: params,
        outcomes,
    })
}

fn classify(
    book: &Codebook,
    tests: &AuxTests,
    y_seq: &[f64],
    e1: bool,
    k_index: Codeword,
    sent_bin: u64,
    received_bin: u64,
) -> EventFlags {
    let mut flags = EventFlags {
        channel_error: sent_bin != received_bin,
        ..EventFlags::default()
    };
    if e1 {
        flags.e1 = true;
        return flags;
    }
    let Codeword::Entry { column, .. } = k_index else {
        flags.e2 = true;
        return flags;
    };
    if received_bin > book.n1() {
        flags.e4 = true;
        return flags;
    }
    let mut own_typical = false;
    for (j, u) in book.bin(received_bin).chunks_exact(book.n()).enumerate() {
        if tests.yu_typical(y_seq, u) {
            if j as u64 + 1 == column {
                own_typical = true;
            } else {
                flags.e3 = true;
            }
        }
    }
    flags.e4 = !own_typical;
    flags
}

/// Entropy summary of a key stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyEntropy {
    pub samples: u64,
    pub distinct: usize,
    pub plugin_bits: f64,
    pub miller_madow_bits: f64,
    /// Miller–Madow correction added to the plug-in value.
    pub bias_bits: f64,
    /// `miller_madow_bits / n`.
    pub rate: f64,
    /// Empirical mass of the sentinel `u0`.
    pub sentinel_mass: f64,
    /// Largest empirical frequency of a single (non-sentinel) codeword.
    pub max_codeword_frequency: f64,
    /// `2^{-n(I(U;X) - δ)}`.
    pub max_probability_ceiling: f64,
    /// Whether the largest frequency stays under the ceiling within three
    /// binomial standard errors.
    pub ceiling_ok: bool,
}

/// Plug-in entropy of the key stream with Miller–Madow correction.
pub fn estimate_key_entropy(keys: &[Codeword], n: usize, i_ux: f64, delta: f64) -> Result<KeyEntropy> {
    if keys.len() < MIN_ENTROPY_SAMPLES {
        return Err(invalid(
            "keys",
            format!("need at least {MIN_ENTROPY_SAMPLES} samples, got {}", keys.len()),
        ));
    }
    if n == 0 {
        return Err(invalid("n", "block length must be at least 1"));
    }
    let freq = stats::frequencies(keys.iter().copied());
    let samples = keys.len() as u64;
    let total = samples as f64;
    let plugin_bits = stats::plugin_entropy(freq.values().copied());
    let bias_bits = stats::miller_madow_correction(freq.len(), samples);
    let sentinel = freq.get(&Codeword::Sentinel).copied().unwrap_or(0);
    let max_count = freq
        .iter()
        .filter(|(k, _)| !k.is_sentinel())
        .map(|(_, &c)| c)
        .max()
        .unwrap_or(0);
    let ceiling = (-(n as f64) * (i_ux - delta)).exp2().min(1.0);
    let max_codeword_frequency = max_count as f64 / total;
    let ceiling_ok = max_codeword_frequency <= ceiling + 3.0 * (ceiling * (1.0 - ceiling) / total).sqrt();
    let miller_madow_bits = plugin_bits + bias_bits;
    Ok(KeyEntropy {
        samples,
        distinct: freq.len(),
        plugin_bits,
        miller_madow_bits,
        bias_bits,
        rate: miller_madow_bits / n as f64,
        sentinel_mass: sentinel as f64 / total,
        max_codeword_frequency,
        max_probability_ceiling: ceiling,
        ceiling_ok,
    })
}

/// Rates of the classified events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventRates {
    pub e1: Proportion,
    pub e2: Proportion,
    pub e3: Proportion,
    pub e4: Proportion,
    pub channel_error: Proportion,
}

impl EventRates {
    pub fn sum(&self) -> f64 {
        self.e1.estimate + self.e2.estimate + self.e3.estimate + self.e4.estimate + self.channel_error.estimate
    }
}

/// Echo of the configuration inside a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub rho: f64,
    pub mu_x: f64,
    pub mu_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub noise_var: f64,
    pub n: usize,
    pub delta: f64,
    pub error_prob: f64,
    pub sizing: Sizing,
    pub trials: u64,
    pub master_seed: u64,
    pub n1: u64,
    pub n2: u64,
}

/// Summary of a Monte Carlo campaign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub schema_version: &'static str,
    pub config: ConfigEcho,
    pub i_xy: f64,
    pub i_ux: f64,
    pub i_uy: f64,
    pub messages: MessageCount,
    /// `log2(N1 + 1) / n <= C(W) - δ'`, when `C(W)` was supplied.
    pub rate_feasible: Option<bool>,
    pub agreement: Proportion,
    pub disagreement: Proportion,
    pub events: EventRates,
    /// Sum of all event rates, an upper bound on the disagreement rate.
    pub union_bound: f64,
    /// Disagreeing trials with no event flagged (zero when the classifier is complete).
    pub unexplained_disagreements: u64,
    pub union_bound_holds: bool,
    /// `1 - Pr{E1}`.
    pub typicality_probability: f64,
    pub key_entropy: Option<KeyEntropy>,
}

impl TrialReport {
    pub fn summarize(cfg: &ProtocolConfig, sim: &Simulation) -> Result<Self> {
        let trials = sim.outcomes.len() as u64;
        let count = |f: &dyn Fn(&TrialOutcome) -> bool| sim.outcomes.iter().filter(|o| f(o)).count() as u64;
        let agreed = count(&|o| o.agreed);
        let events = EventRates {
            e1: Proportion::new(count(&|o| o.events.e1), trials),
            e2: Proportion::new(count(&|o| o.events.e2), trials),
            e3: Proportion::new(count(&|o| o.events.e3), trials),
            e4: Proportion::new(count(&|o| o.events.e4), trials),
            channel_error: Proportion::new(count(&|o| o.events.channel_error), trials),
        };
        let unexplained = count(&|o| !o.agreed && !o.events.any());
        let disagreement = Proportion::new(trials - agreed, trials);
        let union_bound = events.sum();
        let (i_ux, i_uy) = aux_mutual_informations(&cfg.source, &cfg.test_channel)?;
        let messages = message_count(&sim.codebook);
        let keys: Vec<Codeword> = sim.outcomes.iter().map(|o| o.k_index).collect();
        let key_entropy = if keys.len() >= MIN_ENTROPY_SAMPLES {
            Some(estimate_key_entropy(&keys, cfg.n, i_ux, cfg.delta)?)
        } else {
            None
        };
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            config: ConfigEcho {
                rho: cfg.source.rho(),
                mu_x: cfg.source.mu_x(),
                mu_y: cfg.source.mu_y(),
                var_x: cfg.source.var_x(),
                var_y: cfg.source.var_y(),
                noise_var: cfg.test_channel.noise_var(),
                n: cfg.n,
                delta: cfg.delta,
                error_prob: cfg.error_prob,
                sizing: cfg.sizing,
                trials,
                master_seed: cfg.master_seed,
                n1: sim.codebook.n1(),
                n2: sim.codebook.n2(),
            },
            i_xy: source::mutual_information(&cfg.source).to_f64(),
            i_ux,
            i_uy,
            messages,
            rate_feasible: cfg.channel_capacity.map(|c| messages.fits(c, cfg.rate_margin)),
            agreement: Proportion::new(agreed, trials),
            disagreement,
            events,
            union_bound,
            unexplained_disagreements: unexplained,
            union_bound_holds: unexplained == 0 && disagreement.estimate <= union_bound,
            typicality_probability: 1.0 - events.e1.estimate,
            key_entropy,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Column names of the one-row CSV form.
    pub fn csv_header() -> &'static [&'static str] {
        &[
            "rho", "noise_var", "n", "delta", "error_prob", "trials", "seed", "n1", "n2", "i_xy", "i_ux", "i_uy",
            "message_rate", "agreement", "agreement_se", "e1", "e2", "e3", "e4", "channel_error", "e3_se",
            "union_bound", "key_entropy_bits", "key_entropy_bias", "key_rate", "sentinel_mass",
        ]
    }

    /// The one-row CSV form, aligned with [`TrialReport::csv_header`].
    pub fn csv_record(&self) -> Vec<String> {
        let c = &self.config;
        let (h, bias, rate, u0) = match &self.key_entropy {
            Some(k) => (
                k.miller_madow_bits.to_string(),
                k.bias_bits.to_string(),
                k.rate.to_string(),
                k.sentinel_mass.to_string(),
            ),
            None => (String::new(), String::new(), String::new(), String::new()),
        };
        vec![
            c.rho.to_string(),
            c.noise_var.to_string(),
            c.n.to_string(),
            c.delta.to_string(),
            c.error_prob.to_string(),
            c.trials.to_string(),
            c.master_seed.to_string(),
            c.n1.to_string(),
            c.n2.to_string(),
            self.i_xy.to_string(),
            self.i_ux.to_string(),
            self.i_uy.to_string(),
            self.messages.rate.to_string(),
            self.agreement.estimate.to_string(),
            self.agreement.std_error.to_string(),
            self.events.e1.estimate.to_string(),
            self.events.e2.estimate.to_string(),
            self.events.e3.estimate.to_string(),
            self.events.e4.estimate.to_string(),
            self.events.channel_error.estimate.to_string(),
            self.events.e3.std_error.to_string(),
            self.union_bound.to_string(),
            h,
            bias,
            rate,
            u0,
        ]
    }
}

/// Builds the codebook, runs every trial and summarizes the outcomes.
pub fn run_trials(cfg: &ProtocolConfig) -> Result<TrialReport> {
    let sim = simulate(cfg)?;
    TrialReport::summarize(cfg, &sim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::DEFAULT_BUDGET;

    fn source() -> SourceParams {
        SourceParams::standard(0.8).unwrap()
    }

    fn channel() -> TestChannel {
        TestChannel::new(0.5).unwrap()
    }

    fn fixture(n: usize, n1: u64, n2: u64, delta: f64) -> Codebook {
        let (i_ux, i_uy) = aux_mutual_informations(&source(), &channel()).unwrap();
        let p = CodebookParams::with_sizes(n, delta, i_ux, i_uy, n1, n2).unwrap();
        build_codebook(&p, &source(), &channel(), 1, DEFAULT_BUDGET).unwrap()
    }

    /// With x (or y) at its mean, a codeword at the mean of U has per-symbol
    /// density exactly equal to the target mutual information.
    fn planted_for(seq: &[f64]) -> Vec<f64> {
        vec![0.0; seq.len()]
    }

    #[test]
    fn transmit_identity_and_flip() {
        let mut rng = rng::seeded(0);
        let clean = IndexChannel::new(0.0, 10).unwrap();
        assert!((1..=10).all(|b| transmit(&clean, b, &mut rng) == b));
        let flip = IndexChannel::new(1.0, 2).unwrap();
        for _ in 0..100 {
            assert_eq!(transmit(&flip, 1, &mut rng), 2);
            assert_eq!(transmit(&flip, 2, &mut rng), 1);
        }
        let always = IndexChannel::new(1.0, 5).unwrap();
        for _ in 0..1000 {
            let r = transmit(&always, 3, &mut rng);
            assert!(r != 3 && (1..=5).contains(&r));
        }
        assert!(IndexChannel::new(1.5, 2).is_err());
        assert!(IndexChannel::new(0.5, 0).is_err());
    }

    #[test]
    fn encoder_falls_back_when_nothing_is_typical() {
        let book = fixture(8, 4, 4, 1e-9);
        let x = vec![0.3; 8];
        let (bin, k) = encode(&book, &x, &source(), &channel(), 1e-9).unwrap();
        assert_eq!(bin, 5);
        assert_eq!(k, Codeword::Sentinel);
    }

    #[test]
    fn encoder_finds_planted_codeword() {
        let delta = 1e-6;
        let mut book = fixture(8, 3, 4, delta);
        let x = vec![0.0; 8];
        book.codeword_mut(1, 1).copy_from_slice(&planted_for(&x));
        let (bin, k) = encode(&book, &x, &source(), &channel(), delta).unwrap();
        assert_eq!((bin, k), (1, Codeword::Entry { bin: 1, column: 1 }));
    }

    #[test]
    fn encoder_prefers_lexicographic_first() {
        let delta = 1e-6;
        let mut book = fixture(8, 3, 4, delta);
        let x = vec![0.0; 8];
        book.codeword_mut(2, 1).copy_from_slice(&planted_for(&x));
        book.codeword_mut(1, 3).copy_from_slice(&planted_for(&x));
        let (bin, k) = encode(&book, &x, &source(), &channel(), delta).unwrap();
        assert_eq!((bin, k), (1, Codeword::Entry { bin: 1, column: 3 }));
    }

    #[test]
    fn decoder_unique_ambiguous_and_sentinel() {
        let delta = 1e-6;
        let mut book = fixture(8, 2, 6, delta);
        let y = vec![0.0; 8];
        book.codeword_mut(2, 5).copy_from_slice(&planted_for(&y));
        let l = decode(&book, &y, 2, &source(), &channel(), delta).unwrap();
        assert_eq!(l, Codeword::Entry { bin: 2, column: 5 });

        book.codeword_mut(2, 2).copy_from_slice(&planted_for(&y));
        assert_eq!(decode(&book, &y, 2, &source(), &channel(), delta).unwrap(), Codeword::Sentinel);
        assert_eq!(decode(&book, &y, 3, &source(), &channel(), delta).unwrap(), Codeword::Sentinel);
        assert!(decode(&book, &y, 4, &source(), &channel(), delta).is_err());
        assert!(decode(&book, &y[..4], 1, &source(), &channel(), delta).is_err());
    }

    #[test]
    fn always_typical_single_column_always_agrees() {
        let mut cfg = ProtocolConfig::new(source(), channel(), 8, 1e6, 200, 3);
        cfg.sizing = Sizing::Explicit { n1: 4, n2: 1 };
        let r = run_trials(&cfg).unwrap();
        assert_eq!(r.agreement.estimate, 1.0);
        assert_eq!(r.union_bound, 0.0);
        assert!(r.key_entropy.is_none());
    }

    #[test]
    fn outcome_invariants_hold() {
        let mut cfg = ProtocolConfig::new(source(), channel(), 10, 0.2, 400, 17);
        cfg.sizing = Sizing::Rates {
            bin_rate: 0.5,
            column_rate: 0.2,
        };
        cfg.error_prob = 0.1;
        let sim = simulate(&cfg).unwrap();
        let (n1, n2) = (sim.codebook.n1(), sim.codebook.n2());
        for o in &sim.outcomes {
            assert_eq!(o.agreed, o.k_index == o.l_index);
            assert!(!(o.events.e1 && o.events.e2));
            if o.events.e3 || o.events.e4 {
                assert!(!o.events.e1 && !o.events.e2);
            }
            if !o.agreed {
                assert!(o.events.any());
            }
            for k in [o.k_index, o.l_index] {
                if let Codeword::Entry { bin, column } = k {
                    assert!((1..=n1).contains(&bin) && (1..=n2).contains(&column));
                }
            }
        }
        let r = TrialReport::summarize(&cfg, &sim).unwrap();
        assert!(r.union_bound_holds);
        assert_eq!(r.csv_record().len(), TrialReport::csv_header().len());
    }

    #[test]
    fn perfect_correlation_is_routed_elsewhere() {
        let cfg = ProtocolConfig::new(SourceParams::standard(1.0).unwrap(), channel(), 8, 0.2, 10, 0);
        assert!(matches!(run_trials(&cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn key_entropy_of_synthetic_streams() {
        let uniform: Vec<Codeword> = (0..1000)
            .map(|i| Codeword::Entry {
                bin: 1,
                column: (i % 8) + 1,
            })
            .collect();
        let h = estimate_key_entropy(&uniform, 3, 0.5, 0.1).unwrap();
        assert!((h.plugin_bits - 3.0).abs() < 1e-12);
        assert!((h.bias_bits - 7.0 / (2000.0 * std::f64::consts::LN_2)).abs() < 1e-15);
        let constant = vec![Codeword::Sentinel; 1000];
        let h = estimate_key_entropy(&constant, 3, 0.5, 0.1).unwrap();
        assert_eq!(h.plugin_bits, 0.0);
        assert_eq!(h.sentinel_mass, 1.0);
        assert!(estimate_key_entropy(&constant[..999], 3, 0.5, 0.1).is_err());
    }
}
