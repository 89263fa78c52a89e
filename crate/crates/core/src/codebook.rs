//! Random binned codebook of auxiliary codewords.
//!
//! Codewords `u^n(i, j)` are indexed by bin `i in 1..=N1` and column
//! `j in 1..=N2`. Every symbol is drawn i.i.d. from the marginal of `U`.
//! Both terminals rebuild the same codebook from a shared seed.

use std::io::{self, Read, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::TestChannel;
use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::source::SourceParams;

/// Default cap on `N1 * N2 * n` stored scalars.
pub const DEFAULT_BUDGET: u64 = 1 << 28;

/// Exponents within this distance of an integer are snapped to it before
/// taking `ceil(2^e)`, so `2^{20 * 0.7}` is 16384 and not 16385.
const EXPONENT_SNAP: f64 = 1e-9;

/// `ceil(2^e)`, saturating at `u64::MAX`.
pub fn ceil_pow2(exponent: f64) -> u64 {
    let rounded = exponent.round();
    let e = if (exponent - rounded).abs() < EXPONENT_SNAP {
        rounded
    } else {
        exponent
    };
    if e >= 63.0 {
        return u64::MAX;
    }
    e.exp2().ceil().max(1.0) as u64
}

/// Block length, slack and auxiliary rates, with the derived codebook sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CodebookParams {
    pub n: usize,
    pub delta: f64,
    pub i_ux: f64,
    pub i_uy: f64,
    n1: u64,
    n2: u64,
}

impl CodebookParams {
    /// Sizes `N1 = ceil(2^{n(I(U;X) - I(U;Y) + 4δ)})` and
    /// `N2 = ceil(2^{n(I(U;Y) - 2δ)})`. Rejects `I(U;Y) <= 2δ`, where the
    /// binning collapses to a single column.
    pub fn new(n: usize, delta: f64, i_ux: f64, i_uy: f64) -> Result<Self> {
        Self::validate(n, delta, i_ux, i_uy)?;
        if i_uy - 2.0 * delta <= 0.0 {
            return Err(Error::DegenerateCodebook(format!(
                "I(U;Y) - 2 delta = {} <= 0 leaves one column per bin",
                i_uy - 2.0 * delta
            )));
        }
        let nf = n as f64;
        let n1 = ceil_pow2(nf * (i_ux - i_uy + 4.0 * delta));
        let n2 = ceil_pow2(nf * (i_uy - 2.0 * delta));
        Ok(Self {
            n,
            delta,
            i_ux,
            i_uy,
            n1,
            n2,
        })
    }

    /// Explicit sizes for experiments that depart from the default rates,
    /// such as an oversized column count or a single-column codebook.
    pub fn with_sizes(n: usize, delta: f64, i_ux: f64, i_uy: f64, n1: u64, n2: u64) -> Result<Self> {
        Self::validate(n, delta, i_ux, i_uy)?;
        if n1 == 0 || n2 == 0 {
            return Err(invalid("sizes", format!("N1 = {n1} and N2 = {n2} must be at least 1")));
        }
        Ok(Self {
            n,
            delta,
            i_ux,
            i_uy,
            n1,
            n2,
        })
    }

    /// Sizes `ceil(2^{n * bin_rate})` and `ceil(2^{n * column_rate})`.
    pub fn with_rates(n: usize, delta: f64, i_ux: f64, i_uy: f64, bin_rate: f64, column_rate: f64) -> Result<Self> {
        if !(bin_rate >= 0.0 && column_rate >= 0.0 && bin_rate.is_finite() && column_rate.is_finite()) {
            return Err(invalid("rates", "bin and column rates must be finite and non-negative"));
        }
        let nf = n as f64;
        Self::with_sizes(n, delta, i_ux, i_uy, ceil_pow2(nf * bin_rate), ceil_pow2(nf * column_rate))
    }

    fn validate(n: usize, delta: f64, i_ux: f64, i_uy: f64) -> Result<()> {
        if n == 0 {
            return Err(invalid("n", "block length must be at least 1"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid("delta", format!("must be positive and finite, got {delta}")));
        }
        if !(i_uy >= 0.0 && i_ux >= i_uy && i_ux.is_finite()) {
            return Err(invalid(
                "i_ux",
                format!("need I(U;X) >= I(U;Y) >= 0, got {i_ux} and {i_uy}"),
            ));
        }
        Ok(())
    }

    pub fn n1(&self) -> u64 {
        self.n1
    }

    pub fn n2(&self) -> u64 {
        self.n2
    }

    /// Stored scalars `N1 * N2 * n`, saturating.
    pub fn scalar_count(&self) -> u64 {
        self.n1
            .saturating_mul(self.n2)
            .saturating_mul(self.n as u64)
    }

    /// `log2(N1 * N2) / n`.
    pub fn total_rate(&self) -> f64 {
        ((self.n1 as f64).log2() + (self.n2 as f64).log2()) / self.n as f64
    }
}

/// Identity of a codeword, with the sentinel `u0` as a reserved value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Codeword {
    /// `u0`: no codeword found, or ambiguous decoding.
    Sentinel,
    /// `u^n(bin, column)`, both 1-based.
    Entry { bin: u64, column: u64 },
}

impl Codeword {
    pub fn is_sentinel(&self) -> bool {
        matches!(self, Codeword::Sentinel)
    }

    /// Flat index: 0 for the sentinel, `1 + (bin - 1) * N2 + (column - 1)` otherwise.
    pub fn flat_index(&self, n2: u64) -> u64 {
        match *self {
            Codeword::Sentinel => 0,
            Codeword::Entry { bin, column } => 1 + (bin - 1) * n2 + (column - 1),
        }
    }
}

/// Channel message count `N1 + 1` and its rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MessageCount {
    pub messages: u64,
    /// `log2(N1 + 1) / n` bits per symbol.
    pub rate: f64,
}

impl MessageCount {
    /// Whether `rate <= C(W) - margin`.
    pub fn fits(&self, channel_capacity: f64, margin: f64) -> bool {
        self.rate <= channel_capacity - margin
    }
}

pub fn message_count(params: &CodebookParams) -> MessageCount {
    let messages = params.n1.saturating_add(1);
    MessageCount {
        messages,
        rate: (messages as f64).log2() / params.n as f64,
    }
}

/// A materialized codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    params: CodebookParams,
    gen_seed: u64,
    mean: f64,
    sd: f64,
    // Row-major over (bin, column, symbol).
    entries: Vec<f64>,
}

/// Draws all `N1 * N2 * n` symbols from `N(mu_x, var_x + noise_var)`.
///
/// Each bin draws from its own stream, so the result does not depend on
/// thread scheduling.
pub fn build_codebook(
    params: &CodebookParams,
    source: &SourceParams,
    ch: &TestChannel,
    seed: u64,
    budget: u64,
) -> Result<Codebook> {
    let scalars = params.scalar_count();
    if scalars > budget || scalars > usize::MAX as u64 {
        return Err(Error::BudgetExceeded {
            n1: params.n1,
            n2: params.n2,
            n: params.n,
            budget,
        });
    }
    let mean = source.mu_x();
    let sd = ch.aux_var(source).sqrt();
    let row = params.n2 as usize * params.n;
    let mut entries = vec![0.0; scalars as usize];
    entries
        .par_chunks_mut(row)
        .enumerate()
        .for_each(|(bin, chunk)| {
            let mut rng = rng::codebook_rng(seed, bin as u64);
            for v in chunk.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v = mean + sd * z;
            }
        });
    Ok(Codebook {
        params: *params,
        gen_seed: seed,
        mean,
        sd,
        entries,
    })
}

impl Codebook {
    pub fn params(&self) -> &CodebookParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn n1(&self) -> u64 {
        self.params.n1
    }

    pub fn n2(&self) -> u64 {
        self.params.n2
    }

    pub fn gen_seed(&self) -> u64 {
        self.gen_seed
    }

    /// Mean and standard deviation of the codeword symbol law.
    pub fn symbol_law(&self) -> (f64, f64) {
        (self.mean, self.sd)
    }

    /// The bin message reserved for encoder failure.
    pub fn failure_message(&self) -> u64 {
        self.params.n1 + 1
    }

    fn offset(&self, bin: u64, column: u64) -> usize {
        debug_assert!((1..=self.params.n1).contains(&bin));
        debug_assert!((1..=self.params.n2).contains(&column));
        (((bin - 1) * self.params.n2 + (column - 1)) as usize) * self.params.n
    }

    /// Codeword `u^n(bin, column)`, 1-based.
    pub fn codeword(&self, bin: u64, column: u64) -> &[f64] {
        let start = self.offset(bin, column);
        &self.entries[start..start + self.params.n]
    }

    /// All codewords of one bin, row-major over columns.
    pub fn bin(&self, bin: u64) -> &[f64] {
        let start = self.offset(bin, 1);
        &self.entries[start..start + self.params.n2 as usize * self.params.n]
    }

    /// Every stored symbol, row-major over (bin, column, symbol).
    pub fn symbols(&self) -> &[f64] {
        &self.entries
    }

    /// Mutable access for hand-built fixtures.
    pub fn codeword_mut(&mut self, bin: u64, column: u64) -> &mut [f64] {
        let start = self.offset(bin, column);
        let n = self.params.n;
        &mut self.entries[start..start + n]
    }

    /// Debug export: little-endian `u64` header `(n, N1, N2, seed)` followed
    /// by the row-major `f64` symbols.
    pub fn write_debug<W: Write>(&self, mut out: W) -> io::Result<()> {
        for v in [
            self.params.n as u64,
            self.params.n1,
            self.params.n2,
            self.gen_seed,
        ] {
            out.write_all(&v.to_le_bytes())?;
        }
        for v in &self.entries {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Contents of a debug export.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookDump {
    pub n: usize,
    pub n1: u64,
    pub n2: u64,
    pub seed: u64,
    pub symbols: Vec<f64>,
}

pub fn read_debug<R: Read>(mut input: R) -> Result<CodebookDump> {
    let mut word = [0u8; 8];
    let mut header = [0u64; 4];
    for h in header.iter_mut() {
        input.read_exact(&mut word)?;
        *h = u64::from_le_bytes(word);
    }
    let [n, n1, n2, seed] = header;
    let count = n1
        .checked_mul(n2)
        .and_then(|c| c.checked_mul(n))
        .ok_or_else(|| invalid("header", "codebook dimensions overflow"))?;
    let mut symbols = Vec::with_capacity(count as usize);
    for _ in 0..count {
        input.read_exact(&mut word)?;
        symbols.push(f64::from_le_bytes(word));
    }
    Ok(CodebookDump {
        n: n as usize,
        n1,
        n2,
        seed,
        symbols,
    })
}
