//! Bivariate Gaussian memoryless source.
//!
//! Sampling uses the conditional decomposition
//! `Y = mu_y + rho * (sd_y / sd_x) * (X - mu_x) + sqrt(1 - rho^2) * sd_y * Z`,
//! which makes `|rho| = 1` an exact linear map. All information quantities
//! are in bits.

use std::f64::consts::LN_2;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::information::Information;
use crate::quadrature;
use crate::rng;

/// Moments of the bivariate normal law `p_XY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceParams {
    mu_x: f64,
    mu_y: f64,
    var_x: f64,
    var_y: f64,
    rho: f64,
}

impl SourceParams {
    pub fn new(mu_x: f64, mu_y: f64, var_x: f64, var_y: f64, rho: f64) -> Result<Self> {
        if !mu_x.is_finite() || !mu_y.is_finite() {
            return Err(invalid("mu", "means must be finite"));
        }
        if !(var_x > 0.0 && var_x.is_finite()) {
            return Err(invalid("var_x", format!("must be positive and finite, got {var_x}")));
        }
        if !(var_y > 0.0 && var_y.is_finite()) {
            return Err(invalid("var_y", format!("must be positive and finite, got {var_y}")));
        }
        if rho.is_nan() || rho.abs() > 1.0 {
            return Err(invalid("rho", format!("must lie in [-1, 1], got {rho}")));
        }
        Ok(Self {
            mu_x,
            mu_y,
            var_x,
            var_y,
            rho,
        })
    }

    /// Zero means, unit variances.
    pub fn standard(rho: f64) -> Result<Self> {
        Self::new(0.0, 0.0, 1.0, 1.0, rho)
    }

    pub fn mu_x(&self) -> f64 {
        self.mu_x
    }
    pub fn mu_y(&self) -> f64 {
        self.mu_y
    }
    pub fn var_x(&self) -> f64 {
        self.var_x
    }
    pub fn var_y(&self) -> f64 {
        self.var_y
    }
    pub fn sd_x(&self) -> f64 {
        self.var_x.sqrt()
    }
    pub fn sd_y(&self) -> f64 {
        self.var_y.sqrt()
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Exact test; `1 - eps` is treated as an ordinary correlated source.
    pub fn is_perfectly_correlated(&self) -> bool {
        self.rho.abs() == 1.0
    }

    /// The same law with the roles of X and Y exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            mu_x: self.mu_y,
            mu_y: self.mu_x,
            var_x: self.var_y,
            var_y: self.var_x,
            rho: self.rho,
        }
    }
}

/// `n` paired observations, `x_seq` at terminal A and `y_seq` at terminal B.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePair {
    pub x_seq: Vec<f64>,
    pub y_seq: Vec<f64>,
}

impl SamplePair {
    pub fn new(x_seq: Vec<f64>, y_seq: Vec<f64>) -> Result<Self> {
        if x_seq.is_empty() {
            return Err(invalid("n", "block length must be at least 1"));
        }
        if x_seq.len() != y_seq.len() {
            return Err(invalid(
                "y_seq",
                format!("length {} differs from x_seq length {}", y_seq.len(), x_seq.len()),
            ));
        }
        Ok(Self { x_seq, y_seq })
    }

    pub fn n(&self) -> usize {
        self.x_seq.len()
    }

    pub fn concat(&self, other: &SamplePair) -> SamplePair {
        let mut x_seq = self.x_seq.clone();
        x_seq.extend_from_slice(&other.x_seq);
        let mut y_seq = self.y_seq.clone();
        y_seq.extend_from_slice(&other.y_seq);
        SamplePair { x_seq, y_seq }
    }
}

/// Draws `n` i.i.d. pairs, deterministically for a fixed seed.
pub fn sample_pairs(params: &SourceParams, n: usize, seed: u64) -> Result<SamplePair> {
    if n == 0 {
        return Err(invalid("n", "block length must be at least 1"));
    }
    Ok(sample_pairs_with(params, n, &mut rng::seeded(seed)))
}

/// Draws `n` i.i.d. pairs from a caller-supplied generator.
///
/// Consumes exactly two standard normals per symbol, X first.
pub fn sample_pairs_with<R: Rng + ?Sized>(params: &SourceParams, n: usize, rng: &mut R) -> SamplePair {
    let slope = params.rho * params.sd_y() / params.sd_x();
    let resid = (1.0 - params.rho * params.rho).sqrt() * params.sd_y();
    let mut x_seq = Vec::with_capacity(n);
    let mut y_seq = Vec::with_capacity(n);
    for _ in 0..n {
        let zx: f64 = rng.sample(StandardNormal);
        let zy: f64 = rng.sample(StandardNormal);
        let x = params.mu_x + params.sd_x() * zx;
        let y = params.mu_y + slope * (x - params.mu_x) + resid * zy;
        x_seq.push(x);
        y_seq.push(y);
    }
    SamplePair { x_seq, y_seq }
}

/// Draws `x_seq` and `y_seq` independently from their marginals.
pub fn sample_independent_with<R: Rng + ?Sized>(
    params: &SourceParams,
    n: usize,
    rng: &mut R,
) -> SamplePair {
    let mut x_seq = Vec::with_capacity(n);
    let mut y_seq = Vec::with_capacity(n);
    for _ in 0..n {
        let zx: f64 = rng.sample(StandardNormal);
        let zy: f64 = rng.sample(StandardNormal);
        x_seq.push(params.mu_x + params.sd_x() * zx);
        y_seq.push(params.mu_y + params.sd_y() * zy);
    }
    SamplePair { x_seq, y_seq }
}

/// `I(X;Y) = -1/2 log2(1 - rho^2)`, infinite at `|rho| = 1`.
pub fn mutual_information(params: &SourceParams) -> Information {
    if params.is_perfectly_correlated() {
        Information::Infinite
    } else {
        Information::Finite(-0.5 * (-params.rho * params.rho).ln_1p() / LN_2)
    }
}

/// Per-symbol information density `log2 p(y|x) / p(y)` of a jointly
/// Gaussian pair, precomputed for repeated evaluation.
#[derive(Debug, Clone, Copy)]
pub struct DensityRatio {
    mu_x: f64,
    inv_sd_x: f64,
    mu_y: f64,
    inv_sd_y: f64,
    rho: f64,
    offset: f64,
    inv_two_resid: f64,
}

impl DensityRatio {
    pub fn new(params: &SourceParams) -> Result<Self> {
        if params.is_perfectly_correlated() {
            return Err(Error::DegenerateDensity);
        }
        let one_minus = (1.0 - params.rho) * (1.0 + params.rho);
        Ok(Self {
            mu_x: params.mu_x,
            inv_sd_x: 1.0 / params.sd_x(),
            mu_y: params.mu_y,
            inv_sd_y: 1.0 / params.sd_y(),
            rho: params.rho,
            offset: -0.5 * (-params.rho * params.rho).ln_1p(),
            inv_two_resid: 0.5 / one_minus,
        })
    }

    /// Density ratio of one symbol pair, in nats.
    #[inline]
    pub fn symbol_nats(&self, x: f64, y: f64) -> f64 {
        let a = (x - self.mu_x) * self.inv_sd_x;
        let b = (y - self.mu_y) * self.inv_sd_y;
        let r = b - self.rho * a;
        self.offset - r * r * self.inv_two_resid + 0.5 * b * b
    }

    /// Information density of two equal-length sequences, in bits.
    #[inline]
    pub fn sum_bits(&self, xs: &[f64], ys: &[f64]) -> f64 {
        debug_assert_eq!(xs.len(), ys.len());
        xs.iter()
            .zip(ys)
            .map(|(&x, &y)| self.symbol_nats(x, y))
            .sum::<f64>()
            / LN_2
    }
}

/// `i(x^n; y^n) = sum_t log2 p(y_t|x_t) / p(y_t)`.
pub fn information_density(params: &SourceParams, pair: &SamplePair) -> Result<f64> {
    let ratio = DensityRatio::new(params)?;
    if pair.n() == 0 {
        return Err(invalid("n", "block length must be at least 1"));
    }
    Ok(ratio.sum_bits(&pair.x_seq, &pair.y_seq))
}

const QUADRATURE_TOL: f64 = 1e-10;
const QUADRATURE_SPAN: f64 = 10.0;

/// Log of the bivariate normal density, built from the covariance matrix
/// without the conditional factorization used elsewhere.
fn joint_ln_pdf(params: &SourceParams, x: f64, y: f64) -> f64 {
    let (vx, vy) = (params.var_x, params.var_y);
    let cov = params.rho * (vx * vy).sqrt();
    let det = vx * vy - cov * cov;
    let dx = x - params.mu_x;
    let dy = y - params.mu_y;
    let quad = (vy * dx * dx - 2.0 * cov * dx * dy + vx * dy * dy) / det;
    -0.5 * quad - (2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln()
}

fn marginal_ln_pdf(mu: f64, var: f64, v: f64) -> f64 {
    let d = v - mu;
    -0.5 * d * d / var - 0.5 * (2.0 * std::f64::consts::PI * var).ln()
}

fn density_moment(params: &SourceParams, power: i32) -> Result<f64> {
    if params.is_perfectly_correlated() {
        return Err(Error::DegenerateDensity);
    }
    let p = *params;
    let xr = (
        p.mu_x - QUADRATURE_SPAN * p.sd_x(),
        p.mu_x + QUADRATURE_SPAN * p.sd_x(),
    );
    let yr = (
        p.mu_y - QUADRATURE_SPAN * p.sd_y(),
        p.mu_y + QUADRATURE_SPAN * p.sd_y(),
    );
    let q = quadrature::integrate_2d(
        |x, y| {
            let lj = joint_ln_pdf(&p, x, y);
            let ratio = (lj - marginal_ln_pdf(p.mu_x, p.var_x, x) - marginal_ln_pdf(p.mu_y, p.var_y, y)) / LN_2;
            lj.exp() * ratio.powi(power)
        },
        xr,
        yr,
        QUADRATURE_TOL,
    )?;
    Ok(q.value)
}

/// `E[i(X;Y)]` by adaptive quadrature over `[mu - 10 sd, mu + 10 sd]^2`.
pub fn quadrature_mutual_information(params: &SourceParams) -> Result<f64> {
    density_moment(params, 1)
}

/// Mean and variance of the per-symbol information density, by quadrature.
pub fn information_density_moments(params: &SourceParams) -> Result<(f64, f64)> {
    let mean = density_moment(params, 1)?;
    let second = density_moment(params, 2)?;
    Ok((mean, (second - mean * mean).max(0.0)))
}
