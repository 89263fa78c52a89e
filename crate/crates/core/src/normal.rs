//! Standard normal distribution helpers.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal CDF, evaluated through the complementary error function.
pub fn cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Natural log of the standard normal density.
pub fn ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - 0.5 * (2.0 * PI).ln()
}

/// Upper tail probability 1 - cdf(z) without cancellation.
pub fn sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_quantiles() {
        assert_eq!(cdf(0.0), 0.5);
        assert!((cdf(1.6448536269514722) - 0.95).abs() < 1e-12);
        assert!((cdf(-1.959963984540054) - 0.025).abs() < 1e-12);
        // Tail accuracy: Phi(-8) = 6.220960574271785e-16
        assert!((cdf(-8.0) / 6.220960574271785e-16 - 1.0).abs() < 1e-12);
        assert!((sf(3.0) - 1.3498980316300946e-3).abs() < 1e-15);
    }
}
