//! Closed-form reference probabilities for the Gaussian test models.
//!
//! All tails go through the complementary error function so that upper-tail
//! probabilities keep full relative accuracy far below `1e-16`; computing
//! `1 - F(x)` directly would cancel to zero long before the `1e-13` regime
//! of the deep Brownian rows.

use serde::{Deserialize, Serialize};
use libm::erfc;
use std::f64::consts::SQRT_2;

/// Standard normal CDF `F(x)`.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal upper tail `1 - F(x)`, accurate in the far tail.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// A one-dimensional Gaussian law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianLaw {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianLaw {
    pub fn new(mean: f64, variance: f64) -> Self {
        assert!(variance >= 0.0, "negative variance {variance}");
        Self { mean, variance }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// `P(X > a)`.
    pub fn upper_tail(&self, a: f64) -> f64 {
        if self.variance == 0.0 {
            return if self.mean > a { 1.0 } else { 0.0 };
        }
        std_normal_sf((a - self.mean) / self.std_dev())
    }

    /// `P(|X| > a)`.
    pub fn two_sided_tail(&self, a: f64) -> f64 {
        if a < 0.0 {
            return 1.0;
        }
        if self.variance == 0.0 {
            return if self.mean.abs() > a { 1.0 } else { 0.0 };
        }
        let s = self.std_dev();
        std_normal_sf((a - self.mean) / s) + std_normal_cdf((-a - self.mean) / s)
    }
}

/// Law of `x0 + sqrt(2/beta) W(t)`.
pub fn brownian_law(beta: f64, x0: f64, t: f64) -> GaussianLaw {
    GaussianLaw::new(x0, 2.0 * t / beta)
}

/// Law at time `t` of `dX = -X dt + sqrt(2/beta) dW`, `X(0) = x0`.
pub fn ou_law(beta: f64, x0: f64, t: f64) -> GaussianLaw {
    GaussianLaw::new(x0 * (-t).exp(), -(-2.0 * t).exp_m1() / beta)
}

/// Law at time `t` of `dX = -alpha dt + sqrt(2/beta) dW`, `X(0) = x0`.
pub fn drifted_bm_law(alpha: f64, beta: f64, x0: f64, t: f64) -> GaussianLaw {
    GaussianLaw::new(x0 - alpha * t, 2.0 * t / beta)
}

/// Law of the time average `(1/T) int_0^T X dt` for the OU process started
/// at `0` with diffusion `sqrt(2/beta)`.
pub fn ou_average_law(beta: f64, t: f64) -> GaussianLaw {
    // Var(int X) = s^2 * int_0^T (1 - e^{-v})^2 dv
    let integral = t + 2.0 * (-t).exp_m1() - 0.5 * (-2.0 * t).exp_m1();
    GaussianLaw::new(0.0, 2.0 / beta * integral / (t * t))
}

/// `P(|X(T)| > a)` for the Brownian model `dX = sqrt(2/beta) dW`, `X(0) = x0`.
pub fn analytic_p_brownian(beta: f64, x0: f64, t: f64, a: f64) -> f64 {
    brownian_law(beta, x0, t).two_sided_tail(a)
}

/// `P(X(T) > a)` for `dX = -X dt + dW`, `X(0) = 0`.
pub fn analytic_p_ou(t: f64, a: f64) -> f64 {
    ou_law(2.0, 0.0, t).upper_tail(a)
}

/// `P(X(T) > a)` for `dX = -alpha dt + sqrt(2/beta) dW`, `X(0) = 0`.
pub fn analytic_p_drifted_bm(alpha: f64, beta: f64, t: f64, a: f64) -> f64 {
    drifted_bm_law(alpha, beta, 0.0, t).upper_tail(a)
}

/// Large-deviations rate of the OU time average with unit stationary
/// variance: `I(a) = a^2 / 4`.
pub fn ou_average_rate_exact(a: f64) -> f64 {
    a * a / 4.0
}
