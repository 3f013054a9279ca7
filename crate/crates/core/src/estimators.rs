//! Aggregation of independent realizations and derived quantities.

use crate::engine::AmsResult;
use crate::rng::Stream;
use crate::sde::{simulate_final_state, Dynamics, GridSpec, ObservableSpec};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Normal quantile used for 95% confidence intervals.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub mean: f64,
    /// Unbiased (divisor `M - 1`); zero when `M = 1`.
    pub variance: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub m: usize,
    /// Fraction of realizations with a positive estimate.
    pub r_nonzero: f64,
    pub extinct_count: usize,
    pub wall_time: f64,
}

impl EstimateSummary {
    /// Builds a summary from raw per-realization estimates.
    pub fn from_values(values: &[f64], extinct_count: usize, wall_time: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        let m = values.len();
        let mf = m as f64;
        let mean = values.iter().sum::<f64>() / mf;
        let variance = if m > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (mf - 1.0)
        } else {
            0.0
        };
        let half = Z_95 * (variance / mf).sqrt();
        let nonzero = values.iter().filter(|&&v| v > 0.0).count();
        Ok(Self {
            mean,
            variance,
            ci_low: mean - half,
            ci_high: mean + half,
            m,
            r_nonzero: nonzero as f64 / mf,
            extinct_count,
            wall_time,
        })
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance / self.m as f64).sqrt()
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

/// Mean, unbiased variance, 95% CI and nonzero fraction of the `p_hat`s.
pub fn aggregate(results: &[AmsResult]) -> Result<EstimateSummary> {
    let values: Vec<f64> = results.iter().map(|r| r.p_hat).collect();
    let extinct = results.iter().filter(|r| r.extinct).count();
    EstimateSummary::from_values(&values, extinct, 0.0)
}

/// Plain Monte Carlo: Bernoulli average of `1{Phi(X_N) > a}`.
pub fn naive_mc(
    model: &dyn Dynamics,
    grid: &GridSpec,
    obs: &ObservableSpec,
    n_samples: usize,
    rng: &mut Stream,
) -> Result<EstimateSummary> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be positive".into()));
    }
    let start = Instant::now();
    let mut hits = 0usize;
    for _ in 0..n_samples {
        let x = simulate_final_state(model, grid, rng)?;
        if obs.is_rare(&x) {
            hits += 1;
        }
    }
    let n = n_samples as f64;
    let mean = hits as f64 / n;
    // Sample variance of 0/1 data in closed form.
    let variance = if n_samples > 1 {
        mean * (1.0 - mean) * n / (n - 1.0)
    } else {
        0.0
    };
    let half = Z_95 * (variance / n).sqrt();
    Ok(EstimateSummary {
        mean,
        variance,
        ci_low: mean - half,
        ci_high: mean + half,
        m: n_samples,
        r_nonzero: mean,
        extinct_count: 0,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// `q = p / p_max`, the probability of ending above `a` given the path got there.
pub fn conditional_q(summary_p: &EstimateSummary, summary_pmax: &EstimateSummary) -> Result<f64> {
    if !(summary_pmax.mean > 0.0) {
        return Err(Error::InvalidArgument(
            "p_max estimate must be positive".into(),
        ));
    }
    Ok(summary_p.mean / summary_pmax.mean)
}

/// Asymptotic AMS variance `-p^2 log(p) / n_rep` for an ideal score.
pub fn optimal_variance_ref(p: f64, n_rep: usize) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("p = {p} outside (0, 1)")));
    }
    if n_rep == 0 {
        return Err(Error::InvalidArgument("n_rep must be positive".into()));
    }
    Ok(-p * p * p.ln() / n_rep as f64)
}

/// `Eff(Y|X) = (var_X * time_X) / (var_Y * time_Y)`.
pub fn efficiency_ratio(summary_x: &EstimateSummary, summary_y: &EstimateSummary) -> Result<f64> {
    for (label, s) in [("x", summary_x), ("y", summary_y)] {
        if !(s.variance > 0.0) || !(s.wall_time > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "summary {label} needs positive variance and wall time"
            )));
        }
    }
    Ok((summary_x.variance * summary_x.wall_time) / (summary_y.variance * summary_y.wall_time))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub a: f64,
    pub i_hat: f64,
    pub intercept: f64,
    /// `(T, log p_hat)` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
}

/// Least-squares line through `(T, log p_hat)`; the rate estimate is minus the slope.
pub fn rate_regression(a: f64, points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "rate regression needs at least two points".into(),
        ));
    }
    if let Some(&(t, p)) = points.iter().find(|(_, p)| !(*p > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "nonpositive estimate {p} at T = {t}"
        )));
    }
    let logged: Vec<(f64, f64)> = points.iter().map(|&(t, p)| (t, p.ln())).collect();
    let n = logged.len() as f64;
    let t_mean = logged.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = logged.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logged.iter().map(|p| (p.0 - t_mean).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidArgument(
            "rate regression needs two distinct horizons".into(),
        ));
    }
    let sxy: f64 = logged
        .iter()
        .map(|p| (p.0 - t_mean) * (p.1 - y_mean))
        .sum();
    let slope = sxy / sxx;
    Ok(RateFit {
        a,
        i_hat: -slope,
        intercept: y_mean - slope * t_mean,
        points: logged,
    })
}
