//! State augmentations that turn path functionals into terminal values.
//!
//! Both wrappers append one coordinate `y` to the base state, so an event on
//! a functional of the whole path becomes `y_N > a` for the augmented chain.

use super::{Dynamics, GridSpec, StateFn};
use crate::rng::Stream;
use crate::Result;
use std::sync::Arc;

/// Running time average `Y_n = (1/(n - n0)) sum_{m = n0+1}^{n} phi(X_m)`,
/// with `Y_{n0} = phi(x0)`.
///
/// The coordinate follows the exact discrete recursion
/// `Y_{n+1} = (1 - 1/k) Y_n + phi(X_{n+1}) / k` with `k = n + 1 - n0`.
#[derive(Clone)]
pub struct TemporalAverage {
    base: Arc<dyn Dynamics>,
    phi: StateFn,
    name: String,
}

impl TemporalAverage {
    pub fn new(base: Arc<dyn Dynamics>, phi: StateFn) -> Self {
        let name = format!("{}+average", base.name());
        Self { base, phi, name }
    }

    /// `(x0, phi(x0))`.
    pub fn initial_state(&self, x0: &[f64]) -> Vec<f64> {
        let mut s = x0.to_vec();
        s.push((self.phi)(x0));
        s
    }
}

impl Dynamics for TemporalAverage {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.base.dim() + 1
    }

    fn advance(
        &self,
        grid: &GridSpec,
        n: usize,
        x: &[f64],
        next: &mut [f64],
        rng: &mut Stream,
    ) -> Result<()> {
        let d = self.base.dim();
        self.base.advance(grid, n, &x[..d], &mut next[..d], rng)?;
        let k = (n + 1 - grid.n0) as f64;
        next[d] = (1.0 - 1.0 / k) * x[d] + (self.phi)(&next[..d]) / k;
        Ok(())
    }
}

/// Wraps `model` so that its last coordinate carries the running average of `phi`.
pub fn augment_temporal_average(model: Arc<dyn Dynamics>, phi: StateFn) -> TemporalAverage {
    TemporalAverage::new(model, phi)
}

/// Ratio to elapsed time, `Y_n = phi(X_n) / (n dt)`, with `Y = 0` at `t = 0`.
///
/// Used for velocity-type observables such as `X(T) / T`.
#[derive(Clone)]
pub struct TimeRatio {
    base: Arc<dyn Dynamics>,
    phi: StateFn,
    name: String,
}

impl TimeRatio {
    pub fn new(base: Arc<dyn Dynamics>, phi: StateFn) -> Self {
        let name = format!("{}+ratio", base.name());
        Self { base, phi, name }
    }

    pub fn initial_state(&self, x0: &[f64], t0: f64) -> Vec<f64> {
        let mut s = x0.to_vec();
        s.push(if t0 > 0.0 { (self.phi)(x0) / t0 } else { 0.0 });
        s
    }
}

impl Dynamics for TimeRatio {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.base.dim() + 1
    }

    fn advance(
        &self,
        grid: &GridSpec,
        n: usize,
        x: &[f64],
        next: &mut [f64],
        rng: &mut Stream,
    ) -> Result<()> {
        let d = self.base.dim();
        self.base.advance(grid, n, &x[..d], &mut next[..d], rng)?;
        next[d] = (self.phi)(&next[..d]) / grid.time(n + 1);
        Ok(())
    }
}
