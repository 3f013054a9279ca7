//! A lattice random walk whose path space can be enumerated by hand.
//!
//! Not an SDE: each step is `+step` or `-step` with probability 1/2. It is
//! used to check the AMS estimator against exact probabilities, and it
//! produces the score ties and extinctions that continuous models almost
//! never do.

use super::{Dynamics, GridSpec};
use crate::rng::Stream;
use crate::Result;
use rand::Rng;

#[derive(Debug, Clone, Copy)]
pub struct SymmetricWalk {
    pub step: f64,
}

impl Default for SymmetricWalk {
    fn default() -> Self {
        Self { step: 1.0 }
    }
}

impl Dynamics for SymmetricWalk {
    fn name(&self) -> &str {
        "symmetric_walk"
    }

    fn dim(&self) -> usize {
        1
    }

    fn advance(
        &self,
        _grid: &GridSpec,
        _n: usize,
        x: &[f64],
        next: &mut [f64],
        rng: &mut Stream,
    ) -> Result<()> {
        next[0] = if rng.random::<bool>() {
            x[0] + self.step
        } else {
            x[0] - self.step
        };
        Ok(())
    }
}
