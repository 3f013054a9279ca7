use super::{Dynamics, GridSpec};
use crate::rng::Stream;
use crate::{Error, Result};
use std::sync::Arc;

/// A discrete trajectory `(X_n)` for `n0 <= n <= last`, stored row-major.
///
/// A path is *complete* once `last == N`. Incomplete paths are prefixes
/// waiting to be resumed.
#[derive(Debug, Clone)]
pub struct Path {
    grid: Arc<GridSpec>,
    dim: usize,
    states: Vec<f64>,
}

impl PartialEq for Path {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && *self.grid == *other.grid && self.states == other.states
    }
}

impl Path {
    /// Path holding only the initial state `x0`.
    pub fn start(grid: Arc<GridSpec>, dim: usize) -> Self {
        let mut states = Vec::with_capacity(grid.len() * dim);
        states.extend_from_slice(&grid.x0);
        Self { grid, dim, states }
    }

    /// Builds a path from explicit states starting at `n0`.
    pub fn from_states(grid: Arc<GridSpec>, dim: usize, states: Vec<f64>) -> Result<Self> {
        let rows = states.len() / dim.max(1);
        if dim == 0 || states.len() % dim != 0 || rows == 0 || rows > grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values do not form 1..={} rows of dimension {dim}",
                states.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, dim, states })
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest stored time index.
    pub fn last_index(&self) -> usize {
        self.grid.n0 + self.states.len() / self.dim - 1
    }

    pub fn is_complete(&self) -> bool {
        self.last_index() == self.grid.n_final
    }

    /// State at absolute time index `n`.
    ///
    /// Panics if `n` is not stored.
    #[inline]
    pub fn state(&self, n: usize) -> &[f64] {
        let row = n - self.grid.n0;
        &self.states[row * self.dim..(row + 1) * self.dim]
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.last_index())
    }

    /// `(n, X_n)` for every stored index.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> + '_ {
        let n0 = self.grid.n0;
        self.states
            .chunks_exact(self.dim)
            .enumerate()
            .map(move |(i, s)| (n0 + i, s))
    }

    /// Keeps states `n0..=m` only.
    pub fn truncate(&mut self, m: usize) -> Result<()> {
        if m < self.grid.n0 || m > self.last_index() {
            return Err(Error::IndexOutOfRange {
                index: m,
                n0: self.grid.n0,
                n_final: self.last_index(),
            });
        }
        self.states.truncate((m - self.grid.n0 + 1) * self.dim);
        Ok(())
    }

    /// Overwrites `self` with the states `n0..=m` of `other`.
    pub fn copy_prefix_from(&mut self, other: &Path, m: usize) -> Result<()> {
        if m < other.grid.n0 || m > other.last_index() {
            return Err(Error::IndexOutOfRange {
                index: m,
                n0: other.grid.n0,
                n_final: other.last_index(),
            });
        }
        let len = (m - other.grid.n0 + 1) * other.dim;
        self.states.clear();
        self.states.extend_from_slice(&other.states[..len]);
        self.dim = other.dim;
        if !Arc::ptr_eq(&self.grid, &other.grid) {
            self.grid = Arc::clone(&other.grid);
        }
        Ok(())
    }

    /// Simulates fresh steps from the last stored index up to `N`.
    pub fn extend_to_end(&mut self, model: &dyn Dynamics, rng: &mut Stream) -> Result<()> {
        let d = self.dim;
        let grid = Arc::clone(&self.grid);
        let target = grid.len() * d;
        self.states.reserve_exact(target - self.states.len());
        while self.states.len() < target {
            let start = self.states.len() - d;
            let n = grid.n0 + start / d;
            self.states.resize(start + 2 * d, 0.0);
            let (head, tail) = self.states.split_at_mut(start + d);
            model.advance(&grid, n, &head[start..], tail, rng)?;
        }
        Ok(())
    }
}
