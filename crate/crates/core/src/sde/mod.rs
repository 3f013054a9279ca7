//! SDE models, the explicit Euler–Maruyama integrator and discrete paths.
//!
//! Every simulation routine works against the [`Dynamics`] trait: a Markov
//! chain on `R^d` advanced one time index at a time. [`ModelSpec`] implements
//! it with Euler–Maruyama; the augmentations in [`augment`] wrap another
//! `Dynamics` and append a derived coordinate.

pub mod augment;
pub mod catalog;
mod path;
pub mod walk;

pub use augment::{augment_temporal_average, TemporalAverage, TimeRatio};
pub use catalog::{builtin_model, BuiltinModel, Params, MODEL_NAMES};
pub use path::Path;

use crate::rng::Stream;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use smallvec::SmallVec;
use std::fmt;
use std::sync::Arc;

/// Drift `f(t, x)` written into `out` (length `dim`).
pub type DriftFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
/// Diffusion `sigma(t, x)` written row-major into `out` (length `dim * noise_dim`).
pub type DiffusionFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
/// Scalar function of the state.
pub type StateFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

type Scratch = SmallVec<[f64; 16]>;

/// A Markov chain on `R^dim` indexed by the time grid.
pub trait Dynamics: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// Writes the state at index `n + 1` into `next`, given the state `x` at
    /// index `n`. Fails with [`Error::IntegrationFailure`] on non-finite output.
    fn advance(
        &self,
        grid: &GridSpec,
        n: usize,
        x: &[f64],
        next: &mut [f64],
        rng: &mut Stream,
    ) -> Result<()>;
}

impl<D: Dynamics + ?Sized> Dynamics for Arc<D> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn advance(
        &self,
        grid: &GridSpec,
        n: usize,
        x: &[f64],
        next: &mut [f64],
        rng: &mut Stream,
    ) -> Result<()> {
        (**self).advance(grid, n, x, next, rng)
    }
}

#[derive(Clone)]
pub enum Diffusion {
    /// State- and time-independent `d x D` matrix, row-major.
    Constant(Vec<f64>),
    Function(DiffusionFn),
}

/// An SDE `dX = f(t, X) dt + sigma(t, X) dW` with `W` a `noise_dim`-dimensional
/// Wiener process.
#[derive(Clone)]
pub struct ModelSpec {
    name: String,
    dim: usize,
    noise_dim: usize,
    drift: DriftFn,
    diffusion: Diffusion,
}

impl ModelSpec {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        noise_dim: usize,
        drift: DriftFn,
        diffusion: Diffusion,
    ) -> Result<Self> {
        if dim == 0 || noise_dim == 0 {
            return Err(Error::InvalidConfig(
                "model dimensions must be positive".into(),
            ));
        }
        if let Diffusion::Constant(m) = &diffusion {
            if m.len() != dim * noise_dim {
                return Err(Error::InvalidConfig(format!(
                    "diffusion matrix has {} entries, expected {}",
                    m.len(),
                    dim * noise_dim
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            dim,
            noise_dim,
            drift,
            diffusion,
        })
    }

    /// One-dimensional model with constant diffusion coefficient.
    pub fn scalar(
        name: impl Into<String>,
        drift: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        sigma: f64,
    ) -> Self {
        let drift: DriftFn = Arc::new(move |t, x, out| out[0] = drift(t, x[0]));
        Self::new(name, 1, 1, drift, Diffusion::Constant(vec![sigma]))
            .expect("scalar model dimensions are valid")
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn drift(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.drift)(t, x, out)
    }

    pub fn diffusion(&self, t: f64, x: &[f64], out: &mut [f64]) {
        match &self.diffusion {
            Diffusion::Constant(m) => out.copy_from_slice(m),
            Diffusion::Function(f) => f(t, x, out),
        }
    }

    /// `out = x + f(t,x) dt + sigma(t,x) sqrt(dt) noise`.
    fn em_step_into(&self, t: f64, x: &[f64], dt: f64, noise: &[f64], out: &mut [f64]) {
        let (d, nd) = (self.dim, self.noise_dim);
        let mut drift: Scratch = SmallVec::from_elem(0.0, d);
        self.drift(t, x, &mut drift);
        let sqrt_dt = dt.sqrt();
        let mut apply = |sigma: &[f64]| {
            for i in 0..d {
                let row = &sigma[i * nd..(i + 1) * nd];
                let kick: f64 = row.iter().zip(noise).map(|(s, z)| s * z).sum();
                out[i] = x[i] + drift[i] * dt + kick * sqrt_dt;
            }
        };
        match &self.diffusion {
            Diffusion::Constant(m) => apply(m),
            Diffusion::Function(f) => {
                let mut sigma: Scratch = SmallVec::from_elem(0.0, d * nd);
                f(t, x, &mut sigma);
                apply(&sigma);
            }
        }
    }
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("noise_dim", &self.noise_dim)
            .finish_non_exhaustive()
    }
}

impl Dynamics for ModelSpec {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn advance(
        &self,
        grid: &GridSpec,
        n: usize,
        x: &[f64],
        next: &mut [f64],
        rng: &mut Stream,
    ) -> Result<()> {
        let mut noise: Scratch = SmallVec::with_capacity(self.noise_dim);
        noise.extend((0..self.noise_dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
        self.em_step_into(grid.time(n), x, grid.dt, &noise, next);
        if next.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::IntegrationFailure { index: n + 1 })
        }
    }
}

/// One explicit Euler–Maruyama step with caller-supplied standard normals.
pub fn em_step(model: &ModelSpec, t: f64, x: &[f64], dt: f64, noise: &[f64]) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step {dt} must be positive")));
    }
    if noise.len() != model.noise_dim || x.len() != model.dim {
        return Err(Error::InvalidArgument(format!(
            "expected state of length {} and noise of length {}",
            model.dim, model.noise_dim
        )));
    }
    let mut out = vec![0.0; model.dim];
    model.em_step_into(t, x, dt, noise, &mut out);
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::IntegrationFailure {
            index: (t / dt).round() as usize + 1,
        })
    }
}

/// Time discretization: `t_n = n dt` for `n0 <= n <= n_final`, started at `x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub dt: f64,
    pub n0: usize,
    pub n_final: usize,
    pub x0: Vec<f64>,
}

impl GridSpec {
    pub fn new(dt: f64, n0: usize, n_final: usize, x0: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("time step {dt} must be positive")));
        }
        if n_final <= n0 {
            return Err(Error::InvalidGrid(format!(
                "final index {n_final} must exceed initial index {n0}"
            )));
        }
        if x0.is_empty() || x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("initial state must be finite and non-empty".into()));
        }
        Ok(Self { dt, n0, n_final, x0 })
    }

    /// Grid on `[0, horizon]`; `horizon / dt` must be an integer up to `1e-9`.
    pub fn from_horizon(dt: f64, horizon: f64, x0: Vec<f64>) -> Result<Self> {
        let ratio = horizon / dt;
        let n = ratio.round();
        if !ratio.is_finite() || (ratio - n).abs() > 1e-9 * ratio.abs().max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "horizon {horizon} is not a multiple of dt {dt}"
            )));
        }
        Self::new(dt, 0, n as usize, x0)
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    /// `T = N dt`.
    pub fn horizon(&self) -> f64 {
        self.time(self.n_final)
    }

    pub fn start_time(&self) -> f64 {
        self.time(self.n0)
    }

    /// Number of grid points, `N - n0 + 1`.
    pub fn len(&self) -> usize {
        self.n_final - self.n0 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn with_x0(&self, x0: Vec<f64>) -> Self {
        Self { x0, ..self.clone() }
    }
}

/// The observable `Phi` and threshold `a` of the event `Phi(X_N) > a`.
#[derive(Clone)]
pub struct ObservableSpec {
    pub name: String,
    phi: StateFn,
    pub threshold: f64,
}

impl ObservableSpec {
    pub fn new(
        name: impl Into<String>,
        phi: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        threshold: f64,
    ) -> Self {
        Self {
            name: name.into(),
            phi: Arc::new(phi),
            threshold,
        }
    }

    /// `Phi(x) = x[i]`.
    pub fn coordinate(i: usize, threshold: f64) -> Self {
        Self::new(format!("x{i}"), move |x: &[f64]| x[i], threshold)
    }

    /// `Phi(x) = |x[i]|`.
    pub fn abs_coordinate(i: usize, threshold: f64) -> Self {
        Self::new(format!("|x{i}|"), move |x: &[f64]| x[i].abs(), threshold)
    }

    #[inline]
    pub fn phi(&self, x: &[f64]) -> f64 {
        (self.phi)(x)
    }

    pub fn phi_fn(&self) -> StateFn {
        Arc::clone(&self.phi)
    }

    /// `Phi(x) > a`.
    pub fn is_rare(&self, x: &[f64]) -> bool {
        self.phi(x) > self.threshold
    }

    pub fn with_threshold(&self, threshold: f64) -> Self {
        Self {
            threshold,
            ..self.clone()
        }
    }
}

impl fmt::Debug for ObservableSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObservableSpec")
            .field("name", &self.name)
            .field("threshold", &self.threshold)
            .finish_non_exhaustive()
    }
}

fn check_dims(model: &dyn Dynamics, grid: &GridSpec) -> Result<()> {
    if grid.x0.len() != model.dim() {
        return Err(Error::InvalidGrid(format!(
            "initial state has length {}, model `{}` has dimension {}",
            grid.x0.len(),
            model.name(),
            model.dim()
        )));
    }
    Ok(())
}

/// Simulates a full path from `(n0, x0)` to `N`.
pub fn simulate_path(model: &dyn Dynamics, grid: &Arc<GridSpec>, rng: &mut Stream) -> Result<Path> {
    check_dims(model, grid)?;
    let mut path = Path::start(Arc::clone(grid), model.dim());
    path.extend_to_end(model, rng)?;
    Ok(path)
}

/// Copies `prefix` and simulates fresh steps from its last index up to `N`.
pub fn resume_path(model: &dyn Dynamics, prefix: &Path, rng: &mut Stream) -> Result<Path> {
    check_dims(model, prefix.grid())?;
    let mut path = prefix.clone();
    path.extend_to_end(model, rng)?;
    Ok(path)
}

/// Final state `X_N` without storing the path.
pub fn simulate_final_state(model: &dyn Dynamics, grid: &GridSpec, rng: &mut Stream) -> Result<Vec<f64>> {
    check_dims(model, grid)?;
    let mut x = grid.x0.clone();
    let mut next = vec![0.0; x.len()];
    for n in grid.n0..grid.n_final {
        model.advance(grid, n, &x, &mut next, rng)?;
        std::mem::swap(&mut x, &mut next);
    }
    Ok(x)
}
