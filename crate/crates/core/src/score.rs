//! Score functions `xi(t_n, x)` and their stopping levels `xi_max`.
//!
//! A score function is admissible for the event `Phi(X_N) > a` when
//! `Phi(x) > a` implies `xi(T, x) > xi_max`. The time-dependent family
//! ([`score_new`], [`score_new_schedule`]) takes values in `(-inf, 1]` and
//! reaches `1` exactly on the terminal event; for those the engine's `Z >=
//! xi_max` stopping test plays the role of the strict inequality.

use crate::analytic::{std_normal_cdf, std_normal_sf};
use crate::sde::{GridSpec, ObservableSpec, Path};
use crate::{Error, Result};
use std::fmt;
use std::sync::Arc;

pub type ScoreFn = Arc<dyn Fn(usize, f64, &[f64]) -> f64 + Send + Sync>;

/// Non-decreasing threshold profile `a(t)` with `a(T) = a`.
#[derive(Clone)]
pub enum ThresholdSchedule {
    Constant(f64),
    /// `a(t) = a t / T`.
    LinearRamp { a: f64, horizon: f64 },
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        terminal: f64,
    },
}

impl ThresholdSchedule {
    pub fn linear_ramp(a: f64, grid: &GridSpec) -> Self {
        Self::LinearRamp {
            a,
            horizon: grid.horizon(),
        }
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Constant(a) => *a,
            Self::LinearRamp { a, horizon } => a * (t / horizon),
            Self::Custom { f, .. } => f(t),
        }
    }

    pub fn terminal(&self) -> f64 {
        match self {
            Self::Constant(a) | Self::LinearRamp { a, .. } => *a,
            Self::Custom { terminal, .. } => *terminal,
        }
    }

    /// Checks monotonicity on the grid and `a(T) = a`.
    pub fn validate(&self, grid: &GridSpec, a: f64) -> Result<()> {
        let end = self.value(grid.horizon());
        if (end - a).abs() > 1e-12 * a.abs().max(1.0) || (self.terminal() - a).abs() > 1e-12 * a.abs().max(1.0) {
            return Err(Error::InvalidConfig(format!(
                "schedule ends at {end}, observable threshold is {a}"
            )));
        }
        let mut prev = f64::NEG_INFINITY;
        for n in grid.n0..=grid.n_final {
            let v = self.value(grid.time(n));
            if !(v >= prev) {
                return Err(Error::InvalidConfig(format!(
                    "schedule decreases at time index {n} ({prev} -> {v})"
                )));
            }
            prev = v;
        }
        Ok(())
    }

    fn describe(&self) -> String {
        match self {
            Self::Constant(a) => format!("constant({a})"),
            Self::LinearRamp { a, horizon } => format!("ramp({a} t / {horizon})"),
            Self::Custom { terminal, .. } => format!("custom(-> {terminal})"),
        }
    }
}

/// Which tail the Brownian committor targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// `x > a`
    Upper,
    /// `|x| > a`
    TwoSided,
}

#[derive(Clone)]
enum Kind {
    Std(ObservableSpec),
    New {
        obs: ObservableSpec,
        n_final: f64,
    },
    NewSchedule {
        obs: ObservableSpec,
        sched: ThresholdSchedule,
        n_final: f64,
    },
    CommittorBm {
        obs: ObservableSpec,
        beta: f64,
        horizon: f64,
        tail: Tail,
    },
    Custom(ScoreFn),
}

/// A score function with its stopping level.
#[derive(Clone)]
pub struct ScoreFunction {
    pub name: String,
    pub xi_max: f64,
    /// Terminal index `N` of the grid the score was built for, if it depends on it.
    pub n_final: Option<usize>,
    /// Accept `xi(T, x) = xi_max` on the terminal event (values in `(-inf, xi_max]`).
    pub terminal_equality: bool,
    kind: Kind,
}

impl fmt::Debug for ScoreFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("ScoreFunction");
        s.field("name", &self.name)
            .field("xi_max", &self.xi_max)
            .field("n_final", &self.n_final);
        if let Kind::NewSchedule { sched, .. } = &self.kind {
            s.field("schedule", &sched.describe());
        }
        s.finish_non_exhaustive()
    }
}

impl ScoreFunction {
    /// Arbitrary score; `terminal_equality` as for the built-in time-dependent family.
    pub fn custom(
        name: impl Into<String>,
        xi_max: f64,
        terminal_equality: bool,
        f: impl Fn(usize, f64, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            xi_max,
            n_final: None,
            terminal_equality,
            kind: Kind::Custom(Arc::new(f)),
        }
    }

    /// Same function with a different stopping level.
    pub fn with_xi_max(&self, xi_max: f64) -> Self {
        Self {
            xi_max,
            ..self.clone()
        }
    }

    /// `xi(t_n, x)`; `t` must equal `n dt`.
    #[inline]
    pub fn eval(&self, n: usize, t: f64, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Std(obs) => obs.phi(x),
            Kind::New { obs, n_final } => {
                let phi = obs.phi(x);
                if phi <= obs.threshold {
                    phi - obs.threshold
                } else {
                    n as f64 / n_final
                }
            }
            Kind::NewSchedule {
                obs,
                sched,
                n_final,
            } => {
                let phi = obs.phi(x);
                let level = sched.value(t);
                if phi <= level {
                    phi - level
                } else {
                    n as f64 / n_final
                }
            }
            Kind::CommittorBm {
                obs,
                beta,
                horizon,
                tail,
            } => {
                if Some(n) == self.n_final {
                    return if obs.is_rare(x) { 1.0 } else { 0.0 };
                }
                let s = (2.0 * (horizon - t) / beta).sqrt();
                let a = obs.threshold;
                match tail {
                    Tail::Upper => std_normal_sf((a - x[0]) / s),
                    Tail::TwoSided => std_normal_sf((a - x[0]) / s) + std_normal_cdf((-a - x[0]) / s),
                }
            }
            Kind::Custom(f) => f(n, t, x),
        }
    }

    /// [`eval`](Self::eval), rejecting indices past the terminal index.
    pub fn checked_eval(&self, n: usize, t: f64, x: &[f64]) -> Result<f64> {
        match self.n_final {
            Some(n_final) if n > n_final => Err(Error::IndexOutOfRange {
                index: n,
                n0: 0,
                n_final,
            }),
            _ => Ok(self.eval(n, t, x)),
        }
    }

    /// Whether a terminal value passes the admissibility test.
    pub fn clears(&self, value: f64) -> bool {
        if self.terminal_equality {
            value >= self.xi_max
        } else {
            value > self.xi_max
        }
    }
}

/// `xi(t, x) = Phi(x)`, `xi_max = a`.
pub fn score_std(obs: &ObservableSpec) -> ScoreFunction {
    ScoreFunction {
        name: "std".into(),
        xi_max: obs.threshold,
        n_final: None,
        terminal_equality: false,
        kind: Kind::Std(obs.clone()),
    }
}

/// `xi(t_n, x) = (Phi(x) - a) 1{Phi <= a} + (n / N) 1{Phi > a}`, `xi_max = 1`.
pub fn score_new(obs: &ObservableSpec, grid: &GridSpec) -> ScoreFunction {
    ScoreFunction {
        name: "new".into(),
        xi_max: 1.0,
        n_final: Some(grid.n_final),
        terminal_equality: true,
        kind: Kind::New {
            obs: obs.clone(),
            n_final: grid.n_final as f64,
        },
    }
}

/// Time-dependent score with threshold profile `a(t)` in place of `a`.
pub fn score_new_schedule(
    obs: &ObservableSpec,
    grid: &GridSpec,
    sched: ThresholdSchedule,
) -> Result<ScoreFunction> {
    sched.validate(grid, obs.threshold)?;
    Ok(ScoreFunction {
        name: "new_schedule".into(),
        xi_max: 1.0,
        n_final: Some(grid.n_final),
        terminal_equality: true,
        kind: Kind::NewSchedule {
            obs: obs.clone(),
            sched,
            n_final: grid.n_final as f64,
        },
    })
}

/// Exact committor of `x + sqrt(2/beta) W` for the event at `T`.
///
/// Only meaningful for the one-dimensional Brownian model; the terminal
/// value is the event indicator.
pub fn score_committor_bm(obs: &ObservableSpec, grid: &GridSpec, beta: f64, tail: Tail) -> ScoreFunction {
    ScoreFunction {
        name: "committor_bm".into(),
        xi_max: 1.0,
        n_final: Some(grid.n_final),
        terminal_equality: true,
        kind: Kind::CommittorBm {
            obs: obs.clone(),
            beta,
            horizon: grid.horizon(),
            tail,
        },
    }
}

/// Maximum of `xi` over the stored states of `path`.
pub fn path_score(path: &Path, xi: &ScoreFunction) -> f64 {
    path_score_from(path, xi, path.grid().n0)
}

/// Maximum of `xi` over stored indices `>= start`.
pub fn path_score_from(path: &Path, xi: &ScoreFunction, start: usize) -> f64 {
    let dt = path.grid().dt;
    let mut best = f64::NEG_INFINITY;
    for n in start..=path.last_index() {
        let v = xi.eval(n, n as f64 * dt, path.state(n));
        if v > best {
            best = v;
        }
    }
    best
}

/// Smallest index `m` with `xi(t_m, X_m) > level`.
pub fn first_crossing_index(path: &Path, xi: &ScoreFunction, level: f64) -> Result<usize> {
    let dt = path.grid().dt;
    (path.grid().n0..=path.last_index())
        .find(|&n| xi.eval(n, n as f64 * dt, path.state(n)) > level)
        .ok_or(Error::NoCrossing { level })
}

/// Checks `Phi(x) > a => xi(T, x) > xi_max` on sample states.
///
/// Samples are expected to satisfy `Phi(x) > a`. Scores of the
/// time-dependent family pass with equality.
pub fn validate_admissibility<'a>(
    xi: &ScoreFunction,
    obs: &ObservableSpec,
    grid: &GridSpec,
    samples: impl IntoIterator<Item = &'a [f64]>,
) -> bool {
    let (n, t) = (grid.n_final, grid.horizon());
    let mut seen = false;
    for x in samples {
        seen = true;
        debug_assert!(obs.is_rare(x), "sample is not in the rare set");
        if !xi.clears(xi.eval(n, t, x)) {
            return false;
        }
    }
    seen
}
