//! The adaptive multilevel splitting algorithm.
//!
//! One realization ([`ams_run`]) works on an ensemble of `n_rep` replicas:
//!
//! 1. simulate `n_rep` independent paths and score each by the maximum of
//!    `xi` along it;
//! 2. while the minimal score `Z` is below `xi_max` and not every replica
//!    sits at `Z`: multiply the estimator by `1 - card(K) / n_rep`, where
//!    `K` is the set of replicas scoring exactly `Z`, and replace each of
//!    them by a copy of a uniformly drawn survivor up to its first crossing
//!    of `Z`, followed by a fresh tail;
//! 3. multiply by the fraction of replicas with `Phi(X_N) >= a`.
//!
//! The output is an unbiased estimator of `P(Phi(X_N) > a)` for any
//! admissible score function and any `n_rep`, so independent realizations
//! can simply be averaged ([`run_many`]).

use crate::estimators::{aggregate, EstimateSummary};
use crate::rng::{stream_for, Stream};
use crate::score::{first_crossing_index, path_score_from, ScoreFunction};
use crate::sde::{simulate_path, Dynamics, GridSpec, ObservableSpec, Path};
use crate::{Error, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct AmsConfig {
    pub n_rep: usize,
    pub seed: u64,
    /// Guard against score functions that never let the ensemble reach `xi_max`.
    pub max_iterations: usize,
    /// Event used by the final update.
    pub observable: ObservableSpec,
    /// Keep the per-iteration levels and factors in [`AmsResult::trace`].
    pub record_trace: bool,
}

impl AmsConfig {
    pub fn new(n_rep: usize, observable: ObservableSpec) -> Self {
        Self {
            n_rep,
            seed: 0,
            max_iterations: 10_000_000,
            observable,
            record_trace: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

/// Levels and factors of one realization, in iteration order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AmsTrace {
    /// Level `Z` at which each iteration killed.
    pub levels: Vec<f64>,
    pub kill_counts: Vec<usize>,
    /// `1 - card(K) / n_rep` for each iteration.
    pub factors: Vec<f64>,
    /// Level after the last iteration.
    pub final_level: f64,
}

/// Output of one AMS realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmsResult {
    pub p_hat: f64,
    /// Number of iterations `Q_iter`.
    pub q_iter: usize,
    /// Stopped because every replica had the minimal score.
    pub extinct: bool,
    pub killed_total: usize,
    /// Fraction of replicas with `Phi(X_N) >= a` at the end.
    pub final_fraction: f64,
    /// Product of the iteration factors, i.e. `p_hat` before the final update.
    pub level_product: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<AmsTrace>,
}

/// One trajectory of the ensemble with its score `M = max xi`.
#[derive(Debug, Clone)]
pub struct Replica {
    pub path: Path,
    pub score: f64,
}

/// Interacting replica system between iterations.
pub struct Ensemble<'a> {
    model: &'a dyn Dynamics,
    xi: &'a ScoreFunction,
    replicas: Vec<Replica>,
    level: f64,
    kill_set: Vec<usize>,
    survivors: Vec<usize>,
    iterations: usize,
    killed_total: usize,
    p_hat: f64,
    trace: Option<AmsTrace>,
}

impl<'a> Ensemble<'a> {
    /// Samples `n_rep` independent replicas and computes the first level.
    pub fn initialize(
        model: &'a dyn Dynamics,
        grid: &Arc<GridSpec>,
        xi: &'a ScoreFunction,
        n_rep: usize,
        rng: &mut Stream,
    ) -> Result<Self> {
        if n_rep < 2 {
            return Err(Error::InvalidConfig(format!(
                "n_rep must be at least 2, got {n_rep}"
            )));
        }
        let replicas = (0..n_rep)
            .map(|_| {
                let path = simulate_path(model, grid, rng)?;
                let score = path_score_from(&path, xi, grid.n0);
                Ok(Replica { path, score })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut ens = Self {
            model,
            xi,
            replicas,
            level: f64::NEG_INFINITY,
            kill_set: Vec::new(),
            survivors: Vec::new(),
            iterations: 0,
            killed_total: 0,
            p_hat: 1.0,
            trace: None,
        };
        ens.compute_level();
        Ok(ens)
    }

    fn compute_level(&mut self) {
        self.level = self
            .replicas
            .iter()
            .map(|r| r.score)
            .fold(f64::INFINITY, f64::min);
        self.kill_set.clear();
        self.survivors.clear();
        for (j, r) in self.replicas.iter().enumerate() {
            // Ties are exact: resampled replicas share copied prefixes.
            if r.score == self.level {
                self.kill_set.push(j);
            } else {
                self.survivors.push(j);
            }
        }
    }

    /// Current level `Z`.
    pub fn level(&self) -> f64 {
        self.level
    }

    /// Replicas with score equal to `Z`.
    pub fn kill_set(&self) -> &[usize] {
        &self.kill_set
    }

    pub fn replicas(&self) -> &[Replica] {
        &self.replicas
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Product of the iteration factors so far.
    pub fn p_hat(&self) -> f64 {
        self.p_hat
    }

    pub fn is_extinct(&self) -> bool {
        self.kill_set.len() == self.replicas.len() && !(self.level >= self.xi.xi_max)
    }

    /// `Z >= xi_max` or `card(K) = n_rep`.
    pub fn should_stop(&self) -> bool {
        self.level >= self.xi.xi_max || self.kill_set.len() == self.replicas.len()
    }

    /// One kill/split/resample/level step. Returns the factor applied to `p_hat`.
    pub fn iterate(&mut self, rng: &mut Stream) -> Result<f64> {
        if self.should_stop() {
            return Err(Error::InvalidArgument(
                "iterate called on a stopped ensemble".into(),
            ));
        }
        let n_rep = self.replicas.len();
        let killed = std::mem::take(&mut self.kill_set);
        let factor = 1.0 - killed.len() as f64 / n_rep as f64;
        self.iterations += 1;
        self.p_hat *= factor;
        self.killed_total += killed.len();
        if let Some(trace) = self.trace.as_mut() {
            trace.levels.push(self.level);
            trace.kill_counts.push(killed.len());
            trace.factors.push(factor);
        }

        let level = self.level;
        for &j in &killed {
            let label = self.survivors[rng.random_range(0..self.survivors.len())];
            let (dst, src) = pair_mut(&mut self.replicas, j, label);
            let m = first_crossing_index(&src.path, self.xi, level)?;
            dst.path.copy_prefix_from(&src.path, m)?;
            dst.path.extend_to_end(self.model, rng)?;
            // Scores before m are <= Z < xi(m), so the maximum lies in m..=N.
            dst.score = path_score_from(&dst.path, self.xi, m);
        }
        self.kill_set = killed;
        self.compute_level();
        Ok(factor)
    }

    /// Final update and result.
    pub fn finish(self, observable: &ObservableSpec) -> AmsResult {
        let n_rep = self.replicas.len();
        let hits = self
            .replicas
            .iter()
            .filter(|r| observable.phi(r.path.final_state()) >= observable.threshold)
            .count();
        let final_fraction = hits as f64 / n_rep as f64;
        let extinct = self.is_extinct();
        let trace = self.trace.map(|mut t| {
            t.final_level = self.level;
            t
        });
        AmsResult {
            p_hat: self.p_hat * final_fraction,
            q_iter: self.iterations,
            extinct,
            killed_total: self.killed_total,
            final_fraction,
            level_product: self.p_hat,
            trace,
        }
    }

    fn enable_trace(&mut self) {
        self.trace = Some(AmsTrace::default());
    }
}

fn pair_mut(replicas: &mut [Replica], dst: usize, src: usize) -> (&mut Replica, &Replica) {
    debug_assert_ne!(dst, src);
    if dst < src {
        let (head, tail) = replicas.split_at_mut(src);
        (&mut head[dst], &tail[0])
    } else {
        let (head, tail) = replicas.split_at_mut(dst);
        (&mut tail[0], &head[src])
    }
}

/// Runs one AMS realization with the stream `rng`.
///
/// `xi` must be admissible for `cfg.observable`; see
/// [`validate_admissibility`](crate::score::validate_admissibility).
pub fn ams_run(
    model: &dyn Dynamics,
    grid: &Arc<GridSpec>,
    xi: &ScoreFunction,
    cfg: &AmsConfig,
    rng: &mut Stream,
) -> Result<AmsResult> {
    let mut ens = Ensemble::initialize(model, grid, xi, cfg.n_rep, rng)?;
    if cfg.record_trace {
        ens.enable_trace();
    }
    while !ens.should_stop() {
        if ens.iterations() >= cfg.max_iterations {
            return Err(Error::IterationLimit {
                limit: cfg.max_iterations,
            });
        }
        ens.iterate(rng)?;
    }
    Ok(ens.finish(&cfg.observable))
}

/// Independent realizations with their total compute time.
#[derive(Debug, Clone)]
pub struct Realizations {
    pub results: Vec<AmsResult>,
    /// Elapsed seconds for the whole batch.
    pub wall_time: f64,
}

impl Realizations {
    pub fn summary(&self) -> Result<EstimateSummary> {
        let mut s = aggregate(&self.results)?;
        s.wall_time = self.wall_time;
        Ok(s)
    }

    /// Summary of the level products, i.e. the estimator of
    /// `P(max_n xi(t_n, X_n) >= xi_max)` carried by the same runs.
    pub fn level_summary(&self) -> Result<EstimateSummary> {
        let as_final: Vec<AmsResult> = self
            .results
            .iter()
            .map(|r| AmsResult {
                p_hat: r.level_product,
                ..r.clone()
            })
            .collect();
        let mut s = aggregate(&as_final)?;
        s.wall_time = self.wall_time;
        Ok(s)
    }
}

/// `m` independent realizations; realization `i` uses `stream_for(cfg.seed, i)`.
///
/// Results are ordered by realization index whatever `parallelism` is.
pub fn run_many(
    model: &dyn Dynamics,
    grid: &Arc<GridSpec>,
    xi: &ScoreFunction,
    cfg: &AmsConfig,
    m: usize,
    parallelism: usize,
) -> Result<Realizations> {
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one realization".into()));
    }
    let start = Instant::now();
    let run = |i: usize| ams_run(model, grid, xi, cfg, &mut stream_for(cfg.seed, i as u64));
    let outcomes: Vec<Result<AmsResult>> = if parallelism <= 1 {
        (0..m).map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| (0..m).into_par_iter().map(run).collect())
    };
    let wall_time = start.elapsed().as_secs_f64();

    let mut results = Vec::with_capacity(m);
    let mut failures = Vec::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => failures.push((i, e)),
        }
    }
    if failures.is_empty() {
        Ok(Realizations { results, wall_time })
    } else {
        Err(Error::Realizations(failures))
    }
}
