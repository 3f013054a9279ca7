//! Built-in models with their default observables and grids.
//!
//! | name             | dynamics                                   | event                 |
//! |------------------|--------------------------------------------|-----------------------|
//! | `brownian`       | `dX = sqrt(2/beta) dW`                     | `abs(X_T) > a`        |
//! | `ou`             | `dX = -X dt + sqrt(2/beta) dW`             | `X_T > a`             |
//! | `drifted_bm`     | `dX = -alpha dt + sqrt(2/beta) dW`         | `X_T > a`             |
//! | `lorenz`         | stochastic Lorenz-63, noise on `x1`        | ellipsoid exit        |
//! | `periodic_drift` | `dX = (-V'(X) + gamma) dt + sqrt(2) dW`    | `X_T > a T`           |
//! | `ou_average`     | OU plus running time average               | `Y_T > a`             |
//!
//! Every parameter can be overridden through the [`Params`] map. `T`, `dt`,
//! `a` and (for scalar models) `x0` shape the grid and observable.

use super::augment::{TemporalAverage, TimeRatio};
use super::{Diffusion, DriftFn, Dynamics, GridSpec, ModelSpec, ObservableSpec};
use crate::analytic::{brownian_law, drifted_bm_law, ou_law};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

pub type Params = BTreeMap<String, f64>;

pub const MODEL_NAMES: &[&str] = &[
    "brownian",
    "ou",
    "drifted_bm",
    "lorenz",
    "periodic_drift",
    "ou_average",
];

/// A ready-to-run scenario: dynamics, event and time grid.
#[derive(Clone)]
pub struct BuiltinModel {
    pub name: String,
    pub dynamics: Arc<dyn Dynamics>,
    pub observable: ObservableSpec,
    pub grid: Arc<GridSpec>,
    /// Parameters after defaults were applied.
    pub params: Params,
    /// Exact continuous-time probability, for the Gaussian models.
    pub reference: Option<f64>,
}

impl std::fmt::Debug for BuiltinModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BuiltinModel")
            .field("name", &self.name)
            .field("observable", &self.observable)
            .field("grid", &self.grid)
            .field("params", &self.params)
            .field("reference", &self.reference)
            .finish_non_exhaustive()
    }
}

struct Lookup<'a> {
    model: &'a str,
    given: &'a Params,
    resolved: Params,
}

impl<'a> Lookup<'a> {
    fn new(model: &'a str, given: &'a Params) -> Self {
        Self {
            model,
            given,
            resolved: Params::new(),
        }
    }

    fn or(&mut self, key: &str, default: f64) -> f64 {
        let v = self.given.get(key).copied().unwrap_or(default);
        self.resolved.insert(key.to_string(), v);
        v
    }

    fn required(&mut self, key: &str) -> Result<f64> {
        let v = self.given.get(key).copied().ok_or_else(|| Error::MissingParameter {
            model: self.model.to_string(),
            key: key.to_string(),
        })?;
        self.resolved.insert(key.to_string(), v);
        Ok(v)
    }

    fn positive(&mut self, key: &str, v: f64) -> Result<f64> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidConfig(format!(
                "{}: parameter `{key}` must be positive, got {v}",
                self.model
            )))
        }
    }
}

fn sigma_from_beta(beta: f64) -> f64 {
    (2.0 / beta).sqrt()
}

/// Looks up `name` in the catalog and applies `params` over its defaults.
pub fn builtin_model(name: &str, params: &Params) -> Result<BuiltinModel> {
    let mut p = Lookup::new(name, params);
    let model = match name {
        "brownian" => {
            let beta = p.required("beta")?;
            let beta = p.positive("beta", beta)?;
            let x0 = p.or("x0", 0.1);
            let dt = p.or("dt", 1e-3);
            let t = p.or("T", 1.0);
            let a = p.or("a", 1.0);
            let dynamics: Arc<dyn Dynamics> =
                Arc::new(ModelSpec::scalar("brownian", |_, _| 0.0, sigma_from_beta(beta)));
            BuiltinModel {
                name: name.into(),
                dynamics,
                observable: ObservableSpec::abs_coordinate(0, a),
                grid: Arc::new(GridSpec::from_horizon(dt, t, vec![x0])?),
                params: Params::new(),
                reference: Some(brownian_law(beta, x0, t).two_sided_tail(a)),
            }
        }
        "ou" => {
            let beta = p.or("beta", 2.0);
            let beta = p.positive("beta", beta)?;
            let x0 = p.or("x0", 0.0);
            let dt = p.or("dt", 1e-3);
            let t = p.required("T")?;
            let a = p.required("a")?;
            let dynamics: Arc<dyn Dynamics> =
                Arc::new(ModelSpec::scalar("ou", |_, x| -x, sigma_from_beta(beta)));
            BuiltinModel {
                name: name.into(),
                dynamics,
                observable: ObservableSpec::coordinate(0, a),
                grid: Arc::new(GridSpec::from_horizon(dt, t, vec![x0])?),
                params: Params::new(),
                reference: Some(ou_law(beta, x0, t).upper_tail(a)),
            }
        }
        "drifted_bm" => {
            let alpha = p.or("alpha", 4.0);
            let beta = p.required("beta")?;
            let beta = p.positive("beta", beta)?;
            let x0 = p.or("x0", 0.0);
            let dt = p.or("dt", 1e-2);
            let t = p.or("T", 1.0);
            let a = p.or("a", 1.0);
            let dynamics: Arc<dyn Dynamics> = Arc::new(ModelSpec::scalar(
                "drifted_bm",
                move |_, _| -alpha,
                sigma_from_beta(beta),
            ));
            BuiltinModel {
                name: name.into(),
                dynamics,
                observable: ObservableSpec::coordinate(0, a),
                grid: Arc::new(GridSpec::from_horizon(dt, t, vec![x0])?),
                params: Params::new(),
                reference: Some(drifted_bm_law(alpha, beta, x0, t).upper_tail(a)),
            }
        }
        "lorenz" => {
            let sigma = p.or("sigma", 3.0);
            let r = p.or("r", 26.0);
            let b = p.or("b", 1.0);
            // sqrt(2 / beta) = 3
            let beta = p.or("beta", 2.0 / 9.0);
            let beta = p.positive("beta", beta)?;
            let dt = p.or("dt", 1e-2);
            let t = p.required("T")?;
            let a = p.or("a", 1.0);
            let eq = (b * (r - 1.0)).sqrt();
            let x0 = vec![eq + 0.5, eq + 0.5, r - 1.0 + 0.5];
            let drift: DriftFn = Arc::new(move |_, x, out| {
                out[0] = sigma * (x[1] - x[0]);
                out[1] = r * x[0] - x[1] - x[0] * x[2];
                out[2] = x[0] * x[1] - b * x[2];
            });
            let noise = sigma_from_beta(beta);
            let dynamics: Arc<dyn Dynamics> = Arc::new(ModelSpec::new(
                "lorenz",
                3,
                1,
                drift,
                Diffusion::Constant(vec![noise, 0.0, 0.0]),
            )?);
            BuiltinModel {
                name: name.into(),
                dynamics,
                observable: lorenz_observable(sigma, r, b, a),
                grid: Arc::new(GridSpec::from_horizon(dt, t, x0)?),
                params: Params::new(),
                reference: None,
            }
        }
        "periodic_drift" => {
            let gamma = p.or("gamma", 1.0);
            let x0 = p.or("x0", 0.0);
            let dt = p.or("dt", 1e-2);
            let t = p.required("T")?;
            let a = p.required("a")?;
            let ratio = p.or("ratio", 0.0) != 0.0;
            // -V'(x) + gamma with V(x) = cos(2 pi x)
            let base: Arc<dyn Dynamics> = Arc::new(ModelSpec::scalar(
                "periodic_drift",
                move |_, x| 2.0 * PI * (2.0 * PI * x).sin() + gamma,
                2f64.sqrt(),
            ));
            let (dynamics, observable, start): (Arc<dyn Dynamics>, _, _) = if ratio {
                let r = TimeRatio::new(base, Arc::new(|x: &[f64]| x[0]));
                let start = r.initial_state(&[x0], 0.0);
                (Arc::new(r), ObservableSpec::coordinate(1, a), start)
            } else {
                (base, ObservableSpec::coordinate(0, a * t), vec![x0])
            };
            BuiltinModel {
                name: name.into(),
                dynamics,
                observable,
                grid: Arc::new(GridSpec::from_horizon(dt, t, start)?),
                params: Params::new(),
                reference: None,
            }
        }
        "ou_average" => {
            let beta = p.or("beta", 1.0);
            let beta = p.positive("beta", beta)?;
            let x0 = p.or("x0", 0.0);
            let dt = p.or("dt", 5e-3);
            let t = p.required("T")?;
            let a = p.required("a")?;
            let ou: Arc<dyn Dynamics> =
                Arc::new(ModelSpec::scalar("ou", |_, x| -x, sigma_from_beta(beta)));
            let avg = TemporalAverage::new(ou, Arc::new(|x: &[f64]| x[0]));
            let start = avg.initial_state(&[x0]);
            BuiltinModel {
                name: name.into(),
                dynamics: Arc::new(avg),
                observable: ObservableSpec::coordinate(1, a),
                grid: Arc::new(GridSpec::from_horizon(dt, t, start)?),
                params: Params::new(),
                reference: None,
            }
        }
        other => return Err(Error::UnknownModel(other.to_string())),
    };
    Ok(BuiltinModel {
        params: p.resolved,
        ..model
    })
}

/// Ellipsoid observable of the Lorenz system; `Phi <= 1` on the deterministic
/// orbit from `x* + (1/2, 1/2, 1/2)`.
pub fn lorenz_observable(sigma: f64, r: f64, b: f64, a: f64) -> ObservableSpec {
    let s2 = (r + sigma) * (r + sigma);
    ObservableSpec::new(
        "lorenz_ellipsoid",
        move |x: &[f64]| {
            x[0] * x[0] / (s2 * b / sigma) + x[1] * x[1] / (s2 * b) + (x[2] - (r + sigma)).powi(2) / s2
        },
        a,
    )
}
