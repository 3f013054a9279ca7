//! Adaptive multilevel splitting (AMS) for tail probabilities of discretized
//! stochastic differential equations.
//!
//! The crate is organised bottom-up:
//!
//! * [`sde`] — models, Euler–Maruyama stepping, paths and state augmentations,
//!   plus the built-in model catalog.
//! * [`score`] — score functions (reaction coordinates) and path scoring.
//! * [`engine`] — one AMS realization and batches of independent realizations.
//! * [`estimators`] — aggregation across realizations, naive Monte Carlo,
//!   rate-function regression and efficiency ratios.
//! * [`analytic`] — closed-form Gaussian references.
//!
//! A minimal end-to-end run:
//!
//! ```
//! use ams_core::prelude::*;
//!
//! let mut params = Params::new();
//! params.insert("beta".into(), 8.0);
//! params.insert("dt".into(), 1e-2);
//! let model = builtin_model("brownian", &params).unwrap();
//! let xi = score_new(&model.observable, &model.grid);
//! let cfg = AmsConfig::new(50, model.observable.clone()).with_seed(7);
//! let batch = run_many(model.dynamics.as_ref(), &model.grid, &xi, &cfg, 20, 1).unwrap();
//! let summary = batch.summary().unwrap();
//! assert!(summary.mean > 0.0 && summary.mean < 1.0);
//! ```

pub mod analytic;
pub mod engine;
mod error;
pub mod estimators;
pub mod rng;
pub mod score;
pub mod sde;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::analytic::{
        analytic_p_brownian, analytic_p_drifted_bm, analytic_p_ou, ou_average_rate_exact,
        std_normal_cdf, std_normal_sf, GaussianLaw,
    };
    pub use crate::engine::{
        ams_run, run_many, AmsConfig, AmsResult, AmsTrace, Ensemble, Realizations, Replica,
    };
    pub use crate::estimators::{
        aggregate, conditional_q, efficiency_ratio, naive_mc, optimal_variance_ref,
        rate_regression, EstimateSummary, RateFit,
    };
    pub use crate::rng::{stream_for, Stream};
    pub use crate::score::{
        first_crossing_index, path_score, score_committor_bm, score_new, score_new_schedule,
        score_std, validate_admissibility, ScoreFunction, Tail, ThresholdSchedule,
    };
    pub use crate::sde::{
        augment_temporal_average, builtin_model, em_step, resume_path, simulate_final_state,
        simulate_path,
        BuiltinModel, Dynamics, GridSpec, ModelSpec, ObservableSpec, Params, Path,
    };
    pub use crate::{Error, Result};
}
