use crate::config::ExperimentConfig;
use crate::error::{ExpError, Result};
use ams_core::prelude::*;

/// A validated configuration with its model and score built.
pub struct Scenario {
    pub name: String,
    pub config: ExperimentConfig,
    pub hash: String,
    pub model: BuiltinModel,
    pub score: ScoreFunction,
}

impl Scenario {
    pub fn build(name: impl Into<String>, config: ExperimentConfig) -> Result<Self> {
        let name = name.into();
        config
            .validate()
            .map_err(|e| ExpError::Config(format!("[{name}] {e}")))?;
        let model = builtin_model(&config.model, &config.params).map_err(|source| {
            ExpError::Scenario {
                name: name.clone(),
                source,
            }
        })?;
        let score = build_score(&config.score, config.schedule.as_deref(), &model).map_err(
            |source| ExpError::Scenario {
                name: name.clone(),
                source,
            },
        )?;
        let hash = config.hash();
        Ok(Self {
            name,
            config,
            hash,
            model,
            score,
        })
    }

    pub fn ams_config(&self) -> AmsConfig {
        AmsConfig::new(self.config.n_rep, self.model.observable.clone()).with_seed(self.config.seed)
    }

    pub fn run(&self) -> Result<Realizations> {
        run_many(
            self.model.dynamics.as_ref(),
            &self.model.grid,
            &self.score,
            &self.ams_config(),
            self.config.samples,
            self.config.threads,
        )
        .map_err(|source| ExpError::Run {
            name: self.name.clone(),
            source,
        })
    }
}

/// Score by name: `std`, `new`, `new_schedule` (with `linear` ramp) or
/// `committor` (Brownian models only).
pub fn build_score(
    kind: &str,
    schedule: Option<&str>,
    model: &BuiltinModel,
) -> ams_core::Result<ScoreFunction> {
    let obs = &model.observable;
    match kind {
        "std" => Ok(score_std(obs)),
        "new" => Ok(score_new(obs, &model.grid)),
        "new_schedule" => {
            let sched = match schedule.unwrap_or("linear") {
                "linear" => ThresholdSchedule::linear_ramp(obs.threshold, &model.grid),
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown schedule `{other}` (known: linear)"
                    )))
                }
            };
            score_new_schedule(obs, &model.grid, sched)
        }
        "committor" => {
            if model.name != "brownian" {
                return Err(Error::InvalidConfig(format!(
                    "the committor score is only available for `brownian`, not `{}`",
                    model.name
                )));
            }
            let beta = model.params["beta"];
            Ok(score_committor_bm(obs, &model.grid, beta, Tail::TwoSided))
        }
        other => Err(Error::InvalidConfig(format!("unknown score `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_every_score_for_brownian() {
        for score in ["std", "new", "new_schedule", "committor"] {
            let mut cfg = ExperimentConfig::new("brownian").with_param("beta", 4.0);
            cfg.score = score.into();
            let s = Scenario::build("bm", cfg).unwrap();
            assert_eq!(s.model.grid.n_final, 1000);
        }
    }

    #[test]
    fn reports_input_problems_as_config_errors() {
        let missing = Scenario::build("x", ExperimentConfig::new("ou"));
        assert_eq!(missing.err().unwrap().exit_code(), 2);
        let mut cfg = ExperimentConfig::new("ou").with_param("T", 1.0).with_param("a", 2.0);
        cfg.score = "committor".into();
        assert_eq!(Scenario::build("x", cfg).err().unwrap().exit_code(), 2);
        let mut cfg = ExperimentConfig::new("drifted_bm").with_param("beta", 1.0);
        cfg.score = "new_schedule".into();
        cfg.schedule = Some("cubic".into());
        assert_eq!(Scenario::build("x", cfg).err().unwrap().exit_code(), 2);
    }
}
