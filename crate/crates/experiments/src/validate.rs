//! Fast self-checks: admissibility of the built-in scores, unbiasedness on the
//! two-step walk, Gaussian moments of a simulated chain, the closed-form
//! columns and the regression on an exact line.

use crate::scenario::build_score;
use crate::tables::analytic_checks;
use ams_core::prelude::*;
use ams_core::sde::walk::SymmetricWalk;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Adds a score that is constant 0 with `xi_max = 1`, which must be rejected.
    pub inject_broken_score: bool,
}

fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Models with small grids covering every catalog entry.
fn probe_models() -> Vec<BuiltinModel> {
    let specs: &[(&str, &[(&str, f64)])] = &[
        ("brownian", &[("beta", 8.0), ("dt", 1e-2)]),
        ("ou", &[("T", 2.0), ("a", 3.0), ("dt", 1e-2)]),
        ("drifted_bm", &[("beta", 1.0)]),
        ("lorenz", &[("T", 1.0)]),
        ("periodic_drift", &[("T", 5.0), ("a", 1.0)]),
        ("periodic_drift", &[("T", 5.0), ("a", 1.0), ("ratio", 1.0)]),
        ("ou_average", &[("T", 2.0), ("a", 0.5), ("dt", 1e-2)]),
    ];
    specs
        .iter()
        .map(|(name, p)| builtin_model(name, &params(p)).expect("probe model builds"))
        .collect()
}

/// Deterministic states around `x0` along coordinate axes and the diagonal,
/// at scales from 0.1 to 1000, keeping those in the rare set.
fn rare_probes(model: &BuiltinModel) -> Vec<Vec<f64>> {
    let x0 = &model.grid.x0;
    let d = x0.len();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; d];
            v[i] = sign;
            dirs.push(v);
        }
    }
    dirs.push(vec![1.0; d]);
    dirs.push(vec![-1.0; d]);
    let scales = [0.1, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0, 1000.0];
    let mut out = Vec::new();
    for v in &dirs {
        for s in scales {
            let x: Vec<f64> = x0.iter().zip(v).map(|(a, b)| a + s * b).collect();
            if model.observable.is_rare(&x) {
                out.push(x);
            }
        }
    }
    out
}

fn admissibility_checks(opts: &ValidateOptions) -> Vec<Check> {
    let mut out = Vec::new();
    for model in probe_models() {
        let probes = rare_probes(&model);
        let mut scores: Vec<ScoreFunction> = ["std", "new", "new_schedule"]
            .iter()
            .map(|k| build_score(k, None, &model).expect("score builds"))
            .collect();
        if model.name == "brownian" {
            scores.push(build_score("committor", None, &model).expect("committor builds"));
        }
        if opts.inject_broken_score && model.name == "brownian" {
            scores.push(ScoreFunction::custom("broken", 1.0, false, |_, _, _| 0.0));
        }
        for xi in scores {
            let ok = validate_admissibility(
                &xi,
                &model.observable,
                &model.grid,
                probes.iter().map(Vec::as_slice),
            );
            out.push(Check {
                name: format!("admissibility {}/{}", model.name, xi.name),
                passed: ok,
                detail: format!("{} rare probe states", probes.len()),
            });
        }
    }
    out
}

fn walk_check(seed: u64) -> Vec<Check> {
    let walk = SymmetricWalk::default();
    let grid = Arc::new(GridSpec::new(1.0, 0, 2, vec![0.0]).expect("walk grid"));
    let obs = ObservableSpec::coordinate(0, 1.5);
    [score_std(&obs), score_new(&obs, &grid)]
        .into_iter()
        .map(|xi| {
            let cfg = AmsConfig::new(5, obs.clone()).with_seed(seed);
            let s = run_many(&walk, &grid, &xi, &cfg, 20_000, 1)
                .and_then(|r| r.summary());
            match s {
                Ok(s) => {
                    let z = (s.mean - 0.25) / s.std_error();
                    Check {
                        name: format!("unbiasedness walk/{}", xi.name),
                        passed: z.abs() < 4.0,
                        detail: format!("mean {:.5} vs 0.25, z = {z:.2}", s.mean),
                    }
                }
                Err(e) => Check {
                    name: format!("unbiasedness walk/{}", xi.name),
                    passed: false,
                    detail: e.to_string(),
                },
            }
        })
        .collect()
}

fn gaussian_check(seed: u64) -> Check {
    let beta = 4.0;
    let model = builtin_model("brownian", &params(&[("beta", beta), ("dt", 1e-2)]))
        .expect("brownian builds");
    let n = 20_000;
    let mut rng = stream_for(seed, 0);
    let xs: Result<Vec<f64>> = (0..n)
        .map(|_| simulate_final_state(model.dynamics.as_ref(), &model.grid, &mut rng).map(|x| x[0]))
        .collect();
    let name = "gaussian law brownian".to_string();
    let xs = match xs {
        Ok(xs) => xs,
        Err(e) => {
            return Check {
                name,
                passed: false,
                detail: e.to_string(),
            }
        }
    };
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let want_var = 2.0 / beta;
    let z_mean = (mean - 0.1) / (want_var / nf).sqrt();
    let z_var = (var - want_var) / (want_var * (2.0 / (nf - 1.0)).sqrt());
    Check {
        name,
        passed: z_mean.abs() < 4.0 && z_var.abs() < 4.0,
        detail: format!("z(mean) = {z_mean:.2}, z(var) = {z_var:.2}"),
    }
}

fn analytic_check() -> Check {
    let checks = analytic_checks();
    let bad: Vec<String> = checks
        .iter()
        .filter(|c| !c.agrees())
        .map(|c| format!("{}: {:.4e} vs {:.4e}", c.label, c.computed, c.printed))
        .collect();
    Check {
        name: "analytic columns".into(),
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{} entries agree to 3 significant digits", checks.len())
        } else {
            bad.join("; ")
        },
    }
}

fn regression_check() -> Check {
    let pts = [(1.0, (-2.0f64).exp()), (2.0, (-4.0f64).exp()), (5.0, (-10.0f64).exp())];
    let name = "rate regression exact line".to_string();
    match rate_regression(1.0, &pts) {
        Ok(fit) => Check {
            name,
            passed: (fit.i_hat - 2.0).abs() < 1e-12 && fit.intercept.abs() < 1e-12,
            detail: format!("slope {:.3e}, intercept {:.3e}", -fit.i_hat, fit.intercept),
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

pub fn run_validation(opts: &ValidateOptions) -> Vec<Check> {
    let mut checks = admissibility_checks(opts);
    checks.extend(walk_check(opts.seed));
    checks.push(gaussian_check(opts.seed));
    checks.push(analytic_check());
    checks.push(regression_check());
    checks
}
