use ams_core::prelude::*;
use ams_core::sde::walk::SymmetricWalk;
use proptest::prelude::*;
use std::sync::Arc;

fn grid(n: usize) -> Arc<GridSpec> {
    Arc::new(GridSpec::new(1.0 / n as f64, 0, n, vec![0.0]).unwrap())
}

fn path_from(values: &[f64]) -> Path {
    Path::from_states(grid(values.len() - 1), 1, values.to_vec()).unwrap()
}

proptest! {
    #[test]
    fn new_score_range(n in 0usize..=50, x in -10.0f64..10.0, a in -2.0f64..2.0) {
        let g = grid(50);
        let xi = score_new(&ObservableSpec::coordinate(0, a), &g);
        let v = xi.eval(n, g.time(n), &[x]);
        prop_assert!(v <= 1.0);
        prop_assert_eq!(v == 1.0, n == 50 && x > a);
    }

    #[test]
    fn new_score_nests_exceedance_events(
        values in prop::collection::vec(-2.0f64..2.0, 2..40),
        a in -1.0f64..1.0,
    ) {
        let path = path_from(&values);
        let n = values.len() - 1;
        let xi = score_new(&ObservableSpec::coordinate(0, a), path.grid());
        let m = path_score(&path, &xi);
        for n1 in 1..=n {
            let lhs = m >= n1 as f64 / n as f64;
            let rhs = values[n1..].iter().any(|&v| v > a);
            prop_assert_eq!(lhs, rhs, "n1 = {}", n1);
        }
    }

    #[test]
    fn path_score_is_naive_maximum(values in prop::collection::vec(-3.0f64..3.0, 2..40)) {
        let path = path_from(&values);
        let obs = ObservableSpec::coordinate(0, 0.5);
        for xi in [score_std(&obs), score_new(&obs, path.grid())] {
            let mut naive = f64::NEG_INFINITY;
            for (n, x) in path.iter() {
                naive = naive.max(xi.eval(n, path.grid().time(n), x));
            }
            prop_assert_eq!(path_score(&path, &xi), naive);
        }
    }

    #[test]
    fn constant_schedule_matches_new_score(n in 0usize..=30, x in -3.0f64..3.0, a in -1.0f64..1.0) {
        let g = grid(30);
        let obs = ObservableSpec::coordinate(0, a);
        let plain = score_new(&obs, &g);
        let sched = score_new_schedule(&obs, &g, ThresholdSchedule::Constant(a)).unwrap();
        prop_assert_eq!(plain.eval(n, g.time(n), &[x]), sched.eval(n, g.time(n), &[x]));
    }

    #[test]
    fn committor_is_monotone(n in 0usize..50, x in -3.0f64..3.0, dx in 0.0f64..1.0) {
        let g = grid(50);
        let xi = score_committor_bm(&ObservableSpec::coordinate(0, 1.0), &g, 2.0, Tail::Upper);
        let t = g.time(n);
        let lo = xi.eval(n, t, &[x]);
        let hi = xi.eval(n, t, &[x + dx]);
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(lo <= hi);
    }
}

fn walk() -> (SymmetricWalk, Arc<GridSpec>, ObservableSpec) {
    let g = Arc::new(GridSpec::new(1.0, 0, 2, vec![0.0]).unwrap());
    (SymmetricWalk::default(), g, ObservableSpec::coordinate(0, 1.5))
}

#[test]
fn walk_estimator_unbiased_for_small_ensembles() {
    let (w, g, obs) = walk();
    for n_rep in [2, 5, 10] {
        for xi in [score_std(&obs), score_new(&obs, &g)] {
            let cfg = AmsConfig::new(n_rep, obs.clone()).with_seed(1000 + n_rep as u64);
            let s = run_many(&w, &g, &xi, &cfg, 100_000, 1).unwrap().summary().unwrap();
            let se = s.std_error();
            assert!(
                (s.mean - 0.25).abs() < 4.0 * se,
                "n_rep {n_rep}, {}: {} +- {se}",
                xi.name,
                s.mean
            );
        }
    }
}

fn ou_case(a: f64) -> (ModelSpec, Arc<GridSpec>, ObservableSpec) {
    let model = ModelSpec::scalar("ou", |_, x| -x, 1.0);
    let g = Arc::new(GridSpec::from_horizon(0.02, 1.0, vec![0.0]).unwrap());
    (model, g, ObservableSpec::coordinate(0, a))
}

#[test]
fn product_structure_is_exact() {
    let (model, g, obs) = ou_case(1.5);
    for xi in [score_std(&obs), score_new(&obs, &g)] {
        let cfg = AmsConfig::new(20, obs.clone()).with_seed(5).with_trace();
        for r in run_many(&model, &g, &xi, &cfg, 50, 1).unwrap().results {
            let trace = r.trace.as_ref().unwrap();
            let mut p = 1.0;
            for f in &trace.factors {
                p *= f;
            }
            assert_eq!(p, r.level_product);
            assert_eq!(p * r.final_fraction, r.p_hat);
            assert_eq!(trace.factors.len(), r.q_iter);
            assert!(trace.levels.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(trace.kill_counts.iter().sum::<usize>(), r.killed_total);
        }
    }
}

#[test]
fn new_score_without_extinction_is_positive() {
    let (model, g, obs) = ou_case(1.5);
    let xi = score_new(&obs, &g);
    let cfg = AmsConfig::new(20, obs).with_seed(6);
    let batch = run_many(&model, &g, &xi, &cfg, 200, 1).unwrap();
    for r in &batch.results {
        if !r.extinct {
            assert_eq!(r.final_fraction, 1.0);
            assert!(r.p_hat > 0.0);
        }
    }
    let s = batch.summary().unwrap();
    if s.extinct_count == 0 {
        assert_eq!(s.r_nonzero, 1.0);
    }
}

#[test]
fn new_score_stopped_at_zero_matches_vanilla_levels() {
    let (model, g, obs) = ou_case(1.2);
    let vanilla = score_std(&obs);
    let truncated = score_new(&obs, &g).with_xi_max(0.0);
    let cfg = AmsConfig::new(20, obs).with_seed(8);
    let stats = |xi: &ScoreFunction| {
        let rs = run_many(&model, &g, xi, &cfg, 1000, 1).unwrap().results;
        let q: Vec<f64> = rs.iter().map(|r| r.q_iter as f64).collect();
        let p: Vec<f64> = rs.iter().map(|r| r.level_product).collect();
        (
            EstimateSummary::from_values(&q, 0, 0.0).unwrap(),
            EstimateSummary::from_values(&p, 0, 0.0).unwrap(),
        )
    };
    let (q_v, p_v) = stats(&vanilla);
    let (q_t, p_t) = stats(&truncated);
    for (label, x, y) in [("q_iter", &q_v, &q_t), ("p_max", &p_v, &p_t)] {
        let se = (x.variance / x.m as f64 + y.variance / y.m as f64).sqrt();
        assert!((x.mean - y.mean).abs() <= 3.0 * se.max(1e-300), "{label}: {} vs {}", x.mean, y.mean);
    }
}

#[test]
fn variance_is_within_twice_the_robustness_bound() {
    // Heuristic smoke check of sigma^2 <= 2 p (1 - p) / n_rep with slack 2.
    let params: Params = [("beta", 4.0), ("dt", 1e-2)]
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
    let model = builtin_model("brownian", &params).unwrap();
    let p = model.reference.unwrap();
    let n_rep = 100;
    for xi in [score_std(&model.observable), score_new(&model.observable, &model.grid)] {
        let cfg = AmsConfig::new(n_rep, model.observable.clone()).with_seed(9);
        let s = run_many(model.dynamics.as_ref(), &model.grid, &xi, &cfg, 300, 1)
            .unwrap()
            .summary()
            .unwrap();
        let bound = 2.0 * p * (1.0 - p) / n_rep as f64 * 2.0;
        assert!(s.variance <= bound, "{}: {} > {bound}", xi.name, s.variance);
    }
}

#[test]
fn aggregate_matches_two_pass_oracle() {
    let (model, g, obs) = ou_case(1.5);
    let xi = score_new(&obs, &g);
    let cfg = AmsConfig::new(10, obs).with_seed(10);
    let rs = run_many(&model, &g, &xi, &cfg, 300, 1).unwrap().results;
    let s = aggregate(&rs).unwrap();
    let n = rs.len() as f64;
    let mean = rs.iter().map(|r| r.p_hat).sum::<f64>() / n;
    let var = rs.iter().map(|r| (r.p_hat - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((s.mean - mean).abs() <= 1e-12 * mean.abs());
    assert!((s.variance - var).abs() <= 1e-12 * var.abs());
    assert!(s.ci_low <= s.mean && s.mean <= s.ci_high);
}

#[test]
fn rate_regression_recovers_synthetic_lines() {
    let (i, c): (f64, f64) = (0.3, -1.2);
    let pts: Vec<(f64, f64)> = [10.0, 20.0, 35.0, 80.0]
        .iter()
        .map(|&t| (t, (c - i * t).exp()))
        .collect();
    let fit = rate_regression(0.7, &pts).unwrap();
    assert!((fit.i_hat - i).abs() < 1e-12);
    assert!((fit.intercept - c).abs() < 1e-12);
}
