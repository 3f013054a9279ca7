//! End-to-end acceptance checks, one `[PASS]`/`[FAIL]` line per criterion.
//!
//! Run all of them with `cargo test --release --test acceptance`, or pass
//! criterion ids (`C3 C5`) to select a subset. Seeds are fixed up front.

use ams_core::prelude::*;
use ams_core::sde::walk::SymmetricWalk;
use ams_experiments::config::ExperimentConfig;
use ams_experiments::scenario::Scenario;
use ams_experiments::tables::{analytic_checks, LORENZ, PERIODIC, PERIODIC_RATES};
use rand::Rng;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

const SEED: u64 = 7_310_000;

type Outcome = std::result::Result<String, String>;

fn run(
    model: &str,
    score: &str,
    n_rep: usize,
    samples: usize,
    params: &[(&str, f64)],
    seed: u64,
) -> (Scenario, Realizations) {
    let mut cfg = ExperimentConfig::new(model);
    cfg.score = score.into();
    cfg.n_rep = n_rep;
    cfg.samples = samples;
    cfg.seed = seed;
    for &(k, v) in params {
        cfg.params.insert(k.into(), v);
    }
    let scenario = Scenario::build(format!("{model}/{score}"), cfg).expect("valid scenario");
    let batch = scenario.run().expect("run succeeds");
    (scenario, batch)
}

fn summarize(batch: &Realizations) -> EstimateSummary {
    batch.summary().expect("non-empty batch")
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1() -> Outcome {
    let checks = analytic_checks();
    let bad: Vec<String> = checks
        .iter()
        .filter(|c| !c.agrees())
        .map(|c| format!("{}: {:.4e} vs {:.3e}", c.label, c.computed, c.printed))
        .collect();
    verdict(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} closed-form entries agree to 3 significant digits", checks.len())
        } else {
            bad.join("; ")
        },
    )
}

fn c2() -> Outcome {
    let grid = Arc::new(GridSpec::new(1.0, 0, 2, vec![0.0]).unwrap());
    let obs = ObservableSpec::coordinate(0, 1.5);
    let walk = SymmetricWalk::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, n_rep) in [2usize, 5, 10].into_iter().enumerate() {
        for (s, xi) in [score_std(&obs), score_new(&obs, &grid)].into_iter().enumerate() {
            let cfg = AmsConfig::new(n_rep, obs.clone()).with_seed(SEED + 10 * k as u64 + s as u64);
            let sum = summarize(&run_many(&walk, &grid, &xi, &cfg, 100_000, 1).unwrap());
            let z = (sum.mean - 0.25) / sum.std_error();
            ok &= z.abs() <= 4.0;
            parts.push(format!("n_rep={n_rep} {}: {:.5} (z={z:+.2})", xi.name, sum.mean));
        }
    }
    verdict(ok, parts.join(", "))
}

fn c3() -> Outcome {
    let rows = [(2.0, 1.256e-3), (8.0, 1.030e-4), (16.0, 4.449e-6), (32.0, 1.052e-8)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, (beta, var_ref)) in rows.into_iter().enumerate() {
        let (scn, batch) = run("brownian", "new", 100, 1000, &[("beta", beta)], SEED + 100 + k as u64);
        let s = summarize(&batch);
        let p = scn.model.reference.unwrap();
        let bias_ok = (s.mean - p).abs() <= 3.0 * s.variance.sqrt() / (s.m as f64).sqrt();
        let ratio = s.variance / var_ref;
        let var_ok = (0.2..=5.0).contains(&ratio);
        ok &= bias_ok && var_ok;
        parts.push(format!(
            "beta={beta}: {:.4e} vs {:.4e}{}, var ratio {ratio:.2}{}",
            s.mean,
            p,
            if bias_ok { "" } else { " (BIAS)" },
            if var_ok { "" } else { " (VAR)" }
        ));
    }
    verdict(ok, parts.join(", "))
}

fn c4() -> Outcome {
    let (_, batch) = run("brownian", "new", 100, 1000, &[("beta", 64.0)], SEED + 200);
    let s = summarize(&batch);
    let half = (s.ci_high - s.ci_low) / 2.0;
    let dev = (s.mean - 1.782e-7).abs() / half;
    let zeros = batch.results.iter().filter(|r| !(r.p_hat > 0.0)).count();
    verdict(
        dev <= 3.0 && zeros == 0,
        format!("mean {:.4e}, {dev:.2} half-widths from 1.782e-7, {zeros} zero estimates", s.mean),
    )
}

fn c5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, a) in [2.8, 3.0, 3.2].into_iter().enumerate() {
        let params = [("T", 2.0), ("a", a)];
        let seed = SEED + 300 + 2 * k as u64;
        let (scn, new_batch) = run("ou", "new", 100, 1000, &params, seed);
        let (_, std_batch) = run("ou", "std", 100, 1000, &params, seed + 1);
        let p = ams_core::analytic::analytic_p_ou(2.0, a);
        debug_assert!((p - scn.model.reference.unwrap()).abs() <= 1e-12 * p);
        let new = summarize(&new_batch);
        let std = summarize(&std_batch);
        let q = conditional_q(&new, &std_batch.level_summary().unwrap()).unwrap();
        let row_ok = new.contains(p) && std.contains(p) && (q - 0.07).abs() <= 0.02;
        ok &= row_ok;
        parts.push(format!(
            "a={a}: p={p:.3e} new [{:.3e},{:.3e}] std [{:.3e},{:.3e}] q={q:.3}",
            new.ci_low, new.ci_high, std.ci_low, std.ci_high
        ));
    }
    verdict(ok, parts.join("; "))
}

fn c6() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for beta in 1..=4 {
        let (_, batch) = run("drifted_bm", "new", 1000, 100, &[("beta", beta as f64)], SEED + 400 + beta);
        let s = summarize(&batch);
        ok &= s.r_nonzero == 1.0 && s.extinct_count == 0;
        parts.push(format!("new beta={beta}: r={} extinct={}", s.r_nonzero, s.extinct_count));
    }
    let (_, batch) = run("drifted_bm", "std", 1000, 1000, &[("beta", 4.0)], SEED + 410);
    let s = summarize(&batch);
    ok &= s.r_nonzero < 0.2;
    parts.push(format!("std beta=4: r={:.3}", s.r_nonzero));
    verdict(ok, parts.join(", "))
}

fn c7() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, a) in [0.4, 0.6, 0.8].into_iter().enumerate() {
        let mut points = Vec::new();
        for (j, t) in [25.0, 50.0, 100.0].into_iter().enumerate() {
            let seed = SEED + 500 + 10 * i as u64 + j as u64;
            let (_, batch) = run("ou_average", "new", 1000, 20, &[("T", t), ("a", a)], seed);
            points.push((t, summarize(&batch).mean));
        }
        let exact = a * a / 4.0;
        match rate_regression(a, &points) {
            Ok(fit) => {
                let rel = (fit.i_hat - exact).abs() / exact;
                ok &= rel <= 0.25;
                parts.push(format!("a={a}: I={:.4} vs {exact:.4} ({:.1}%)", fit.i_hat, 100.0 * rel));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("a={a}: fit failed: {e}"));
            }
        }
    }
    verdict(ok, parts.join(", "))
}

fn c8() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, t) in [5.0, 10.0].into_iter().enumerate() {
        let &(_, _, lo, hi, _) = LORENZ.iter().find(|r| r.0 == t).unwrap();
        let (_, batch) = run("lorenz", "new", 1000, 500, &[("T", t)], SEED + 600 + k as u64);
        let s = summarize(&batch);
        let overlap = s.ci_low <= hi && lo <= s.ci_high;
        ok &= overlap;
        parts.push(format!(
            "T={t}: [{:.4e},{:.4e}] vs [{lo:.4e},{hi:.4e}]",
            s.ci_low, s.ci_high
        ));
    }
    verdict(ok, parts.join(", "))
}

fn periodic(ratio: f64, a: f64, t: f64, seed: u64) -> EstimateSummary {
    let params = [("T", t), ("a", a), ("ratio", ratio)];
    summarize(&run("periodic_drift", "new", 1000, 50, &params, seed).1)
}

fn c9a() -> Outcome {
    let &(_, _, _, _, _, vx, vy, _) = PERIODIC.iter().find(|r| r.0 == 1.0 && r.1 == 50.0).unwrap();
    let target = vx / vy;
    let x = periodic(0.0, 1.0, 50.0, SEED + 700);
    let y = periodic(1.0, 1.0, 50.0, SEED + 701);
    let ratio = x.variance / y.variance;
    verdict(
        (target / 3.0..=target * 3.0).contains(&ratio),
        format!(
            "var X {:.3e} / var Y {:.3e} = {ratio:.2} vs {target:.2}",
            x.variance, y.variance
        ),
    )
}

fn c9b() -> Outcome {
    let a = 1.25;
    let expected = PERIODIC_RATES.iter().find(|r| r.0 == a).unwrap().1;
    let points: Vec<(f64, f64)> = [50.0, 100.0]
        .into_iter()
        .enumerate()
        .map(|(k, t)| (t, periodic(1.0, a, t, SEED + 710 + k as u64).mean))
        .collect();
    let fit = rate_regression(a, &points).map_err(|e| format!("fit failed: {e}"))?;
    let rel = (fit.i_hat - expected).abs() / expected;
    // Large-deviation rate of the driven diffusion computed independently by
    // a tilted-generator eigenvalue; reported for context only.
    let true_rate = 0.1424;
    verdict(
        rel <= 0.20,
        format!(
            "I(1.25)={:.4} vs {expected} ({:.1}%); p(50)={:.3e} p(100)={:.3e}; true rate {true_rate} ({:+.1}%)",
            fit.i_hat,
            100.0 * rel,
            points[0].1,
            points[1].1,
            100.0 * (fit.i_hat - true_rate) / true_rate
        ),
    )
}

// ---------------------------------------------------------------------------
// Property suite.

fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn prop_scores(seed: u64) -> std::result::Result<(), String> {
    let mut rng = stream_for(seed, 0);
    for case in 0..2000 {
        let n = rng.random_range(1..40usize);
        let a = rng.random_range(-1.0..1.0);
        let values: Vec<f64> = (0..=n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let grid = Arc::new(GridSpec::new(1.0 / n as f64, 0, n, vec![values[0]]).unwrap());
        let path = Path::from_states(Arc::clone(&grid), 1, values.clone()).unwrap();
        let obs = ObservableSpec::coordinate(0, a);
        let xi = score_new(&obs, &grid);
        for (k, &x) in values.iter().enumerate() {
            let v = xi.eval(k, grid.time(k), &[x]);
            check(v <= 1.0 && ((v == 1.0) == (k == n && x > a)), || {
                format!("case {case}: score_new({k}, {x}) = {v} out of range")
            })?;
        }
        let m = path_score(&path, &xi);
        for n1 in 1..=n {
            let lhs = m >= n1 as f64 / n as f64;
            let rhs = values[n1..].iter().any(|&v| v > a);
            check(lhs == rhs, || format!("case {case}: nesting fails at n1={n1}"))?;
        }
        for score in [score_std(&obs), xi] {
            let naive = path
                .iter()
                .map(|(k, x)| score.eval(k, grid.time(k), x))
                .fold(f64::NEG_INFINITY, f64::max);
            check(path_score(&path, &score) == naive, || {
                format!("case {case}: path score of {} is not the running maximum", score.name)
            })?;
        }
    }
    Ok(())
}

fn ou_case() -> (ModelSpec, Arc<GridSpec>, ObservableSpec) {
    let model = ModelSpec::scalar("ou", |_, x| -x, 1.0);
    let grid = Arc::new(GridSpec::from_horizon(0.02, 1.0, vec![0.0]).unwrap());
    (model, grid, ObservableSpec::coordinate(0, 1.5))
}

fn prop_levels_and_products(seed: u64) -> std::result::Result<(), String> {
    let (model, grid, obs) = ou_case();
    for xi in [score_std(&obs), score_new(&obs, &grid)] {
        let cfg = AmsConfig::new(20, obs.clone()).with_seed(seed).with_trace();
        for (i, r) in run_many(&model, &grid, &xi, &cfg, 100, 1)
            .map_err(|e| e.to_string())?
            .results
            .iter()
            .enumerate()
        {
            let trace = r.trace.as_ref().unwrap();
            check(trace.levels.windows(2).all(|w| w[0] < w[1]), || {
                format!("{} realization {i}: levels not increasing", xi.name)
            })?;
            let product: f64 = trace.factors.iter().product();
            check(product == r.level_product && product * r.final_fraction == r.p_hat, || {
                format!("{} realization {i}: p_hat is not the product of its factors", xi.name)
            })?;
            check(
                trace.factors.len() == r.q_iter
                    && trace.kill_counts.iter().sum::<usize>() == r.killed_total,
                || format!("{} realization {i}: trace counts disagree", xi.name),
            )?;
        }
    }
    Ok(())
}

fn prop_kill_sets(seed: u64) -> std::result::Result<(), String> {
    let (model, grid, obs) = ou_case();
    let xi = score_new(&obs, &grid);
    let n_rep = 20;
    for run in 0..50 {
        let mut rng = stream_for(seed, run);
        let mut ens = Ensemble::initialize(&model, &grid, &xi, n_rep, &mut rng).map_err(|e| e.to_string())?;
        while !ens.should_stop() {
            let z = ens.level();
            let scores: Vec<f64> = ens.replicas().iter().map(|r| r.score).collect();
            for (j, r) in ens.replicas().iter().enumerate() {
                check(r.score == path_score(&r.path, &xi), || {
                    format!("run {run}: cached score of replica {j} is stale")
                })?;
            }
            let expected: Vec<usize> = (0..n_rep).filter(|&j| scores[j] == z).collect();
            check(ens.kill_set() == expected.as_slice(), || {
                format!("run {run}: kill set {:?} != {expected:?}", ens.kill_set())
            })?;
            check(scores.iter().all(|&s| s >= z), || format!("run {run}: level is not the minimum"))?;
            let factor = ens.iterate(&mut rng).map_err(|e| e.to_string())?;
            check(factor == 1.0 - expected.len() as f64 / n_rep as f64, || {
                format!("run {run}: factor {factor} does not match |K|={}", expected.len())
            })?;
            for (j, r) in ens.replicas().iter().enumerate() {
                let kept = !expected.contains(&j);
                check(if kept { r.score == scores[j] } else { r.score > z }, || {
                    format!("run {run}: replica {j} violates the resampling rule")
                })?;
            }
        }
    }
    Ok(())
}

fn prop_resume(seed: u64) -> std::result::Result<(), String> {
    let (model, grid, _) = ou_case();
    let samples = 10_000;
    let mut rng = stream_for(seed, 1);
    let direct: Vec<f64> = (0..samples)
        .map(|_| simulate_path(&model, &grid, &mut rng).unwrap().final_state()[0])
        .collect();
    let mut rng = stream_for(seed, 2);
    let spliced: Vec<f64> = (0..samples)
        .map(|k| {
            let mut prefix = simulate_path(&model, &grid, &mut rng).unwrap();
            prefix.truncate(k % grid.n_final).unwrap();
            resume_path(&model, &prefix, &mut rng).unwrap().final_state()[0]
        })
        .collect();
    let d = ks_statistic(direct, spliced);
    let crit = 1.628 * (2.0 / samples as f64).sqrt();
    check(d < crit, || format!("KS statistic {d:.4} >= {crit:.4}"))
}

fn prop_regression(seed: u64) -> std::result::Result<(), String> {
    let mut rng = stream_for(seed, 3);
    for case in 0..500 {
        let rate = rng.random_range(1e-3..2.0);
        let c = rng.random_range(-5.0..5.0);
        let n = rng.random_range(2..8usize);
        let points: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let t = 10.0 * (k + 1) as f64 + rng.random_range(0.0..5.0);
                (t, (c - rate * t).exp())
            })
            .collect();
        let fit = rate_regression(0.0, &points).map_err(|e| e.to_string())?;
        check(
            (fit.i_hat - rate).abs() <= 1e-9 * rate.max(1.0) && (fit.intercept - c).abs() <= 1e-8,
            || format!("case {case}: recovered ({}, {}) for ({rate}, {c})", fit.i_hat, fit.intercept),
        )?;
    }
    Ok(())
}

fn c10() -> Outcome {
    let props: [(&str, fn(u64) -> std::result::Result<(), String>); 5] = [
        ("scores", prop_scores),
        ("levels/products", prop_levels_and_products),
        ("kill sets", prop_kill_sets),
        ("resume KS", prop_resume),
        ("regression", prop_regression),
    ];
    let mut failures = Vec::new();
    for seed in [SEED, SEED + 1, SEED + 2] {
        for (name, prop) in props {
            if let Err(e) = prop(seed) {
                failures.push(format!("{name} (seed {seed}): {e}"));
            }
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} properties x 3 seeds", props.len())
        } else {
            failures.join("; ")
        },
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Outcome); 11] = [
        ("C1", "closed-form probabilities", c1),
        ("C2", "unbiasedness on the two-step walk", c2),
        ("C3", "brownian, n_rep=100, M=1000", c3),
        ("C4", "brownian deep tail beta=64", c4),
        ("C5", "OU T=2, std vs new, conditional q", c5),
        ("C6", "drifted BM nonzero output", c6),
        ("C7", "OU time-average rate function", c7),
        ("C8", "stochastic Lorenz", c8),
        ("C9a", "periodic diffusion variance ratio X/Y", c9a),
        ("C9b", "periodic diffusion rate I(1.25)", c9b),
        ("C10", "property suite", c10),
    ];
    let selected: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .map(|a| a.to_uppercase())
        .collect();
    let mut failed = 0;
    for (id, label, criterion) in criteria {
        // `C9` selects both `C9a` and `C9b`.
        let matches = |s: &String| {
            id.strip_prefix(s.as_str())
                .is_some_and(|rest| rest.chars().all(|c| c.is_ascii_lowercase()))
        };
        if !selected.is_empty() && !selected.iter().any(matches) {
            continue;
        }
        let start = Instant::now();
        let outcome = criterion();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {id} {label}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {id} {label}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
