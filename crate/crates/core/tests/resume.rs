//! Splicing a prefix with a resumed tail must not change the law of X_N.

use ams_core::prelude::*;
use std::sync::Arc;

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

#[test]
fn resumed_paths_have_the_same_terminal_law() {
    let model = ModelSpec::scalar("ou", |_, x| -x, 1.0);
    let grid = Arc::new(GridSpec::from_horizon(0.02, 1.0, vec![0.0]).unwrap());
    let samples = 10_000;
    let mut rng = stream_for(11, 0);
    let direct: Vec<f64> = (0..samples)
        .map(|_| simulate_path(&model, &grid, &mut rng).unwrap().final_state()[0])
        .collect();
    let mut rng = stream_for(11, 1);
    let spliced: Vec<f64> = (0..samples)
        .map(|k| {
            let mut prefix = simulate_path(&model, &grid, &mut rng).unwrap();
            prefix.truncate(k % grid.n_final).unwrap();
            resume_path(&model, &prefix, &mut rng).unwrap().final_state()[0]
        })
        .collect();
    let d = ks_statistic(direct, spliced);
    // Asymptotic two-sample critical value at alpha = 0.01.
    let crit = 1.628 * (2.0 / samples as f64).sqrt();
    assert!(d < crit, "KS statistic {d} >= {crit}");
}
