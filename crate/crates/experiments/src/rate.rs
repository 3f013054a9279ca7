//! Large-deviations rate estimates from `log p_hat(T, a)` regressed on `T`.

use crate::config::ExperimentConfig;
use crate::error::{ExpError, Result};
use crate::output::{opt_sci, sci};
use crate::tables::{run_cell, Cell, Expected, TableOptions};
use ams_core::prelude::*;
use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub struct RateSweep {
    /// `ou_average` or `periodic_drift` (any model with `T` and `a` works).
    pub base: ExperimentConfig,
    pub a_list: Vec<f64>,
    pub t_list: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RatePoint {
    pub a: f64,
    pub t: f64,
    pub summary: Option<EstimateSummary>,
    pub hash: String,
    /// Extinctions or a zero estimate; excluded from the regression.
    pub flagged: bool,
}

impl RatePoint {
    pub fn p_hat(&self) -> f64 {
        self.summary.as_ref().map_or(f64::NAN, |s| s.mean)
    }
}

#[derive(Debug, Clone)]
pub struct RateRow {
    pub a: f64,
    pub fit: Option<RateFit>,
    pub exact: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RateReport {
    pub points: Vec<RatePoint>,
    pub fits: Vec<RateRow>,
}

/// Exact rate where one is known: the OU time average, `I(a) = beta a^2 / 4`.
pub fn exact_rate(config: &ExperimentConfig, a: f64) -> Option<f64> {
    (config.model == "ou_average").then(|| {
        let beta = config.params.get("beta").copied().unwrap_or(1.0);
        beta * ou_average_rate_exact(a)
    })
}

pub fn run_rate(sweep: &RateSweep, opts: &TableOptions) -> Result<RateReport> {
    if sweep.a_list.is_empty() || sweep.t_list.len() < 2 {
        return Err(ExpError::Config(
            "a rate sweep needs at least one level and two horizons".into(),
        ));
    }
    let mut points = Vec::new();
    let mut index = 0;
    for &a in &sweep.a_list {
        for &t in &sweep.t_list {
            let cell = Cell {
                row: format!("a={a}"),
                column: format!("T={t}"),
                config: sweep.base.clone().with_param("a", a).with_param("T", t),
                expected: Expected::default(),
                rate_key: Some(a),
            };
            let point = match run_cell(&cell, index, opts) {
                Ok(r) => RatePoint {
                    a,
                    t,
                    flagged: r.summary.extinct_count > 0 || !(r.summary.mean > 0.0),
                    summary: Some(r.summary),
                    hash: r.hash,
                },
                // A failed cell is reported, not fatal, as long as others remain.
                Err(ExpError::Run { .. }) => RatePoint {
                    a,
                    t,
                    summary: None,
                    hash: cell.config.hash(),
                    flagged: true,
                },
                Err(e) => return Err(e),
            };
            points.push(point);
            index += 1;
        }
    }
    let triples: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|p| !p.flagged)
        .map(|p| (p.a, p.t, p.p_hat()))
        .collect();
    let fits = fit_points(&triples)
        .into_iter()
        .map(|mut row| {
            row.exact = exact_rate(&sweep.base, row.a);
            row
        })
        .collect();
    Ok(RateReport { points, fits })
}

/// One regression per distinct `a` over `(a, T, p_hat)` triples, in order of
/// first appearance.
pub fn fit_points(points: &[(f64, f64, f64)]) -> Vec<RateRow> {
    let mut levels: Vec<f64> = Vec::new();
    for &(a, _, _) in points {
        if !levels.contains(&a) {
            levels.push(a);
        }
    }
    levels
        .into_iter()
        .map(|a| {
            let pts: Vec<(f64, f64)> = points
                .iter()
                .filter(|p| p.0 == a)
                .map(|p| (p.1, p.2))
                .collect();
            RateRow {
                a,
                fit: rate_regression(a, &pts).ok(),
                exact: None,
            }
        })
        .collect()
}

/// Reads `a,T,p_hat` rows (header optional).
pub fn parse_points_csv(text: &str) -> Result<Vec<(f64, f64, f64)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<Vec<f64>> = fields.iter().take(3).map(|f| f.parse().ok()).collect();
        match parsed {
            Some(v) if v.len() == 3 && fields.len() >= 3 => out.push((v[0], v[1], v[2])),
            _ if lineno == 0 => continue,
            _ => {
                return Err(ExpError::Config(format!(
                    "points line {}: expected `a,T,p_hat`, got `{line}`",
                    lineno + 1
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(ExpError::Config("no points given".into()));
    }
    Ok(out)
}

pub fn points_csv(report: &RateReport) -> String {
    let mut out = String::from("a,T,p_hat,log_p_hat,variance,extinct,flagged,config_hash\n");
    for p in &report.points {
        let (var, ext) = p
            .summary
            .as_ref()
            .map_or((String::new(), String::new()), |s| {
                (sci(s.variance), s.extinct_count.to_string())
            });
        let p_hat = p.p_hat();
        let log = (p_hat > 0.0).then(|| p_hat.ln());
        writeln!(
            out,
            "{},{},{},{},{var},{ext},{},{}",
            p.a,
            p.t,
            if p_hat.is_nan() { String::new() } else { sci(p_hat) },
            opt_sci(log),
            p.flagged,
            p.hash
        )
        .unwrap();
    }
    out
}

pub fn fits_csv(rows: &[RateRow]) -> String {
    let mut out = String::from("a,i_hat,intercept,n_points,exact_rate_if_known\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.a,
            opt_sci(r.fit.as_ref().map(|f| f.i_hat)),
            opt_sci(r.fit.as_ref().map(|f| f.intercept)),
            r.fit.as_ref().map_or(0, |f| f.points.len()),
            opt_sci(r.exact)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_points_are_fitted_exactly() {
        let text = "a,T,p_hat\n0.5,10,1e-1\n0.5,20,1e-2\n0.7,10,1e-3\n0.7,30,1e-5\n";
        let rows = fit_points(&parse_points_csv(text).unwrap());
        assert_eq!(rows.len(), 2);
        let ln10 = std::f64::consts::LN_10;
        assert!((rows[0].fit.as_ref().unwrap().i_hat - ln10 / 10.0).abs() < 1e-12);
        assert!((rows[1].fit.as_ref().unwrap().i_hat - ln10 / 10.0).abs() < 1e-12);
    }

    #[test]
    fn bad_points_are_rejected() {
        assert!(parse_points_csv("").is_err());
        assert!(parse_points_csv("a,T,p\n1,2,x\n").is_err());
        let single = fit_points(&[(1.0, 10.0, 0.1)]);
        assert!(single[0].fit.is_none());
    }

    #[test]
    fn exact_rate_only_for_time_averages() {
        let cfg = ExperimentConfig::new("ou_average");
        assert!((exact_rate(&cfg, 0.6).unwrap() - 0.09).abs() < 1e-15);
        assert_eq!(exact_rate(&ExperimentConfig::new("periodic_drift"), 0.6), None);
    }

    #[test]
    fn tiny_sweep() {
        let mut base = ExperimentConfig::new("ou_average").with_param("dt", 0.05);
        base.n_rep = 20;
        base.samples = 4;
        let sweep = RateSweep {
            base,
            a_list: vec![0.8],
            t_list: vec![2.0, 4.0],
        };
        let report = run_rate(&sweep, &TableOptions::default()).unwrap();
        assert_eq!(report.points.len(), 2);
        assert!(report.fits[0].fit.is_some());
        assert_eq!(points_csv(&report).lines().count(), 3);
    }
}
