//! Parameter sweeps behind the result tables, with the values each sweep is
//! expected to reproduce.
//!
//! Every cell is one scenario: a model configuration, a score and a sample
//! size `M`. Sample sizes are the full-scale ones; `--scale s` divides them.

use crate::config::ExperimentConfig;
use crate::error::{ExpError, Result};
use crate::output::{opt_sci, sci};
use crate::scenario::Scenario;
use ams_core::analytic::{analytic_p_brownian, analytic_p_drifted_bm, analytic_p_ou};
use ams_core::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub const TABLE_IDS: &[&str] = &[
    "bm1", "bm2", "ou2", "ou4", "ou8", "dbm", "ou_avg", "lorenz", "periodic",
];

/// Values a cell is expected to land near at full scale.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Expected {
    pub p_hat: Option<f64>,
    pub variance: Option<f64>,
    pub r_hat: Option<f64>,
    pub eff: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub row: String,
    pub column: String,
    pub config: ExperimentConfig,
    pub expected: Expected,
    /// Cells with the same key are regressed together: `log p_hat` against `T`.
    pub rate_key: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TableSpec {
    pub id: String,
    pub title: String,
    pub cells: Vec<Cell>,
    /// Expected rate estimates per `rate_key`.
    pub expected_rates: Vec<(f64, f64)>,
}

fn config(model: &str, score: &str, n_rep: usize, samples: usize, params: &[(&str, f64)]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(model);
    cfg.score = score.into();
    cfg.n_rep = n_rep;
    cfg.samples = samples;
    for &(k, v) in params {
        cfg.params.insert(k.into(), v);
    }
    cfg
}

fn expect(p_hat: f64, variance: f64) -> Expected {
    Expected {
        p_hat: Some(p_hat),
        variance: Some(variance),
        ..Expected::default()
    }
}

const BM1: &[(f64, f64, f64)] = &[
    (2.0, 3.199e-1, 1.256e-3),
    (4.0, 1.613e-1, 5.275e-4),
    (8.0, 4.978e-2, 1.030e-4),
    (16.0, 6.395e-3, 4.449e-6),
    (32.0, 1.631e-4, 1.052e-8),
    (64.0, 1.787e-7, 1.139e-13),
    (128.0, 2.501e-13, 1.403e-23),
];

const BM2: &[(f64, f64, f64)] = &[
    (2.0, 3.196e-1, 1.362e-4),
    (4.0, 1.617e-1, 5.456e-5),
    (8.0, 4.983e-2, 9.815e-6),
    (16.0, 6.411e-3, 4.242e-7),
    (32.0, 1.634e-4, 1.063e-9),
    (64.0, 1.800e-7, 9.360e-15),
    (128.0, 3.045e-13, 9.986e-25),
];

/// `(a, p_new, p_std, var_new, var_std, r_std)`.
type OuRow = (f64, f64, f64, f64, f64, Option<f64>);

const OU2: &[OuRow] = &[
    (2.8, 3.216e-5, 3.252e-5, 2.377e-10, 3.327e-10, None),
    (2.9, 1.756e-5, 1.728e-5, 7.917e-10, 1.009e-10, None),
    (3.0, 9.341e-6, 9.300e-6, 2.411e-11, 5.832e-11, None),
    (3.1, 4.857e-6, 4.826e-6, 7.011e-12, 8.482e-12, None),
    (3.2, 2.486e-6, 2.449e-6, 1.984e-12, 2.475e-12, None),
];

const OU4: &[OuRow] = &[
    (2.8, 3.743e-5, 3.789e-5, 7.106e-10, 1.089e-9, Some(0.85)),
    (2.9, 2.052e-5, 2.069e-5, 2.438e-10, 3.484e-10, Some(0.83)),
    (3.0, 1.104e-5, 1.124e-5, 7.540e-11, 1.147e-10, Some(0.81)),
    (3.1, 5.822e-6, 5.856e-6, 2.412e-11, 3.584e-11, Some(0.78)),
    (3.2, 3.022e-6, 3.016e-6, 7.452e-12, 9.964e-12, Some(0.75)),
];

const OU8: &[OuRow] = &[
    (2.8, 3.792e-5, 3.714e-5, 1.696e-9, 2.435e-9, Some(0.54)),
    (2.9, 2.036e-5, 2.071e-5, 5.439e-10, 8.289e-10, Some(0.51)),
    (3.0, 1.103e-5, 1.128e-5, 1.843e-10, 2.745e-10, Some(0.49)),
    (3.1, 5.915e-6, 5.968e-6, 5.599e-11, 8.457e-11, Some(0.47)),
    (3.2, 2.978e-6, 3.022e-6, 1.639e-11, 2.368e-11, Some(0.43)),
];

/// `(beta, p_new, p_new_a, p_std, var_new, var_new_a, var_std, r_std)`.
const DBM: &[(f64, f64, f64, f64, f64, f64, f64, f64)] = &[
    (1.0, 2.037e-4, 2.036e-4, 2.033e-4, 1.572e-9, 5.734e-9, 3.525e-9, 0.99),
    (2.0, 2.843e-7, 2.870e-7, 2.878e-7, 4.714e-14, 2.348e-12, 9.527e-14, 0.69),
    (3.0, 4.613e-10, 4.325e-10, 4.705e-10, 1.817e-18, 2.197e-17, 3.084e-18, 0.11),
    (4.0, 7.620e-13, 6.975e-13, 7.582e-13, 5.034e-23, 4.388e-22, 8.343e-23, 0.01),
];

pub const OU_AVG_HORIZONS: [f64; 4] = [25.0, 50.0, 100.0, 200.0];

/// `(a, p_hat per horizon, variance per horizon, rate estimate)`.
const OU_AVG: &[(f64, [f64; 4], [f64; 4], f64)] = &[
    (0.4, [7.28e-2, 2.12e-2, 2.22e-3, 2.75e-5], [2.02e-5, 3.25e-6, 1.27e-7, 3.85e-11], 0.045),
    (0.6, [1.45e-2, 1.16e-3, 1.16e-5, 7.28e-10], [1.36e-6, 5.85e-8, 2.21e-10, 6.44e-19], 0.096),
    (0.8, [1.76e-3, 2.57e-5, 6.12e-9, 2.73e-16], [8.01e-8, 3.32e-10, 1.44e-16, 1.98e-31], 0.169),
    (1.0, [1.37e-4, 1.67e-7, 3.06e-13, 1.71e-24], [1.47e-9, 2.07e-14, 1.16e-25, 9.32e-48], 0.261),
    (1.2, [6.21e-6, 4.83e-10, 2.71e-18, 2.88e-34], [1.40e-11, 6.69e-19, 3.49e-35, 5.21e-67], 0.373),
];

/// `(T, p_hat, ci_low, ci_high, variance)`.
pub const LORENZ: &[(f64, f64, f64, f64, f64)] = &[
    (5.0, 1.413e-5, 1.388e-5, 1.438e-5, 1.648e-10),
    (10.0, 2.607e-5, 2.534e-5, 2.681e-5, 1.409e-9),
    (15.0, 2.709e-5, 2.609e-5, 2.809e-5, 2.592e-9),
    (20.0, 2.594e-5, 2.484e-5, 2.704e-5, 3.158e-9),
];

/// `(a, T, n_rep, p_x, p_y, var_x, var_y, eff)`.
pub const PERIODIC: &[(f64, f64, usize, f64, f64, f64, f64, f64)] = &[
    (0.8, 100.0, 100, 8.483e-2, 8.489e-2, 7.136e-4, 2.487e-4, 1.0),
    (0.8, 200.0, 100, 2.647e-2, 2.776e-2, 1.832e-4, 3.519e-5, 1.7),
    (1.0, 50.0, 1000, 1.529e-2, 1.505e-2, 7.046e-6, 1.513e-6, 3.0),
    (1.0, 100.0, 1000, 1.026e-3, 1.085e-3, 2.586e-7, 3.879e-8, 2.8),
    (1.25, 50.0, 1000, 1.374e-4, 1.311e-4, 1.227e-8, 1.355e-9, 4.9),
    (1.25, 100.0, 1000, 8.941e-7, 1.017e-7, 1.048e-13, 1.585e-15, 35.0),
];

pub const PERIODIC_RATES: &[(f64, f64)] = &[(0.8, 0.0112), (1.0, 0.0526), (1.25, 0.189)];

fn brownian_table(id: &str, n_rep: usize, samples: usize, rows: &[(f64, f64, f64)]) -> TableSpec {
    let cells = rows
        .iter()
        .map(|&(beta, p, v)| Cell {
            row: format!("beta={beta}"),
            column: "new".into(),
            config: config("brownian", "new", n_rep, samples, &[("beta", beta)]),
            expected: expect(p, v),
            rate_key: None,
        })
        .collect();
    TableSpec {
        id: id.into(),
        title: format!("Brownian motion, |X_1| > 1, n_rep = {n_rep}, M = {samples}"),
        cells,
        expected_rates: Vec::new(),
    }
}

fn ou_table(id: &str, t: f64, rows: &[OuRow]) -> TableSpec {
    let mut cells = Vec::new();
    for &(a, p_new, p_std, v_new, v_std, r_std) in rows {
        let params = [("T", t), ("a", a)];
        cells.push(Cell {
            row: format!("a={a}"),
            column: "new".into(),
            config: config("ou", "new", 100, 10_000, &params),
            expected: expect(p_new, v_new),
            rate_key: None,
        });
        cells.push(Cell {
            row: format!("a={a}"),
            column: "std".into(),
            config: config("ou", "std", 100, 10_000, &params),
            expected: Expected {
                r_hat: r_std,
                ..expect(p_std, v_std)
            },
            rate_key: None,
        });
    }
    TableSpec {
        id: id.into(),
        title: format!("Ornstein-Uhlenbeck, X_T > a, T = {t}, new vs std score"),
        cells,
        expected_rates: Vec::new(),
    }
}

fn dbm_table() -> TableSpec {
    let mut cells = Vec::new();
    for &(beta, p_new, p_a, p_std, v_new, v_a, v_std, r_std) in DBM {
        let params = [("beta", beta)];
        let row = format!("beta={beta}");
        cells.push(Cell {
            row: row.clone(),
            column: "new".into(),
            config: config("drifted_bm", "new", 1000, 40_000, &params),
            expected: expect(p_new, v_new),
            rate_key: None,
        });
        let mut sched = config("drifted_bm", "new_schedule", 1000, 400_000, &params);
        sched.schedule = Some("linear".into());
        cells.push(Cell {
            row: row.clone(),
            column: "new_a".into(),
            config: sched,
            expected: expect(p_a, v_a),
            rate_key: None,
        });
        cells.push(Cell {
            row,
            column: "std".into(),
            config: config("drifted_bm", "std", 1000, 40_000, &params),
            expected: Expected {
                r_hat: Some(r_std),
                ..expect(p_std, v_std)
            },
            rate_key: None,
        });
    }
    TableSpec {
        id: "dbm".into(),
        title: "Drifted Brownian motion, X_1 > 1, three scores".into(),
        cells,
        expected_rates: Vec::new(),
    }
}

fn ou_avg_table() -> TableSpec {
    let mut cells = Vec::new();
    for &(a, ps, vs, _) in OU_AVG {
        for (k, &t) in OU_AVG_HORIZONS.iter().enumerate() {
            cells.push(Cell {
                row: format!("a={a}"),
                column: format!("T={t}"),
                config: config("ou_average", "new", 1000, 100, &[("T", t), ("a", a)]),
                expected: expect(ps[k], vs[k]),
                rate_key: Some(a),
            });
        }
    }
    TableSpec {
        id: "ou_avg".into(),
        title: "Ornstein-Uhlenbeck time averages, Y_T > a".into(),
        cells,
        expected_rates: OU_AVG.iter().map(|r| (r.0, r.3)).collect(),
    }
}

fn lorenz_table() -> TableSpec {
    let cells = LORENZ
        .iter()
        .map(|&(t, p, _, _, v)| Cell {
            row: format!("T={t}"),
            column: "new".into(),
            config: config("lorenz", "new", 1000, 10_000, &[("T", t)]),
            expected: expect(p, v),
            rate_key: None,
        })
        .collect();
    TableSpec {
        id: "lorenz".into(),
        title: "Stochastic Lorenz system, ellipsoid exit at time T".into(),
        cells,
        expected_rates: Vec::new(),
    }
}

fn periodic_table() -> TableSpec {
    let mut cells = Vec::new();
    for &(a, t, n_rep, p_x, p_y, v_x, v_y, eff) in PERIODIC {
        let row = format!("a={a},T={t}");
        cells.push(Cell {
            row: row.clone(),
            column: "X".into(),
            config: config("periodic_drift", "new", n_rep, 100, &[("T", t), ("a", a), ("ratio", 0.0)]),
            expected: expect(p_x, v_x),
            rate_key: None,
        });
        cells.push(Cell {
            row,
            column: "Y".into(),
            config: config("periodic_drift", "new", n_rep, 100, &[("T", t), ("a", a), ("ratio", 1.0)]),
            expected: Expected {
                eff: Some(eff),
                ..expect(p_y, v_y)
            },
            rate_key: Some(a),
        });
    }
    TableSpec {
        id: "periodic".into(),
        title: "Driven periodic diffusion, X_T > a T vs X_T / T > a".into(),
        cells,
        expected_rates: PERIODIC_RATES.to_vec(),
    }
}

pub fn table_spec(id: &str) -> Result<TableSpec> {
    Ok(match id {
        "bm1" => brownian_table("bm1", 100, 10_000, BM1),
        "bm2" => brownian_table("bm2", 1000, 1000, BM2),
        "ou2" => ou_table("ou2", 2.0, OU2),
        "ou4" => ou_table("ou4", 4.0, OU4),
        "ou8" => ou_table("ou8", 8.0, OU8),
        "dbm" => dbm_table(),
        "ou_avg" => ou_avg_table(),
        "lorenz" => lorenz_table(),
        "periodic" => periodic_table(),
        other => {
            return Err(ExpError::Config(format!(
                "unknown table `{other}` (known: {})",
                TABLE_IDS.join(", ")
            )))
        }
    })
}

/// `samples / scale`, rounded, never below 2.
pub fn scaled_samples(samples: usize, scale: f64) -> usize {
    ((samples as f64 / scale).round() as usize).max(2)
}

#[derive(Debug, Clone, Copy)]
pub struct TableOptions {
    pub scale: f64,
    pub seed: u64,
    pub threads: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            scale: 1.0,
            seed: 0,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    pub hash: String,
    pub summary: EstimateSummary,
    /// Summary of the products before the final update.
    pub level: EstimateSummary,
    pub p_exact: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TableReport {
    pub id: String,
    pub title: String,
    pub cells: Vec<CellResult>,
    /// `p_new / p_max(std)` per row, for rows with both scores.
    pub q_hat: BTreeMap<String, f64>,
    /// `Eff(Y|X)` per row, for rows with both formulations.
    pub eff: BTreeMap<String, f64>,
    pub fits: Vec<FitResult>,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub key: f64,
    pub fit: Option<RateFit>,
    pub exact: Option<f64>,
    pub expected: Option<f64>,
}

/// Runs one cell; cell `index` uses seed `opts.seed + index`.
pub fn run_cell(cell: &Cell, index: usize, opts: &TableOptions) -> Result<CellResult> {
    let mut config = cell.config.clone();
    config.samples = scaled_samples(config.samples, opts.scale);
    config.seed = opts.seed + index as u64;
    config.threads = opts.threads;
    let scenario = Scenario::build(format!("{}/{}", cell.row, cell.column), config)?;
    let batch = scenario.run()?;
    let summary = batch.summary().map_err(|source| ExpError::Run {
        name: scenario.name.clone(),
        source,
    })?;
    let level = batch.level_summary().map_err(|source| ExpError::Run {
        name: scenario.name.clone(),
        source,
    })?;
    Ok(CellResult {
        cell: cell.clone(),
        hash: scenario.hash.clone(),
        summary,
        level,
        p_exact: scenario.model.reference,
    })
}

pub fn run_table(spec: &TableSpec, opts: &TableOptions) -> Result<TableReport> {
    let cells = spec
        .cells
        .iter()
        .enumerate()
        .map(|(i, cell)| run_cell(cell, i, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(finish_report(spec, cells))
}

fn find<'a>(cells: &'a [CellResult], row: &str, column: &str) -> Option<&'a CellResult> {
    cells
        .iter()
        .find(|c| c.cell.row == row && c.cell.column == column)
}

/// Row-level derived quantities: `q`, `Eff(Y|X)` and rate fits.
pub fn finish_report(spec: &TableSpec, cells: Vec<CellResult>) -> TableReport {
    let mut q_hat = BTreeMap::new();
    let mut eff = BTreeMap::new();
    for c in &cells {
        let row = &c.cell.row;
        if let (Some(new), Some(std)) = (find(&cells, row, "new"), find(&cells, row, "std")) {
            if let Ok(q) = conditional_q(&new.summary, &std.level) {
                q_hat.insert(row.clone(), q);
            }
        }
        if let (Some(x), Some(y)) = (find(&cells, row, "X"), find(&cells, row, "Y")) {
            if let Ok(e) = efficiency_ratio(&x.summary, &y.summary) {
                eff.insert(row.clone(), e);
            }
        }
    }

    let mut keys: Vec<f64> = cells.iter().filter_map(|c| c.cell.rate_key).collect();
    keys.dedup();
    let fits = keys
        .into_iter()
        .map(|key| {
            let points: Vec<(f64, f64)> = cells
                .iter()
                .filter(|c| c.cell.rate_key == Some(key) && c.summary.mean > 0.0)
                .map(|c| (c.cell.config.params["T"], c.summary.mean))
                .collect();
            let exact = (spec.id == "ou_avg").then(|| ou_average_rate_exact(key));
            let expected = spec
                .expected_rates
                .iter()
                .find(|(a, _)| *a == key)
                .map(|(_, i)| *i);
            FitResult {
                key,
                fit: rate_regression(key, &points).ok(),
                exact,
                expected,
            }
        })
        .collect();

    TableReport {
        id: spec.id.clone(),
        title: spec.title.clone(),
        cells,
        q_hat,
        eff,
        fits,
    }
}

fn optimal_variance(c: &CellResult) -> Option<f64> {
    let p = c.p_exact.unwrap_or(c.summary.mean);
    optimal_variance_ref(p, c.cell.config.n_rep).ok()
}

pub const TABLE_CSV_HEADER: &str = "table,row,column,model,score,n_rep,samples,p_hat,variance,ci_low,ci_high,\
optimal_variance,r_hat,extinct,p_max,p_exact,expected_p_hat,expected_variance,expected_r_hat,\
q_hat,eff,expected_eff,wall_time,config_hash";

pub fn table_csv(report: &TableReport) -> String {
    let mut out = String::from(TABLE_CSV_HEADER);
    out.push('\n');
    for c in &report.cells {
        let s = &c.summary;
        let cfg = &c.cell.config;
        let e = &c.cell.expected;
        let q = (c.cell.column == "std")
            .then(|| report.q_hat.get(&c.cell.row).copied())
            .flatten();
        let eff = (c.cell.column == "Y")
            .then(|| report.eff.get(&c.cell.row).copied())
            .flatten();
        writeln!(
            out,
            "{},\"{}\",{},{},{},{},{},{},{},{},{},{},{:.4},{},{},{},{},{},{},{},{},{},{:.3},{}",
            report.id,
            c.cell.row,
            c.cell.column,
            cfg.model,
            cfg.score,
            cfg.n_rep,
            s.m,
            sci(s.mean),
            sci(s.variance),
            sci(s.ci_low),
            sci(s.ci_high),
            opt_sci(optimal_variance(c)),
            s.r_nonzero,
            s.extinct_count,
            sci(c.level.mean),
            opt_sci(c.p_exact),
            opt_sci(e.p_hat),
            opt_sci(e.variance),
            e.r_hat.map(|r| format!("{r}")).unwrap_or_default(),
            opt_sci(q),
            opt_sci(eff),
            e.eff.map(|r| format!("{r}")).unwrap_or_default(),
            s.wall_time,
            c.hash
        )
        .unwrap();
    }
    out
}

pub fn fits_csv(report: &TableReport) -> String {
    let mut out = String::from("table,a,i_hat,intercept,n_points,exact_rate,expected_i_hat\n");
    for f in &report.fits {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            report.id,
            f.key,
            opt_sci(f.fit.as_ref().map(|f| f.i_hat)),
            opt_sci(f.fit.as_ref().map(|f| f.intercept)),
            f.fit.as_ref().map(|f| f.points.len()).unwrap_or(0),
            opt_sci(f.exact),
            opt_sci(f.expected)
        )
        .unwrap();
    }
    out
}

/// Closed-form column entry against its tabulated value.
#[derive(Debug, Clone)]
pub struct AnalyticCheck {
    pub label: String,
    pub computed: f64,
    pub printed: f64,
}

impl AnalyticCheck {
    /// Agreement to three significant digits: within half a unit of the
    /// third significant digit of the printed value.
    pub fn agrees(&self) -> bool {
        let unit = 10f64.powf(self.printed.abs().log10().floor() - 2.0);
        (self.computed - self.printed).abs() <= 0.5 * unit
    }
}

/// Every closed-form probability listed in the Gaussian tables.
pub fn analytic_checks() -> Vec<AnalyticCheck> {
    let mut out = Vec::new();
    let bm = [
        (2.0, 3.197e-1),
        (4.0, 1.614e-1),
        (8.0, 4.983e-2),
        (16.0, 6.386e-3),
        (32.0, 1.645e-4),
        (64.0, 1.782e-7),
        (128.0, 3.011e-13),
    ];
    for (beta, printed) in bm {
        out.push(AnalyticCheck {
            label: format!("brownian beta={beta}"),
            computed: analytic_p_brownian(beta, 0.1, 1.0, 1.0),
            printed,
        });
    }
    let ou: [(f64, [f64; 5]); 3] = [
        (2.0, [3.213e-5, 1.742e-5, 9.260e-6, 4.827e-6, 2.468e-6]),
        (4.0, [3.740e-5, 2.049e-5, 1.101e-5, 5.805e-6, 3.002e-6]),
        (8.0, [3.751e-5, 2.055e-5, 1.104e-5, 5.824e-6, 3.013e-6]),
    ];
    for (t, values) in ou {
        for (a, printed) in [2.8, 2.9, 3.0, 3.1, 3.2].into_iter().zip(values) {
            out.push(AnalyticCheck {
                label: format!("ou T={t} a={a}"),
                computed: analytic_p_ou(t, a),
                printed,
            });
        }
    }
    for (beta, printed) in [(1.0, 2.035e-4), (2.0, 2.867e-7), (3.0, 4.571e-10), (4.0, 7.687e-13)] {
        out.push(AnalyticCheck {
            label: format!("drifted_bm beta={beta}"),
            computed: analytic_p_drifted_bm(4.0, beta, 1.0, 1.0),
            printed,
        });
    }
    out
}
