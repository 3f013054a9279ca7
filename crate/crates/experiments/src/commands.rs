//! The four subcommands, independent of argument parsing.

use crate::config::{load_config, ExperimentConfig};
use crate::error::{ExpError, Result};
use crate::output::{realizations_csv, realizations_json, write_file, Format, RunRecord};
use crate::rate::{self, RateReport, RateSweep};
use crate::scenario::Scenario;
use crate::tables::{self, TableOptions, TableReport};
use crate::validate::{run_validation, Check, ValidateOptions};
use ams_core::prelude::*;
use serde::Serialize;
use std::path::Path;

/// Command-line settings layered over config-file scenarios.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub score: Option<String>,
    pub schedule: Option<String>,
    pub n_rep: Option<usize>,
    pub samples: Option<usize>,
    pub dt: Option<f64>,
    pub t: Option<f64>,
    pub a: Option<f64>,
    pub params: Vec<(String, f64)>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(m) = &self.model {
            cfg.model = m.clone();
        }
        if let Some(s) = &self.score {
            cfg.score = s.clone();
        }
        if let Some(s) = &self.schedule {
            cfg.schedule = Some(s.clone());
        }
        if let Some(n) = self.n_rep {
            cfg.n_rep = n;
        }
        if let Some(m) = self.samples {
            cfg.samples = m;
        }
        for (key, value) in [("dt", self.dt), ("T", self.t), ("a", self.a)] {
            if let Some(v) = value {
                cfg.params.insert(key.into(), v);
            }
        }
        for (k, v) in &self.params {
            cfg.params.insert(k.clone(), *v);
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
    }
}

/// `key=value` with a numeric value.
pub fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

/// Scenarios from a config file, or a single `cli` scenario built from flags.
pub fn collect_scenarios(
    config: Option<&Path>,
    overrides: &Overrides,
) -> Result<Vec<(String, ExperimentConfig)>> {
    let mut scenarios: Vec<(String, ExperimentConfig)> = match config {
        Some(path) => load_config(path)?.into_iter().collect(),
        None => {
            let model = overrides.model.clone().ok_or_else(|| {
                ExpError::Config("either --config or --model is required".into())
            })?;
            vec![("cli".into(), ExperimentConfig::new(model))]
        }
    };
    for (_, cfg) in &mut scenarios {
        overrides.apply(cfg);
    }
    Ok(scenarios)
}

pub fn cmd_run(
    scenarios: &[(String, ExperimentConfig)],
    out: &Path,
    format: Format,
) -> Result<Vec<RunRecord>> {
    let built = scenarios
        .iter()
        .map(|(name, cfg)| Scenario::build(name.clone(), cfg.clone()))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    for s in built {
        let batch = s.run()?;
        let run_err = |source| ExpError::Run {
            name: s.name.clone(),
            source,
        };
        let summary = batch.summary().map_err(run_err)?;
        let level = batch.level_summary().map_err(run_err)?;
        let (rows, ext) = match format {
            Format::Csv => (realizations_csv(&batch.results, &s.hash), "csv"),
            Format::Json => (realizations_json(&batch.results, &s.hash), "json"),
        };
        write_file(&out.join(format!("{}_realizations.{ext}", s.name)), &rows)?;
        let p_ref = s.model.reference;
        let optimal_variance = optimal_variance_ref(p_ref.unwrap_or(summary.mean), s.config.n_rep).ok();
        let record = RunRecord {
            scenario: s.name.clone(),
            config_hash: s.hash.clone(),
            summary,
            reference_p: p_ref,
            optimal_variance,
            p_max: level.mean,
            config: s.config.clone(),
        };
        let json = serde_json::to_string_pretty(&record).expect("record serializes") + "\n";
        write_file(&out.join(format!("{}_summary.json", s.name)), &json)?;
        records.push(record);
    }
    Ok(records)
}

#[derive(Serialize)]
struct TableRowRecord<'a> {
    table: &'a str,
    row: &'a str,
    column: &'a str,
    model: &'a str,
    score: &'a str,
    n_rep: usize,
    #[serde(flatten)]
    summary: &'a EstimateSummary,
    p_max: f64,
    p_exact: Option<f64>,
    expected_p_hat: Option<f64>,
    expected_variance: Option<f64>,
    q_hat: Option<f64>,
    eff: Option<f64>,
    config_hash: &'a str,
}

fn table_json(report: &TableReport) -> String {
    let rows: Vec<TableRowRecord> = report
        .cells
        .iter()
        .map(|c| TableRowRecord {
            table: &report.id,
            row: &c.cell.row,
            column: &c.cell.column,
            model: &c.cell.config.model,
            score: &c.cell.config.score,
            n_rep: c.cell.config.n_rep,
            summary: &c.summary,
            p_max: c.level.mean,
            p_exact: c.p_exact,
            expected_p_hat: c.cell.expected.p_hat,
            expected_variance: c.cell.expected.variance,
            q_hat: (c.cell.column == "std")
                .then(|| report.q_hat.get(&c.cell.row).copied())
                .flatten(),
            eff: (c.cell.column == "Y")
                .then(|| report.eff.get(&c.cell.row).copied())
                .flatten(),
            config_hash: &c.hash,
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n"
}

pub fn cmd_table(id: &str, opts: &TableOptions, out: &Path, format: Format) -> Result<TableReport> {
    let spec = tables::table_spec(id)?;
    let report = tables::run_table(&spec, opts)?;
    match format {
        Format::Csv => write_file(&out.join(format!("table_{id}.csv")), &tables::table_csv(&report))?,
        Format::Json => write_file(&out.join(format!("table_{id}.json")), &table_json(&report))?,
    }
    if !report.fits.is_empty() {
        write_file(&out.join(format!("table_{id}_fits.csv")), &tables::fits_csv(&report))?;
    }
    Ok(report)
}

pub fn cmd_rate(sweep: &RateSweep, opts: &TableOptions, out: &Path) -> Result<RateReport> {
    let report = rate::run_rate(sweep, opts)?;
    write_file(&out.join("rate_points.csv"), &rate::points_csv(&report))?;
    write_file(&out.join("rate_fits.csv"), &rate::fits_csv(&report.fits))?;
    Ok(report)
}

/// Regression on externally supplied `(a, T, p_hat)` points.
pub fn cmd_rate_points(path: &Path, out: &Path) -> Result<Vec<rate::RateRow>> {
    let text = std::fs::read_to_string(path).map_err(|source| ExpError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let rows = rate::fit_points(&rate::parse_points_csv(&text)?);
    write_file(&out.join("rate_fits.csv"), &rate::fits_csv(&rows))?;
    Ok(rows)
}

pub fn cmd_validate(opts: &ValidateOptions) -> (Vec<Check>, bool) {
    let checks = run_validation(opts);
    let ok = checks.iter().all(|c| c.passed);
    (checks, ok)
}
