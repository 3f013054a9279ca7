//! CSV and JSON artifacts.

use crate::config::ExperimentConfig;
use crate::error::{ExpError, Result};
use ams_core::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Scientific notation with seven significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

pub fn opt_sci(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

#[derive(Debug, Serialize)]
struct RealizationRow {
    realization_index: usize,
    p_hat: f64,
    q_iter: usize,
    extinct: bool,
    config_hash: String,
}

pub fn realizations_csv(results: &[AmsResult], hash: &str) -> String {
    let mut out = String::from("realization_index,p_hat,q_iter,extinct,config_hash\n");
    for (i, r) in results.iter().enumerate() {
        writeln!(out, "{i},{},{},{},{hash}", sci(r.p_hat), r.q_iter, r.extinct).unwrap();
    }
    out
}

pub fn realizations_json(results: &[AmsResult], hash: &str) -> String {
    let rows: Vec<RealizationRow> = results
        .iter()
        .enumerate()
        .map(|(i, r)| RealizationRow {
            realization_index: i,
            p_hat: r.p_hat,
            q_iter: r.q_iter,
            extinct: r.extinct,
            config_hash: hash.to_string(),
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n"
}

/// Summary of one scenario run.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub scenario: String,
    pub config_hash: String,
    #[serde(flatten)]
    pub summary: EstimateSummary,
    /// Continuous-time probability for the Gaussian models.
    pub reference_p: Option<f64>,
    /// `-p^2 log(p) / n_rep`, with the reference `p` when known and `p_hat` otherwise.
    pub optimal_variance: Option<f64>,
    /// Mean of the products before the final update.
    pub p_max: f64,
    pub config: ExperimentConfig,
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| ExpError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| ExpError::Write {
        path: path.to_path_buf(),
        source,
    })
}
