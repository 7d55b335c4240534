// Copyright 2026 The heavyqmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Run records: per-trial rows, aggregates and their on-disk layout.
//!
//! A run directory holds `config.json`, `rows.csv` and `summary.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::stats::ScalingFit;

/// Column order of `rows.csv`.
pub const ROW_COLUMNS: [&str; 12] = [
    "dist_id",
    "algo",
    "C",
    "delta",
    "epsilon",
    "estimate",
    "true_mean",
    "abs_error",
    "quantum_calls",
    "classical_draws",
    "seed",
    "trial",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub dist_id: String,
    pub algo: String,
    /// The configured moment bound; `C_cen` for the central variant, empty when unused.
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub delta: f64,
    pub epsilon: f64,
    pub estimate: f64,
    pub true_mean: f64,
    pub abs_error: f64,
    pub quantum_calls: u64,
    pub classical_draws: u64,
    pub seed: u64,
    pub trial: u64,
}

impl TrialRow {
    pub fn success(&self) -> bool {
        self.abs_error <= self.epsilon
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSummary {
    pub epsilon: f64,
    pub trials: u64,
    pub success_rate: f64,
    pub mae: f64,
    pub mean_quantum_calls: f64,
    pub mean_classical_draws: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_hash: String,
    pub algorithm: String,
    pub rows: u64,
    pub per_epsilon: Vec<EpsilonSummary>,
    /// `ln(mean quantum calls)` against `ln ε`, when at least three
    /// accuracies were run and every mean is positive.
    pub quantum_fit: Option<ScalingFit>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub rows: Vec<TrialRow>,
    pub summary: Summary,
}

/// Aggregates recomputed from rows, grouping by `epsilon` in the order of `epsilons`.
pub fn summarize(
    config_hash: &str,
    algorithm: &str,
    epsilons: &[f64],
    rows: &[TrialRow],
) -> Summary {
    let per_epsilon: Vec<EpsilonSummary> = epsilons
        .iter()
        .map(|&eps| {
            let group: Vec<&TrialRow> = rows.iter().filter(|r| r.epsilon == eps).collect();
            let n = group.len() as f64;
            let mean_of =
                |f: &dyn Fn(&TrialRow) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
            EpsilonSummary {
                epsilon: eps,
                trials: group.len() as u64,
                success_rate: group.iter().filter(|r| r.success()).count() as f64 / n,
                mae: mean_of(&|r| r.abs_error),
                mean_quantum_calls: mean_of(&|r| r.quantum_calls as f64),
                mean_classical_draws: mean_of(&|r| r.classical_draws as f64),
            }
        })
        .collect();
    let quantum_fit =
        if per_epsilon.len() >= 3 && per_epsilon.iter().all(|s| s.mean_quantum_calls > 0.0) {
            let xs: Vec<f64> = per_epsilon.iter().map(|s| s.epsilon).collect();
            let ys: Vec<f64> = per_epsilon.iter().map(|s| s.mean_quantum_calls).collect();
            ScalingFit::log_log(&xs, &ys).ok()
        } else {
            None
        };
    Summary {
        config_hash: config_hash.to_string(),
        algorithm: algorithm.to_string(),
        rows: rows.len() as u64,
        per_epsilon,
        quantum_fit,
    }
}

pub fn write_rows<W: std::io::Write>(rows: &[TrialRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(ROW_COLUMNS)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<TrialRow>> {
    let mut rd = csv::Reader::from_path(path)?;
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != ROW_COLUMNS {
        return Err(Error::config(
            "rows.csv",
            format!("unexpected header {header:?}"),
        ));
    }
    rd.deserialize().map(|r| r.map_err(Error::from)).collect()
}

impl RunRecord {
    /// `<parent>/<config hash>`.
    pub fn directory(&self, parent: &Path) -> PathBuf {
        parent.join(&self.summary.config_hash)
    }

    /// Writes the run directory under `parent` and returns its path.
    pub fn persist(&self, parent: &Path) -> Result<PathBuf> {
        let dir = self.directory(parent);
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("config.json"), self.config.to_json() + "\n")?;
        write_rows(&self.rows, fs::File::create(dir.join("rows.csv"))?)?;
        fs::write(
            dir.join("summary.json"),
            serde_json::to_string_pretty(&self.summary)? + "\n",
        )?;
        Ok(dir)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let config = ExperimentConfig::from_json(&fs::read_to_string(dir.join("config.json"))?)?;
        let rows = read_rows(&dir.join("rows.csv"))?;
        let summary: Summary =
            serde_json::from_str(&fs::read_to_string(dir.join("summary.json"))?)?;
        Ok(RunRecord {
            config,
            rows,
            summary,
        })
    }
}

/// Optional acceptance thresholds checked by [`verify_record`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub min_success_rate: Option<f64>,
    pub max_mae: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    /// Disagreements between persisted aggregates and those recomputed from rows.
    pub mismatches: Vec<String>,
    pub threshold_violations: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty() && self.threshold_violations.is_empty()
    }
}

/// Recomputes every aggregate of a persisted run from its rows.
pub fn verify_record(dir: &Path, thresholds: &Thresholds) -> Result<VerifyReport> {
    let rec = RunRecord::load(dir)?;
    let mut report = VerifyReport::default();
    let cfg = &rec.config;
    let expected_rows = cfg.trials * cfg.epsilons.len() as u64;
    if rec.rows.len() as u64 != expected_rows {
        report.mismatches.push(format!(
            "row count {} != trials × |epsilons| = {expected_rows}",
            rec.rows.len()
        ));
    }
    if rec.summary.config_hash != cfg.hash() {
        report.mismatches.push(format!(
            "config hash {} != recomputed {}",
            rec.summary.config_hash,
            cfg.hash()
        ));
    }
    let recomputed = summarize(
        &cfg.hash(),
        cfg.algorithm.as_str(),
        &cfg.epsilons,
        &rec.rows,
    );
    if recomputed != rec.summary {
        let a = serde_json::to_value(&rec.summary)?;
        let b = serde_json::to_value(&recomputed)?;
        report
            .mismatches
            .push(format!("summary differs: persisted {a} recomputed {b}"));
    }
    for s in &recomputed.per_epsilon {
        if let Some(min) = thresholds.min_success_rate {
            if s.success_rate < min {
                report.threshold_violations.push(format!(
                    "epsilon {}: success_rate {} < {min}",
                    s.epsilon, s.success_rate
                ));
            }
        }
        if let Some(max) = thresholds.max_mae {
            if s.mae > max {
                report
                    .threshold_violations
                    .push(format!("epsilon {}: mae {} > {max}", s.epsilon, s.mae));
            }
        }
    }
    Ok(report)
}
