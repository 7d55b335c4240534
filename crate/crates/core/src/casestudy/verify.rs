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

//! Lower-bound and amplitude-estimation runs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lower_bounds::{
    classical_query_experiment, quantum_query_experiment, ExperimentParams, QueryExperiment,
};
use crate::qae::{qae_distribution, qpe_statevector_reference, total_variation, AmplitudeQuery};

fn short_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializes");
    hex::encode(&Sha256::digest(bytes)[..8])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundConfig {
    #[serde(rename = "N_list")]
    pub n_list: Vec<u64>,
    /// Sizes for the quantum arm; defaults to `N_list`.
    #[serde(
        rename = "quantum_N_list",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub quantum_n_list: Option<Vec<u64>>,
    pub trials: u64,
    pub seed: u64,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub big_value: Option<f64>,
}

impl Default for LowerBoundConfig {
    fn default() -> Self {
        LowerBoundConfig {
            n_list: vec![64, 256, 1024],
            quantum_n_list: Some(vec![64, 256, 1024, 4096]),
            trials: 200,
            seed: 0,
            big_value: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundRecord {
    pub config_hash: String,
    pub config: LowerBoundConfig,
    pub classical: QueryExperiment,
    pub quantum: QueryExperiment,
    /// Classical slope minus quantum slope.
    pub slope_gap: f64,
}

pub fn run_lowerbound(cfg: &LowerBoundConfig) -> Result<LowerBoundRecord> {
    if cfg.n_list.is_empty() {
        return Err(Error::config("N_list", "must be nonempty"));
    }
    if cfg.trials < 200 {
        return Err(Error::config(
            "trials",
            format!("need at least 200, got {}", cfg.trials),
        ));
    }
    let params = ExperimentParams {
        big_value: cfg.big_value,
        trials: cfg.trials,
        seed: cfg.seed,
    };
    let classical = classical_query_experiment(&cfg.n_list, &params)?;
    let quantum =
        quantum_query_experiment(cfg.quantum_n_list.as_ref().unwrap_or(&cfg.n_list), &params)?;
    Ok(LowerBoundRecord {
        config_hash: short_hash(cfg),
        config: cfg.clone(),
        slope_gap: classical.fit.slope - quantum.fit.slope,
        classical,
        quantum,
    })
}

impl LowerBoundRecord {
    /// Writes `classical.csv`, `quantum.csv` and `fits.json` under `<parent>/lowerbound-<hash>`.
    pub fn persist(&self, parent: &Path) -> Result<PathBuf> {
        let dir = parent.join(format!("lowerbound-{}", self.config_hash));
        fs::create_dir_all(&dir)?;
        self.classical
            .write_csv(fs::File::create(dir.join("classical.csv"))?)?;
        self.quantum
            .write_csv(fs::File::create(dir.join("quantum.csv"))?)?;
        fs::write(
            dir.join("fits.json"),
            serde_json::to_string_pretty(self)? + "\n",
        )?;
        Ok(dir)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaeVerifyConfig {
    pub a_list: Vec<f64>,
    #[serde(rename = "M_list")]
    pub m_list: Vec<u64>,
    /// Amplitude of the single-point decay column.
    pub decay_a: f64,
    /// Register sizes for the decay table.
    #[serde(rename = "decay_M_list")]
    pub decay_m_list: Vec<u64>,
    /// Amplitudes `(i + 1/2)/pool` pooled into the grid-median column.
    pub pool: u64,
}

impl Default for QaeVerifyConfig {
    fn default() -> Self {
        QaeVerifyConfig {
            a_list: vec![0.0, 0.1, 0.3, 0.5, 0.9, 1.0],
            m_list: vec![2, 4, 8, 16],
            decay_a: 0.3,
            decay_m_list: vec![16, 32, 64, 128, 256],
            pool: 256,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvRow {
    pub a: f64,
    #[serde(rename = "M")]
    pub m: u64,
    pub tv: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    #[serde(rename = "M")]
    pub m: u64,
    /// Median of `|â − a|` at `decay_a`.
    pub median_error: f64,
    /// Median of `|â − a|` with `a` uniform over the pool.
    pub pooled_median_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaeVerifyRecord {
    pub config_hash: String,
    pub config: QaeVerifyConfig,
    pub tv: Vec<TvRow>,
    pub decay: Vec<DecayRow>,
    pub max_tv: f64,
}

/// Exact median of `|â − a|` when `a` is uniform over `amplitudes`.
pub fn pooled_median_error(amplitudes: &[f64], m: u64) -> Result<f64> {
    let w = 1.0 / amplitudes.len() as f64;
    let mut pairs = Vec::new();
    for &a in amplitudes {
        let law = qae_distribution(&AmplitudeQuery::new(a, m)?);
        pairs.extend(
            law.estimates
                .iter()
                .zip(&law.probs)
                .map(|(e, p)| ((e - a).abs(), p * w)),
        );
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut acc = 0.0;
    for (e, p) in &pairs {
        acc += p;
        if acc >= 0.5 {
            return Ok(*e);
        }
    }
    Ok(pairs.last().map(|p| p.0).unwrap_or(0.0))
}

fn check_power_of_two(field: &'static str, ms: &[u64], max: u64) -> Result<()> {
    match ms
        .iter()
        .find(|&&m| m < 2 || !m.is_power_of_two() || m > max)
    {
        Some(m) => Err(Error::config(
            field,
            format!("sizes must be powers of two in 2..={max}, got {m}"),
        )),
        None => Ok(()),
    }
}

pub fn run_qae_verify(cfg: &QaeVerifyConfig) -> Result<QaeVerifyRecord> {
    check_power_of_two("M_list", &cfg.m_list, 1 << crate::qae::MAX_REFERENCE_QUBITS)?;
    check_power_of_two("decay_M_list", &cfg.decay_m_list, 1 << 40)?;
    if let Some(a) = cfg
        .a_list
        .iter()
        .chain([&cfg.decay_a])
        .find(|a| !(0.0..=1.0).contains(*a))
    {
        return Err(Error::config(
            "a_list",
            format!("amplitudes must lie in [0, 1], got {a}"),
        ));
    }
    if cfg.pool == 0 {
        return Err(Error::config("pool", "must be positive"));
    }
    let mut tv = Vec::new();
    for &a in &cfg.a_list {
        for &m in &cfg.m_list {
            let analytic = qae_distribution(&AmplitudeQuery::new(a, m)?);
            let reference = qpe_statevector_reference(a, m.trailing_zeros())?;
            tv.push(TvRow {
                a,
                m,
                tv: total_variation(&analytic.probs, &reference.probs),
            });
        }
    }
    let pool: Vec<f64> = (0..cfg.pool)
        .map(|i| (i as f64 + 0.5) / cfg.pool as f64)
        .collect();
    let decay = cfg
        .decay_m_list
        .iter()
        .map(|&m| {
            Ok(DecayRow {
                m,
                median_error: qae_distribution(&AmplitudeQuery::new(cfg.decay_a, m)?)
                    .error_quantile(cfg.decay_a, 0.5),
                pooled_median_error: pooled_median_error(&pool, m)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QaeVerifyRecord {
        config_hash: short_hash(cfg),
        config: cfg.clone(),
        max_tv: tv.iter().map(|r| r.tv).fold(0.0, f64::max),
        tv,
        decay,
    })
}

impl QaeVerifyRecord {
    /// Writes `tv.csv`, `decay.csv` and `summary.json` under `<parent>/qae-<hash>`.
    pub fn persist(&self, parent: &Path) -> Result<PathBuf> {
        let dir = parent.join(format!("qae-{}", self.config_hash));
        fs::create_dir_all(&dir)?;
        let mut w = csv::Writer::from_path(dir.join("tv.csv"))?;
        for r in &self.tv {
            w.serialize(r)?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("decay.csv"))?;
        for r in &self.decay {
            w.serialize(r)?;
        }
        w.flush()?;
        fs::write(
            dir.join("summary.json"),
            serde_json::to_string_pretty(self)? + "\n",
        )?;
        Ok(dir)
    }
}
