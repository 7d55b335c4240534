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

//! Experiment configuration files.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{cutoff_y, Calibration};
use crate::dist::{discretize_pareto_on, DiscreteDistribution, DistModel, DistributionDoc, Grid};
use crate::error::{Error, Result};
use crate::estimators::EstimatorMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    QmcHeavy,
    QmcHeavyMae,
    QmcCentral,
    AIdeal,
    ClassicalMc,
    KoTruncated,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::QmcHeavy => "qmc_heavy",
            Algorithm::QmcHeavyMae => "qmc_heavy_mae",
            Algorithm::QmcCentral => "qmc_central",
            Algorithm::AIdeal => "a_ideal",
            Algorithm::ClassicalMc => "classical_mc",
            Algorithm::KoTruncated => "ko_truncated",
        }
    }

    fn needs_c(&self) -> bool {
        matches!(
            self,
            Algorithm::QmcHeavy | Algorithm::QmcHeavyMae | Algorithm::ClassicalMc
        )
    }
}

/// How quantum subroutines are executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    #[default]
    Simulated,
    Ideal,
}

impl RunMode {
    pub fn estimator_mode(&self) -> EstimatorMode {
        match self {
            RunMode::Simulated => EstimatorMode::SimulatedQae,
            RunMode::Ideal => EstimatorMode::IdealContract,
        }
    }
}

/// Cutoff `y` for [`Algorithm::AIdeal`] and [`Algorithm::KoTruncated`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum CutoffRule {
    /// `(8C/ε)^{1/δ}`.
    Moment,
    /// `ε^{-1/δ}`.
    Delta,
    /// Smallest atom `y` with `E[X·1[X ≥ y]] ≤ ε/8`.
    TailBudget,
    Fixed {
        y: f64,
    },
}

/// Discretization of a continuous model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    #[serde(flatten)]
    pub grid: Grid,
    pub cap: f64,
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization {
            grid: Grid::Dyadic { anchor: 1.0 },
            cap: 2f64.powi(30),
        }
    }
}

fn default_parallelism() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dist_id: String,
    pub distribution: DistributionDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discretization: Option<Discretization>,
    pub algorithm: Algorithm,
    pub delta: f64,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(rename = "C_cen", default, skip_serializing_if = "Option::is_none")]
    pub c_cen: Option<f64>,
    pub epsilons: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub mode: RunMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<CutoffRule>,
    #[serde(default)]
    pub calibration: Calibration,
    /// Worker threads for trials; rows are merged in trial order regardless.
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Parent directory for the run directory. Not part of the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::config(json_field(&e), e.inner().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.dist_id.is_empty() || self.dist_id.contains([',', '\n', '"']) {
            return Err(Error::config(
                "dist_id",
                "must be nonempty without commas, quotes or newlines",
            ));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::config(
                "delta",
                format!("must lie in (0, 1], got {}", self.delta),
            ));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be positive"));
        }
        if self.parallelism == 0 {
            return Err(Error::config("parallelism", "must be positive"));
        }
        if self.epsilons.is_empty() {
            return Err(Error::config("epsilons", "must be nonempty"));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::config(
                "epsilons",
                format!("must be positive, got {e}"),
            ));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::config("epsilons", "must be strictly decreasing"));
        }
        if self.algorithm.needs_c() {
            match self.c {
                Some(c) if c > 0.0 && c.is_finite() => {}
                Some(c) => return Err(Error::config("C", format!("must be positive, got {c}"))),
                None => {
                    return Err(Error::config(
                        "C",
                        format!("required by {}", self.algorithm.as_str()),
                    ))
                }
            }
        }
        if self.algorithm == Algorithm::QmcCentral {
            match self.c_cen {
                Some(c) if c > 0.0 && c.is_finite() => {}
                Some(c) => {
                    return Err(Error::config("C_cen", format!("must be positive, got {c}")))
                }
                None => return Err(Error::config("C_cen", "required by qmc_central")),
            }
        }
        match (self.algorithm, self.cutoff) {
            (Algorithm::AIdeal | Algorithm::KoTruncated, Some(CutoffRule::Moment))
                if self.c.is_none() =>
            {
                return Err(Error::config("C", "required by the moment cutoff rule"));
            }
            (Algorithm::AIdeal | Algorithm::KoTruncated, Some(CutoffRule::Fixed { y }))
                if !(y > 0.0) =>
            {
                return Err(Error::config(
                    "cutoff",
                    format!("fixed y must be positive, got {y}"),
                ));
            }
            (Algorithm::AIdeal | Algorithm::KoTruncated, _) => {}
            (_, Some(_)) => {
                return Err(Error::config(
                    "cutoff",
                    format!("not used by {}", self.algorithm.as_str()),
                ));
            }
            _ => {}
        }
        let model = self.distribution.parse()?;
        if self.discretization.is_some() && !matches!(model, DistModel::Pareto(_)) {
            return Err(Error::config(
                "discretization",
                "only applies to pareto distributions",
            ));
        }
        let dist = self.target()?;
        if matches!(self.algorithm, Algorithm::AIdeal | Algorithm::KoTruncated)
            && !dist.is_nonnegative()
        {
            return Err(Error::config(
                "distribution",
                format!("{} needs nonnegative support", self.algorithm.as_str()),
            ));
        }
        Ok(())
    }

    /// The discrete law the run samples from.
    pub fn target(&self) -> Result<DiscreteDistribution> {
        match self.distribution.parse()? {
            DistModel::Discrete(d) => Ok(d),
            DistModel::TwoPoint(t) => Ok(t.to_distribution()),
            DistModel::Pareto(p) => {
                let disc = self.discretization.unwrap_or_default();
                discretize_pareto_on(&p, disc.grid, disc.cap)
                    .map_err(|e| Error::config("discretization", e.to_string()))
            }
        }
    }

    pub fn cutoff_rule(&self) -> CutoffRule {
        self.cutoff.unwrap_or(CutoffRule::TailBudget)
    }

    /// First 16 hex digits of the SHA-256 of the config JSON without `output`.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(&Sha256::digest(bytes)[..8])
    }
}

/// Resolves a cutoff rule at accuracy `epsilon`.
pub fn resolve_cutoff(
    rule: CutoffRule,
    dist: &DiscreteDistribution,
    c: Option<f64>,
    delta: f64,
    epsilon: f64,
) -> f64 {
    match rule {
        CutoffRule::Moment => cutoff_y(c.expect("validated"), delta, epsilon),
        CutoffRule::Delta => epsilon.powf(-1.0 / delta),
        CutoffRule::Fixed { y } => y,
        CutoffRule::TailBudget => tail_budget_cutoff(dist, epsilon / 8.0),
    }
}

/// Smallest atom `v` with `E[X·1[X ≥ v]] ≤ budget`, or twice the largest
/// atom when even the top atom alone exceeds the budget.
pub fn tail_budget_cutoff(dist: &DiscreteDistribution, budget: f64) -> f64 {
    let mut tail = 0.0;
    let mut best = None;
    for (v, p) in dist.atoms().collect::<Vec<_>>().into_iter().rev() {
        tail += v * p;
        if tail > budget {
            break;
        }
        best = Some(v);
    }
    best.unwrap_or(2.0 * dist.max_value())
}

/// Top-level key an error points at, falling back to a missing-field
/// name or `config` when the document itself is malformed.
fn json_field(e: &serde_path_to_error::Error<serde_json::Error>) -> String {
    if let Some(serde_path_to_error::Segment::Map { key }) = e.path().iter().next() {
        return key.clone();
    }
    let msg = e.inner().to_string();
    msg.strip_prefix("missing field `")
        .and_then(|rest| rest.split('`').next())
        .unwrap_or("config")
        .to_string()
}
