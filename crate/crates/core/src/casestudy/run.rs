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

//! Deterministic batch execution of an [`ExperimentConfig`].

use rayon::prelude::*;

use super::config::{resolve_cutoff, Algorithm, ExperimentConfig};
use super::record::{summarize, RunRecord, TrialRow};
use crate::bounds::mz_mc_sample_size;
use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::estimators::{classical_mean, EstimateReport};
use crate::heavy_tail::{
    a_ideal, ko_truncated, qmc_central, qmc_heavy, qmc_heavy_mae, HeavyTailSpec,
};
use crate::rng::RngStream;

/// Stream of trial `t` at accuracy index `e`.
pub fn trial_stream(seed: u64, eps_index: usize, trial: u64) -> RngStream {
    RngStream::new(seed, ((eps_index as u64) << 32) | trial)
}

/// One estimator invocation as configured.
pub fn run_trial(
    cfg: &ExperimentConfig,
    dist: &DiscreteDistribution,
    epsilon: f64,
    rng: &mut RngStream,
) -> Result<EstimateReport> {
    let mode = cfg.mode.estimator_mode();
    let calib = &cfg.calibration;
    let spec = || -> Result<HeavyTailSpec> {
        let mut s = HeavyTailSpec::new(cfg.c.expect("validated"), cfg.delta, epsilon, mode)?;
        s.calibration = *calib;
        Ok(s)
    };
    let cutoff = || resolve_cutoff(cfg.cutoff_rule(), dist, cfg.c, cfg.delta, epsilon);
    match cfg.algorithm {
        Algorithm::QmcHeavy => qmc_heavy(dist, &spec()?, rng),
        Algorithm::QmcHeavyMae => qmc_heavy_mae(dist, &spec()?, rng),
        Algorithm::QmcCentral => qmc_central(
            dist,
            cfg.c_cen.expect("validated"),
            cfg.delta,
            epsilon,
            mode,
            calib,
            rng,
        ),
        Algorithm::AIdeal => a_ideal(dist, cutoff().max(epsilon / 4.0), epsilon, mode, calib, rng),
        Algorithm::KoTruncated => ko_truncated(dist, cutoff(), epsilon, mode, calib, rng),
        Algorithm::ClassicalMc => {
            let n = mz_mc_sample_size(cfg.c.expect("validated"), cfg.delta, epsilon, calib)?;
            let mut r = classical_mean(dist, n, rng)?;
            r.target_error = epsilon;
            Ok(r)
        }
    }
}

/// Runs `trials × |epsilons|` trials; rows are ordered by (epsilon index, trial).
pub fn run_estimate(cfg: &ExperimentConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let dist = cfg.target()?;
    let true_mean = dist.mean();
    let jobs: Vec<(usize, u64)> = (0..cfg.epsilons.len())
        .flat_map(|e| (0..cfg.trials).map(move |t| (e, t)))
        .collect();
    let run = |&(e, t): &(usize, u64)| -> Result<TrialRow> {
        let epsilon = cfg.epsilons[e];
        let r = run_trial(cfg, &dist, epsilon, &mut trial_stream(cfg.seed, e, t))?;
        Ok(TrialRow {
            dist_id: cfg.dist_id.clone(),
            algo: cfg.algorithm.as_str().to_string(),
            c: if cfg.algorithm == Algorithm::QmcCentral {
                cfg.c_cen
            } else {
                cfg.c
            },
            delta: cfg.delta,
            epsilon,
            estimate: r.estimate,
            true_mean,
            abs_error: (r.estimate - true_mean).abs(),
            quantum_calls: r.ledger.quantum_calls,
            classical_draws: r.ledger.classical_draws,
            seed: cfg.seed,
            trial: t,
        })
    };
    let rows: Vec<TrialRow> = if cfg.parallelism > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.parallelism)
            .build()
            .map_err(|e| Error::config("parallelism", e.to_string()))?;
        pool.install(|| jobs.par_iter().map(run).collect::<Result<Vec<_>>>())?
    } else {
        jobs.iter().map(run).collect::<Result<Vec<_>>>()?
    };
    let hash = cfg.hash();
    let summary = summarize(&hash, cfg.algorithm.as_str(), &cfg.epsilons, &rows);
    Ok(RunRecord {
        config: cfg.clone(),
        rows,
        summary,
    })
}
