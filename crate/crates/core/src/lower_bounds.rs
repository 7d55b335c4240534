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

//! Hidden-function instances and the classical/quantum query-cost experiments.
//!
//! An instance hides `f: [N] → {0, M}` that is either identically zero or
//! has exactly one marked point. Any estimator of `E[f(k)]` to within
//! `M/(3N)` decides which, so the cost of deciding bounds the cost of
//! estimating.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{DiscreteDistribution, Sampler};
use crate::error::{Error, Result};
use crate::ledger::OracleLedger;
use crate::qae::{qae_draw, AmplitudeQuery};
use crate::rng::{splitmix64, RngStream};
use crate::stats::{wilson_interval, ScalingFit};

/// Success level both cases must reach.
pub const SUCCESS_TARGET: f64 = 0.8;
/// Normal quantile for the reported Wilson intervals.
pub const WILSON_Z: f64 = 1.96;
/// Normal quantile of the interval that must exclude the target before the
/// search stops early. Wider than the reported one because a cell is looked
/// at once per doubling.
pub const DECISION_Z: f64 = 3.0;
/// Classical trials grow by doubling up to this multiple of the base count.
pub const MAX_TRIAL_FACTOR: u64 = 64;
/// Cap for the quantum arm, whose trials cost `O(log M)` each.
pub const QUANTUM_TRIAL_FACTOR: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaInstance {
    pub n: u64,
    pub big_value: f64,
    /// 0 encodes the all-zero function, `i ≥ 1` marks point `i`.
    pub hidden_index: u64,
}

pub fn build_sigma(n: u64, big_value: f64, hidden_index: u64) -> Result<SigmaInstance> {
    if n == 0 {
        return Err(Error::param("N", "must be at least 1"));
    }
    if big_value == 0.0 || !big_value.is_finite() {
        return Err(Error::param(
            "M",
            format!("must be finite and nonzero, got {big_value}"),
        ));
    }
    if hidden_index > n {
        return Err(Error::param(
            "hidden_index",
            format!("must be at most N = {n}, got {hidden_index}"),
        ));
    }
    Ok(SigmaInstance {
        n,
        big_value,
        hidden_index,
    })
}

impl SigmaInstance {
    pub fn is_marked(&self) -> bool {
        self.hidden_index >= 1
    }

    pub fn mean(&self) -> f64 {
        if self.is_marked() {
            self.big_value / self.n as f64
        } else {
            0.0
        }
    }

    /// Probability that a uniform query hits the marked point.
    pub fn amplitude(&self) -> f64 {
        if self.is_marked() {
            1.0 / self.n as f64
        } else {
            0.0
        }
    }

    pub fn distribution(&self) -> DiscreteDistribution {
        let q = self.amplitude();
        DiscreteDistribution::new(&[0.0, self.big_value], &[1.0 - q, q])
            .expect("valid two-point law")
    }

    /// One amplitude-estimation run on the marked fraction, charging `grid` calls.
    pub fn quantum_run(
        &self,
        grid: u64,
        rng: &mut RngStream,
        ledger: &mut OracleLedger,
    ) -> Result<f64> {
        Ok(qae_draw(
            &AmplitudeQuery::new(self.amplitude(), grid)?,
            rng,
            ledger,
        ))
    }
}

impl Sampler for SigmaInstance {
    fn sample(&self, rng: &mut RngStream, ledger: &mut OracleLedger) -> f64 {
        ledger.charge_classical(1);
        let k = rng.below(self.n) + 1;
        if k == self.hidden_index {
            self.big_value
        } else {
            0.0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
}

/// "No" iff `estimate < M/(2N)`; the threshold is the midpoint of the two means.
pub fn classify(estimate: f64, n: u64, big_value: f64) -> Answer {
    if estimate < big_value / (2.0 * n as f64) {
        Answer::No
    } else {
        Answer::Yes
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryCell {
    #[serde(rename = "N")]
    pub n: u64,
    pub cost: u64,
    pub success_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryExperiment {
    /// The smallest passing cost for each `N`.
    pub cells: Vec<QueryCell>,
    /// Every cost probed during the searches, in probe order.
    pub probes: Vec<QueryCell>,
    pub fit: ScalingFit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    /// `M`; `None` uses `M = N` so the mean gap is one.
    pub big_value: Option<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl ExperimentParams {
    fn validate(&self, n_list: &[u64]) -> Result<()> {
        if n_list.len() < 3 {
            return Err(Error::config("N_list", "need at least 3 sizes for a fit"));
        }
        if let Some(&n) = n_list.iter().find(|&&n| n == 0) {
            return Err(Error::config(
                "N_list",
                format!("sizes must be positive, got {n}"),
            ));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be positive"));
        }
        Ok(())
    }

    fn big_value(&self, n: u64) -> f64 {
        self.big_value.unwrap_or(n as f64)
    }
}

/// Stream shared by every cost probed at `(N, trial)`, so the success curve
/// is evaluated on common random numbers.
fn trial_stream(seed: u64, n: u64, trial: u64, case: u64) -> RngStream {
    RngStream::new(
        seed ^ splitmix64(n),
        splitmix64(trial.wrapping_mul(2).wrapping_add(case)),
    )
}

/// Estimates `min(success on case false, success on case true)` at one cost;
/// `correct(trial, case)` runs one trial.
///
/// Trials start at `base` and double while the [`DECISION_Z`] Wilson
/// interval still straddles the target, up to `max_trials`; at the cap the
/// point estimate decides. The cell reports the [`WILSON_Z`] interval.
pub fn success_at<F>(n: u64, cost: u64, base: u64, max_trials: u64, correct: F) -> QueryCell
where
    F: Fn(u64, bool) -> bool + Sync,
{
    let mut trials = base;
    loop {
        let count = |marked: bool| -> u64 {
            (0..trials)
                .into_par_iter()
                .filter(|&t| correct(t, marked))
                .count() as u64
        };
        let (s0, s1) = (count(false), count(true));
        let worst = s0.min(s1);
        let (dlo, dhi) = wilson_interval(worst, trials, DECISION_Z);
        let decided = dlo > SUCCESS_TARGET || dhi < SUCCESS_TARGET;
        if decided || trials >= max_trials {
            let (lo, hi) = wilson_interval(worst, trials, WILSON_Z);
            return QueryCell {
                n,
                cost,
                success_rate: worst as f64 / trials as f64,
                ci_lo: lo,
                ci_hi: hi,
                trials,
            };
        }
        trials *= 2;
    }
}

pub fn passes(cell: &QueryCell) -> bool {
    cell.success_rate >= SUCCESS_TARGET
}

fn classical_cell(n: u64, samples: u64, params: &ExperimentParams) -> QueryCell {
    let m = params.big_value(n);
    success_at(
        n,
        samples,
        params.trials,
        params.trials * MAX_TRIAL_FACTOR,
        |t, marked| {
            let mut rng = trial_stream(params.seed, n, t, 0);
            let hidden = if marked { rng.below(n) + 1 } else { 0 };
            let inst = SigmaInstance {
                n,
                big_value: m,
                hidden_index: hidden,
            };
            let mut ledger = OracleLedger::new();
            let mean = (0..samples)
                .map(|_| inst.sample(&mut rng, &mut ledger))
                .sum::<f64>()
                / samples as f64;
            let expected = if marked { Answer::Yes } else { Answer::No };
            classify(mean, n, m) == expected
        },
    )
}

fn quantum_cell(n: u64, grid: u64, params: &ExperimentParams) -> QueryCell {
    let m = params.big_value(n);
    success_at(
        n,
        grid,
        params.trials,
        params.trials * QUANTUM_TRIAL_FACTOR,
        |t, marked| {
            let mut rng = trial_stream(params.seed, n, t, 1);
            let inst = SigmaInstance {
                n,
                big_value: m,
                hidden_index: if marked { 1 } else { 0 },
            };
            let mut ledger = OracleLedger::new();
            let a_hat = inst
                .quantum_run(grid, &mut rng, &mut ledger)
                .expect("grid is a power of two");
            let expected = if marked { Answer::Yes } else { Answer::No };
            classify(m * a_hat, n, m) == expected
        },
    )
}

/// Smallest cost whose probe passes: doubling from 1 to bracket, then bisection.
///
/// `probe` is called sequentially and every result is appended to `probes`.
pub fn bisect_min_cost<P>(mut probe: P, probes: &mut Vec<QueryCell>) -> QueryCell
where
    P: FnMut(u64) -> QueryCell,
{
    let mut run = |s: u64| {
        let c = probe(s);
        probes.push(c);
        c
    };
    let mut hi = 1;
    let mut hi_cell = run(hi);
    while !passes(&hi_cell) {
        hi *= 2;
        hi_cell = run(hi);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let c = run(mid);
        if passes(&c) {
            hi = mid;
            hi_cell = c;
        } else {
            lo = mid;
        }
    }
    hi_cell
}

/// Smallest classical sample count reaching the success target for one `N`.
pub fn classical_required_n(
    n: u64,
    params: &ExperimentParams,
    probes: &mut Vec<QueryCell>,
) -> QueryCell {
    bisect_min_cost(|s| classical_cell(n, s, params), probes)
}

/// Smallest power-of-two QAE register reaching the success target for one `N`.
pub fn quantum_required_grid(
    n: u64,
    params: &ExperimentParams,
    probes: &mut Vec<QueryCell>,
) -> QueryCell {
    let mut grid = 2;
    loop {
        let c = quantum_cell(n, grid, params);
        probes.push(c);
        if passes(&c) || grid >= 1 << 40 {
            return c;
        }
        grid *= 2;
    }
}

fn fit_cells(cells: &[QueryCell]) -> Result<ScalingFit> {
    let xs: Vec<f64> = cells.iter().map(|c| c.n as f64).collect();
    let ys: Vec<f64> = cells.iter().map(|c| c.cost as f64).collect();
    ScalingFit::log_log(&xs, &ys)
}

pub fn classical_query_experiment(
    n_list: &[u64],
    params: &ExperimentParams,
) -> Result<QueryExperiment> {
    params.validate(n_list)?;
    let mut probes = Vec::new();
    let cells: Vec<QueryCell> = n_list
        .iter()
        .map(|&n| classical_required_n(n, params, &mut probes))
        .collect();
    Ok(QueryExperiment {
        fit: fit_cells(&cells)?,
        cells,
        probes,
    })
}

pub fn quantum_query_experiment(
    n_list: &[u64],
    params: &ExperimentParams,
) -> Result<QueryExperiment> {
    params.validate(n_list)?;
    let mut probes = Vec::new();
    let cells: Vec<QueryCell> = n_list
        .iter()
        .map(|&n| quantum_required_grid(n, params, &mut probes))
        .collect();
    Ok(QueryExperiment {
        fit: fit_cells(&cells)?,
        cells,
        probes,
    })
}

impl QueryExperiment {
    /// CSV with header `N,cost,success_rate,ci_lo,ci_hi`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["N", "cost", "success_rate", "ci_lo", "ci_hi"])?;
        for c in &self.cells {
            w.write_record([
                c.n.to_string(),
                c.cost.to_string(),
                format!("{:.6}", c.success_rate),
                format!("{:.6}", c.ci_lo),
                format!("{:.6}", c.ci_hi),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
