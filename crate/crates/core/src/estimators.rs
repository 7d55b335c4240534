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

//! Mean-estimation engines built on the simulated amplitude-estimation kernel.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bounds::Calibration;
use crate::dist::{DiscreteDistribution, Sampler};
use crate::error::{Error, Result};
use crate::ledger::OracleLedger;
use crate::qae::{qae_draw, AmplitudeQuery};
use crate::rng::RngStream;
use crate::stats;

/// Largest QAE register the layered estimator will request.
pub const MAX_GRID: u64 = 1 << 52;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    SimulatedQae,
    /// Test-only stand-in that satisfies the σ/n contract by construction.
    IdealContract,
    Classical,
}

impl EstimatorMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorMode::SimulatedQae => "simulated_qae",
            EstimatorMode::IdealContract => "ideal_contract",
            EstimatorMode::Classical => "classical",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub algorithm: String,
    pub mode: EstimatorMode,
    pub seed: u64,
    pub stream: u64,
    pub ideal_contract: bool,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl Provenance {
    pub fn new(algorithm: &str, mode: EstimatorMode, rng: &RngStream) -> Self {
        Provenance {
            algorithm: algorithm.to_string(),
            mode,
            seed: rng.seed(),
            stream: rng.stream_id(),
            ideal_contract: mode == EstimatorMode::IdealContract,
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub ledger: OracleLedger,
    pub target_error: f64,
    pub provenance: Provenance,
}

/// Flat JSON form of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub estimate: f64,
    pub quantum_calls: u64,
    pub classical_draws: u64,
    pub target_error: f64,
    pub mode: EstimatorMode,
    pub seed: u64,
}

impl EstimateReport {
    pub fn to_json(&self) -> ReportJson {
        ReportJson {
            estimate: self.estimate,
            quantum_calls: self.ledger.quantum_calls,
            classical_draws: self.ledger.classical_draws,
            target_error: self.target_error,
            mode: self.provenance.mode,
            seed: self.provenance.seed,
        }
    }
}

/// Sample mean of `n` i.i.d. draws from `source`.
pub fn classical_mean(source: &dyn Sampler, n: u64, rng: &mut RngStream) -> Result<EstimateReport> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let provenance =
        Provenance::new("classical_mean", EstimatorMode::Classical, rng).with("n", n as f64);
    let mut ledger = OracleLedger::new();
    let mut sum = 0.0;
    for _ in 0..n {
        sum += source.sample(rng, &mut ledger);
    }
    Ok(EstimateReport {
        estimate: sum / n as f64,
        ledger,
        target_error: 0.0,
        provenance,
    })
}

/// One amplitude-estimation run on `a = E[X]` for `X ∈ [0, 1]`.
pub fn q_mean_bounded(
    dist: &DiscreteDistribution,
    grid: u64,
    rng: &mut RngStream,
) -> Result<EstimateReport> {
    if dist.min_value() < 0.0 || dist.max_value() > 1.0 {
        return Err(Error::param("dist", "support must lie in [0, 1]"));
    }
    let query = AmplitudeQuery::new(dist.mean().clamp(0.0, 1.0), grid)?;
    let provenance =
        Provenance::new("q_mean_bounded", EstimatorMode::SimulatedQae, rng).with("M", grid as f64);
    let mut ledger = OracleLedger::new();
    let estimate = qae_draw(&query, rng, &mut ledger);
    Ok(EstimateReport {
        estimate,
        ledger,
        target_error: query.error_bound(),
        provenance,
    })
}

/// Mean estimator honouring the contract `|err| ≤ σ/n` with probability ≥ 0.9.
///
/// Simulated mode centres the variable on the median of three classical
/// draws, splits the positive and negative excursions into dyadic layers
/// of width proportional to `T = σ/n`, and runs median-boosted amplitude
/// estimation per layer. Layers are dropped while their total contribution
/// stays below `T/8`, and register sizes are grown greedily until the summed
/// per-layer error bounds fall below `7T/8`. The layer statistics steer the
/// budget; the estimates themselves only see QAE outcomes.
///
/// Ideal mode returns `truth + (σ/n)·u` with probability 0.9 and
/// `truth + 3(σ/n)·u` otherwise, `u ~ U[−1, 1]`, charging `⌈κ_ko·n⌉` calls.
pub fn q_mean_sigma(
    dist: &DiscreteDistribution,
    n: u64,
    mode: EstimatorMode,
    calibration: &Calibration,
    rng: &mut RngStream,
) -> Result<EstimateReport> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let sigma = dist.std_dev();
    let target = sigma / n as f64;
    let provenance = Provenance::new("q_mean_sigma", mode, rng)
        .with("n", n as f64)
        .with("sigma", sigma);
    let mut ledger = OracleLedger::new();
    if dist.is_point_mass() || sigma == 0.0 {
        return Ok(EstimateReport {
            estimate: dist.mean(),
            ledger,
            target_error: 0.0,
            provenance,
        });
    }
    let estimate = match mode {
        EstimatorMode::IdealContract => {
            ledger.charge_quantum((calibration.ko * n as f64).ceil() as u64);
            let u = 2.0 * rng.uniform() - 1.0;
            let scale = if rng.uniform() < 0.9 { 1.0 } else { 3.0 };
            dist.mean() + scale * target * u
        }
        EstimatorMode::SimulatedQae => layered_estimate(dist, target, rng, &mut ledger)?,
        EstimatorMode::Classical => {
            return Err(Error::param("mode", "q_mean_sigma needs a quantum mode"));
        }
    };
    Ok(EstimateReport {
        estimate,
        ledger,
        target_error: target,
        provenance,
    })
}

#[derive(Clone, Copy, Debug)]
struct Layer {
    /// Upper edge; the layer variable is `W·1(layer)/x ∈ [0, 1]`.
    x: f64,
    mu: f64,
    contribution: f64,
    sign: f64,
    grid: u64,
}

impl Layer {
    fn current_error(&self) -> f64 {
        if self.grid == 0 {
            self.contribution
        } else {
            self.error(self.grid)
        }
    }

    fn error(&self, grid: u64) -> f64 {
        let m = grid as f64;
        self.x * (PI * (self.mu * (1.0 - self.mu)).max(0.0).sqrt() / m + PI * PI / (m * m))
    }
}

fn layers_of(values: impl Iterator<Item = (f64, f64)>, x0: f64, sign: f64) -> Vec<Layer> {
    let mut sums: BTreeMap<i32, f64> = BTreeMap::new();
    for (w, p) in values {
        if w <= 0.0 {
            continue;
        }
        let mut j = if w < x0 {
            0
        } else {
            (w / x0).log2().floor() as i32 + 1
        };
        while j > 0 && w < x0 * 2f64.powi(j - 1) {
            j -= 1;
        }
        while w >= x0 * 2f64.powi(j) {
            j += 1;
        }
        *sums.entry(j).or_insert(0.0) += p * w;
    }
    sums.into_iter()
        .map(|(j, s)| {
            let x = x0 * 2f64.powi(j);
            Layer {
                x,
                mu: (s / x).min(1.0),
                contribution: s,
                sign,
                grid: 2,
            }
        })
        .collect()
}

struct Candidate {
    gain_per_call: f64,
    index: usize,
    grid: u64,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain_per_call
            .total_cmp(&other.gain_per_call)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Chooses the active layers and their register sizes for accuracy `target`.
///
/// A skipped layer costs its contribution as bias; an active one costs its
/// QAE error bound. Starting from everything skipped, the cheapest error
/// reduction per oracle call is bought until the total is at most `target`.
fn plan_layers(dist: &DiscreteDistribution, centre: f64, target: f64) -> Vec<Layer> {
    let x0 = target / 4.0;
    let mut layers = layers_of(dist.atoms().map(|(v, p)| (v - centre, p)), x0, 1.0);
    layers.extend(layers_of(
        dist.atoms().map(|(v, p)| (centre - v, p)),
        x0,
        -1.0,
    ));
    for l in &mut layers {
        l.grid = 0;
    }
    let mut total: f64 = layers.iter().map(|l| l.contribution).sum();
    let mut heap = BinaryHeap::new();
    for (i, l) in layers.iter().enumerate() {
        if let Some(c) = next_move(l, i) {
            heap.push(c);
        }
    }
    while total > target {
        let Some(c) = heap.pop() else { break };
        let l = &mut layers[c.index];
        total -= l.current_error() - l.error(c.grid);
        l.grid = c.grid;
        if let Some(next) = next_move(l, c.index) {
            heap.push(next);
        }
    }
    layers.retain(|l| l.grid > 0);
    layers
}

/// Best next step for one layer: doubling its register, or for a skipped
/// layer, activating it at the register size with the best gain per call.
fn next_move(l: &Layer, index: usize) -> Option<Candidate> {
    if l.grid == 0 {
        let mut best: Option<Candidate> = None;
        let mut m = 2;
        while m <= MAX_GRID {
            let gain = l.contribution - l.error(m);
            if gain > 0.0 {
                let ratio = gain / m as f64;
                if best.as_ref().is_some_and(|b| b.gain_per_call >= ratio) {
                    break;
                }
                best = Some(Candidate {
                    gain_per_call: ratio,
                    index,
                    grid: m,
                });
            }
            m *= 2;
        }
        best
    } else if l.grid < MAX_GRID {
        let gain = l.error(l.grid) - l.error(2 * l.grid);
        Some(Candidate {
            gain_per_call: gain / l.grid as f64,
            index,
            grid: 2 * l.grid,
        })
    } else {
        None
    }
}

fn layered_estimate(
    dist: &DiscreteDistribution,
    target: f64,
    rng: &mut RngStream,
    ledger: &mut OracleLedger,
) -> Result<f64> {
    let draws: Vec<f64> = (0..3).map(|_| dist.sample(rng, ledger)).collect();
    let centre = stats::median(&draws);
    let active = plan_layers(dist, centre, target);
    if active.is_empty() {
        return Ok(centre);
    }
    let reps = stats::median_reps(1.0 - 8.0 / (PI * PI), 1.0 / (20.0 * active.len() as f64));
    let mut estimate = centre;
    for layer in &active {
        let query = AmplitudeQuery::new(layer.mu, layer.grid)?;
        let outcomes: Vec<f64> = (0..reps).map(|_| qae_draw(&query, rng, ledger)).collect();
        estimate += layer.sign * layer.x * stats::median(&outcomes);
    }
    Ok(estimate)
}

/// Budget the simulated mode commits to for one call.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaPlan {
    pub active_layers: usize,
    pub reps: u64,
    /// `Σ M_i` over active layers.
    pub grid_total: u64,
}

impl SigmaPlan {
    pub fn quantum_calls(&self) -> u64 {
        self.reps * self.grid_total
    }
}

/// Plan simulated mode uses on `dist` at accuracy `σ/n` once the centre is
/// fixed at `centre`. The three centring draws are not included.
pub fn q_mean_sigma_plan(dist: &DiscreteDistribution, n: u64, centre: f64) -> SigmaPlan {
    let target = dist.std_dev() / n as f64;
    if dist.is_point_mass() || target == 0.0 {
        return SigmaPlan {
            active_layers: 0,
            reps: 0,
            grid_total: 0,
        };
    }
    let active = plan_layers(dist, centre, target);
    if active.is_empty() {
        return SigmaPlan {
            active_layers: 0,
            reps: 0,
            grid_total: 0,
        };
    }
    SigmaPlan {
        active_layers: active.len(),
        reps: stats::median_reps(1.0 - 8.0 / (PI * PI), 1.0 / (20.0 * active.len() as f64)),
        grid_total: active.iter().map(|l| l.grid).sum(),
    }
}

/// Median of `reps` independent runs, each on its own child stream.
pub fn median_boost<F>(reps: u64, rng: &mut RngStream, mut run: F) -> Result<EstimateReport>
where
    F: FnMut(&mut RngStream) -> Result<EstimateReport>,
{
    if reps == 0 || reps.is_multiple_of(2) {
        return Err(Error::param(
            "reps",
            format!("must be a positive odd integer, got {reps}"),
        ));
    }
    let mut ledger = OracleLedger::new();
    let mut estimates = Vec::with_capacity(reps as usize);
    let mut first: Option<EstimateReport> = None;
    for i in 0..reps {
        let mut child = rng.child(i);
        let r = run(&mut child)?;
        ledger += r.ledger;
        estimates.push(r.estimate);
        first.get_or_insert(r);
    }
    let first = first.expect("reps >= 1");
    Ok(EstimateReport {
        estimate: stats::median(&estimates),
        ledger,
        target_error: first.target_error,
        provenance: first.provenance.with("reps", reps as f64),
    })
}

/// Smallest odd integer `≥ κ_pl · ln(1/η)`.
pub fn powering_reps(eta: f64, calibration: &Calibration) -> u64 {
    let raw = (calibration.powering * (1.0 / eta).ln()).ceil().max(1.0) as u64;
    if raw.is_multiple_of(2) {
        raw + 1
    } else {
        raw
    }
}
