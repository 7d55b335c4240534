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

//! Mean estimators for variables with only a bounded `(1+δ)`-th moment.
//!
//! The algorithms see the moment bound `C`, never the true moments. Tests
//! check separately that `C` dominates the moment of each input.

use serde::{Deserialize, Serialize};

use crate::bounds::{cutoff_y, is_degenerate, truncated_l2_bound, Calibration};
use crate::dist::{dyadic_decompose, DiscreteDistribution, Sampler, Truncation};
use crate::error::{Error, Result};
use crate::estimators::{median_boost, q_mean_sigma, EstimateReport, EstimatorMode, Provenance};
use crate::ledger::OracleLedger;
use crate::rng::RngStream;
use crate::stats;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeavyTailSpec {
    /// Upper bound on `E|X|^{1+δ}`.
    pub c: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub mode: EstimatorMode,
    #[serde(default)]
    pub calibration: Calibration,
}

impl HeavyTailSpec {
    pub fn new(c: f64, delta: f64, epsilon: f64, mode: EstimatorMode) -> Result<Self> {
        let spec = HeavyTailSpec {
            c,
            delta,
            epsilon,
            mode,
            calibration: Calibration::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::param(
                "C",
                format!("must be positive, got {}", self.c),
            ));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::param(
                "delta",
                format!("must lie in (0, 1], got {}", self.delta),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::param(
                "epsilon",
                format!("must be positive, got {}", self.epsilon),
            ));
        }
        if self.mode == EstimatorMode::Classical {
            return Err(Error::param(
                "mode",
                "heavy-tail estimators need a quantum mode",
            ));
        }
        Ok(())
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        HeavyTailSpec { epsilon, ..*self }
    }

    pub fn is_degenerate(&self) -> bool {
        is_degenerate(self.c, self.delta, self.epsilon)
    }

    pub fn cutoff(&self) -> f64 {
        cutoff_y(self.c, self.delta, self.epsilon)
    }

    /// `n` handed to the σ/n estimator for each sign part.
    pub fn inner_n(&self) -> u64 {
        let sigma_bound = truncated_l2_bound(self.c, self.delta, self.epsilon).sqrt();
        ((self.calibration.quantum * sigma_bound / (self.epsilon / 8.0)).ceil() as u64).max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipBounds {
    pub lo: f64,
    pub hi: f64,
}

impl ClipBounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::param(
                "clip",
                format!("need lo < hi, got [{lo}, {hi}]"),
            ));
        }
        Ok(ClipBounds { lo, hi })
    }

    /// `±C^{1/(1+δ)}`, a bound on `|E[X]|` by Jensen.
    pub fn from_moment(c: f64, delta: f64) -> Self {
        let b = c.powf(1.0 / (1.0 + delta));
        ClipBounds { lo: -b, hi: b }
    }

    pub fn clip(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

fn zero_report(algorithm: &str, spec: &HeavyTailSpec, rng: &RngStream) -> EstimateReport {
    EstimateReport {
        estimate: 0.0,
        ledger: OracleLedger::new(),
        target_error: spec.epsilon,
        provenance: Provenance::new(algorithm, spec.mode, rng).with("degenerate", 1.0),
    }
}

/// Truncated estimator with additive error `ε` and success probability ≥ 0.8.
///
/// Each sign part `X⁺`, `X⁻` is cut at `y = (8C/ε)^{1/δ}` (values `≥ y` are
/// zeroed, costing at most `ε/8` of bias) and estimated to `ε/8` by the σ/n
/// estimator with `n` taken from the second-moment bound of the cut
/// variable. Each part therefore errs by at most `ε/4`.
pub fn qmc_heavy(
    target: &DiscreteDistribution,
    spec: &HeavyTailSpec,
    rng: &mut RngStream,
) -> Result<EstimateReport> {
    spec.validate()?;
    if spec.is_degenerate() {
        return Ok(zero_report("qmc_heavy", spec, rng));
    }
    let y = spec.cutoff();
    let n = spec.inner_n();
    let provenance = Provenance::new("qmc_heavy", spec.mode, rng)
        .with("C", spec.c)
        .with("delta", spec.delta)
        .with("epsilon", spec.epsilon)
        .with("y", y)
        .with("n", n as f64);
    let mut ledger = OracleLedger::new();
    let mut estimate = 0.0;
    for (id, (part, sign)) in [
        (target.positive_part(), 1.0),
        (target.negative_part(), -1.0),
    ]
    .into_iter()
    .enumerate()
    {
        let z = part.truncate(Truncation::Below(y))?;
        let r = q_mean_sigma(
            &z,
            n,
            spec.mode,
            &spec.calibration,
            &mut rng.child(id as u64),
        )?;
        ledger += r.ledger;
        estimate += sign * r.estimate;
    }
    Ok(EstimateReport {
        estimate,
        ledger,
        target_error: spec.epsilon,
        provenance,
    })
}

/// `reps` for the mean-absolute-error variant: smallest odd `≥ κ_pl·ln(4b/ε)`.
pub fn mae_reps(spec: &HeavyTailSpec) -> u64 {
    let b = spec.c.powf(1.0 / (1.0 + spec.delta));
    let raw = (spec.calibration.powering * (4.0 * b / spec.epsilon).ln())
        .ceil()
        .max(1.0) as u64;
    raw | 1
}

/// Median of `reps` clipped runs.
pub fn clip_and_boost<F>(
    reps: u64,
    bounds: ClipBounds,
    rng: &mut RngStream,
    mut run: F,
) -> Result<EstimateReport>
where
    F: FnMut(&mut RngStream) -> Result<EstimateReport>,
{
    median_boost(reps, rng, |child| {
        let mut r = run(child)?;
        r.estimate = bounds.clip(r.estimate);
        Ok(r)
    })
}

/// Estimator whose mean absolute error is at most `ε`.
///
/// Runs [`qmc_heavy`] at `ε/2`, clips every output to `±C^{1/(1+δ)}` and
/// reports the median. The clip bounds the damage of a failed run, so the
/// boosted failure probability translates into an `ε/2` MAE contribution.
pub fn qmc_heavy_mae(
    target: &DiscreteDistribution,
    spec: &HeavyTailSpec,
    rng: &mut RngStream,
) -> Result<EstimateReport> {
    spec.validate()?;
    let inner = spec.with_epsilon(spec.epsilon / 2.0);
    let bounds = ClipBounds::from_moment(spec.c, spec.delta);
    let reps = mae_reps(spec);
    let mut r = clip_and_boost(reps, bounds, rng, |child| qmc_heavy(target, &inner, child))?;
    r.target_error = spec.epsilon;
    r.provenance.algorithm = "qmc_heavy_mae".into();
    r.provenance = r.provenance.with("clip", bounds.hi);
    Ok(r)
}

/// Variant for a bound `C_cen` on the central moment `E|X − μ|^{1+δ}`.
///
/// One classical draw `v_0` recentres the variable; with probability at least
/// 8/9 it lands within `(9C_cen)^{1/(1+δ)}` of the mean, and then the shifted
/// variable has raw moment at most `9·2^{1+δ}·C_cen`.
pub fn qmc_central(
    target: &DiscreteDistribution,
    c_cen: f64,
    delta: f64,
    epsilon: f64,
    mode: EstimatorMode,
    calibration: &Calibration,
    rng: &mut RngStream,
) -> Result<EstimateReport> {
    let mut spec = HeavyTailSpec::new(9.0 * 2f64.powf(1.0 + delta) * c_cen, delta, epsilon, mode)?;
    spec.calibration = *calibration;
    let mut ledger = OracleLedger::new();
    let v0 = target.sample(rng, &mut ledger);
    let shifted = target.shift(v0);
    let mut r = qmc_heavy(&shifted, &spec, &mut rng.child(0))?;
    r.estimate += v0;
    r.ledger += ledger;
    r.provenance.algorithm = "qmc_central".into();
    r.provenance = r.provenance.with("v0", v0).with("C_cen", c_cen);
    Ok(r)
}

/// `(9·C_cen)^{1/(1+δ)}`: the recentring draw lands farther than this from
/// the mean with probability at most 1/9.
pub fn central_event_radius(c_cen: f64, delta: f64) -> f64 {
    (9.0 * c_cen).powf(1.0 / (1.0 + delta))
}

/// Layered estimator over the dyadic decomposition from `x_0 = ε/8` to `y`.
///
/// Every relevant layer (`q_i·x_i > ε/(100K)`) is estimated to `ε/(100K)`
/// with failure probability `1/(100K)` by a median-boosted σ/n estimator;
/// the remaining layers, the region below `x_0` and the tail above `y` are
/// not estimated. The caller picks `y` so the tail mean is at most `ε/8`.
pub fn a_ideal(
    target: &DiscreteDistribution,
    y: f64,
    epsilon: f64,
    mode: EstimatorMode,
    calibration: &Calibration,
    rng: &mut RngStream,
) -> Result<EstimateReport> {
    let dec = dyadic_decompose(target, epsilon, y)?;
    let k = dec.k as f64;
    let threshold = dec.threshold();
    let reps = stats::median_reps(0.1, 1.0 / (100.0 * k));
    let mut ledger = OracleLedger::new();
    let mut estimate = 0.0;
    let mut active = 0u32;
    for i in dec.active_layers() {
        active += 1;
        let (lo, hi) = (dec.x_grid[i - 1], dec.x_grid[i]);
        let layer = target.truncate(Truncation::Window(lo, hi))?;
        let n = ((hi * dec.q[i - 1].sqrt() / threshold).ceil() as u64).max(1);
        let r = median_boost(reps, &mut rng.child(i as u64), |child| {
            q_mean_sigma(&layer, n, mode, calibration, child)
        })?;
        ledger += r.ledger;
        estimate += r.estimate;
    }
    let provenance = Provenance::new("a_ideal", mode, rng)
        .with("epsilon", epsilon)
        .with("y", y)
        .with("K", k)
        .with("active_layers", active as f64)
        .with("reps", reps as f64)
        .with("dropped_weight", dec.dropped_weight());
    Ok(EstimateReport {
        estimate,
        ledger,
        target_error: epsilon,
        provenance,
    })
}

/// σ/n estimator run once on `X·1[X < y]` with `n = ⌈σ_y/(ε/2)⌉`.
///
/// No layering and no boosting; the caller picks `y` so the dropped tail
/// mean stays within the remaining `ε/2`.
pub fn ko_truncated(
    target: &DiscreteDistribution,
    y: f64,
    epsilon: f64,
    mode: EstimatorMode,
    calibration: &Calibration,
    rng: &mut RngStream,
) -> Result<EstimateReport> {
    if !(epsilon > 0.0) {
        return Err(Error::param(
            "epsilon",
            format!("must be positive, got {epsilon}"),
        ));
    }
    let z = target.truncate(Truncation::Below(y))?;
    let n = ((z.std_dev() / (epsilon / 2.0)).ceil() as u64).max(1);
    let mut r = q_mean_sigma(&z, n, mode, calibration, &mut rng.child(0))?;
    r.target_error = epsilon;
    r.provenance = Provenance::new("ko_truncated", mode, rng)
        .with("epsilon", epsilon)
        .with("y", y)
        .with("n", n as f64);
    Ok(r)
}
