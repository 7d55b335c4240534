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

//! Finite discrete distributions and the continuous families they approximate.
//!
//! [`DiscreteDistribution`] is kept in canonical form: values strictly
//! increasing, no zero-mass atoms, masses summing to one. Truncation maps the
//! cut-away atoms to zero and merges them, so two routes to the same law
//! compare equal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::OracleLedger;
use crate::rng::RngStream;

const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution {
    values: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

/// Region kept by [`DiscreteDistribution::truncate`]; everything else is sent to 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation {
    /// Keep `v < x`.
    Below(f64),
    /// Keep `x <= v < y`.
    Window(f64, f64),
    /// Keep `v >= y`.
    Above(f64),
}

impl DiscreteDistribution {
    /// Builds a distribution from parallel slices. Duplicate values are merged,
    /// zero masses dropped and the total renormalized after a tolerance check.
    pub fn new(values: &[f64], probs: &[f64]) -> Result<Self> {
        if values.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} values but {} probabilities",
                values.len(),
                probs.len()
            )));
        }
        if values.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let mut pairs = Vec::with_capacity(values.len());
        for (&v, &p) in values.iter().zip(probs) {
            if !v.is_finite() {
                return Err(Error::InvalidDistribution(format!("non-finite value {v}")));
            }
            if !(0.0..=1.0 + SUM_TOLERANCE).contains(&p) || p.is_nan() {
                return Err(Error::InvalidDistribution(format!(
                    "probability {p} outside [0, 1]"
                )));
            }
            if p > 0.0 {
                pairs.push((v, p));
            }
        }
        let total: f64 = pairs.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self::from_unnormalized(pairs))
    }

    pub fn point_mass(value: f64) -> Self {
        Self::from_unnormalized(vec![(value, 1.0)])
    }

    /// Uniform law on the given values.
    pub fn uniform(values: &[f64]) -> Result<Self> {
        let p = 1.0 / values.len().max(1) as f64;
        Self::new(values, &vec![p; values.len()])
    }

    /// Bernoulli law on `{0, 1}`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(&[0.0, 1.0], &[1.0 - p, p])
    }

    fn from_unnormalized(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut probs: Vec<f64> = Vec::with_capacity(pairs.len());
        for (v, p) in pairs {
            if p <= 0.0 {
                continue;
            }
            match values.last() {
                // -0.0 and 0.0 collapse to one atom.
                Some(&last) if last == v => *probs.last_mut().unwrap() += p,
                _ => {
                    values.push(if v == 0.0 { 0.0 } else { v });
                    probs.push(p);
                }
            }
        }
        // Sums already within rounding of 1 are left alone so that
        // serialization round-trips are exact.
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-14 {
            for p in &mut probs {
                *p /= total;
            }
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        DiscreteDistribution {
            values,
            probs,
            cumulative,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }

    pub fn max_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.min_value() >= 0.0
    }

    pub fn is_point_mass(&self) -> bool {
        self.values.len() == 1
    }

    pub fn mean(&self) -> f64 {
        self.atoms().map(|(v, p)| v * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.atoms().map(|(v, p)| p * (v - mu) * (v - mu)).sum()
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().max(0.0).sqrt()
    }

    /// `Σ p_i · (v_i − shift)^p`, with `shift` the mean when `centered`.
    ///
    /// When `absolute` is false and `p` is not an integer, negative bases use
    /// the odd extension `sign(b)·|b|^p`.
    pub fn moment(&self, p: f64, absolute: bool, centered: bool) -> f64 {
        let shift = if centered { self.mean() } else { 0.0 };
        self.atoms()
            .map(|(v, w)| w * power(v - shift, p, absolute))
            .sum()
    }

    /// `Σ_{v_i ≥ y} p_i · v_i`.
    pub fn tail_mean(&self, y: f64) -> Result<f64> {
        self.require_nonnegative()?;
        let start = self.values.partition_point(|&v| v < y);
        Ok(self.values[start..]
            .iter()
            .zip(&self.probs[start..])
            .map(|(v, p)| v * p)
            .sum())
    }

    /// Total mass on values in `[lo, hi)`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        let a = self.values.partition_point(|&v| v < lo);
        let b = self.values.partition_point(|&v| v < hi);
        if b <= a {
            0.0
        } else {
            self.probs[a..b].iter().sum()
        }
    }

    pub fn truncate(&self, mode: Truncation) -> Result<Self> {
        self.require_nonnegative()?;
        let keep: Box<dyn Fn(f64) -> bool> = match mode {
            Truncation::Below(x) => Box::new(move |v| v < x),
            Truncation::Window(x, y) => {
                if x > y {
                    return Err(Error::param(
                        "window",
                        format!("lower edge {x} exceeds upper edge {y}"),
                    ));
                }
                Box::new(move |v| x <= v && v < y)
            }
            Truncation::Above(y) => Box::new(move |v| v >= y),
        };
        Ok(self.map(|v| if keep(v) { v } else { 0.0 }))
    }

    /// Law of `max(X, 0)`.
    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(0.0))
    }

    /// Law of `max(−X, 0)`.
    pub fn negative_part(&self) -> Self {
        self.map(|v| (-v).max(0.0))
    }

    /// Law of `X − c`.
    pub fn shift(&self, c: f64) -> Self {
        self.map(|v| v - c)
    }

    /// Law of `f(X)`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_unnormalized(self.atoms().map(|(v, p)| (f(v), p)).collect())
    }

    /// Value at cumulative level `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.values[i.min(self.values.len() - 1)]
    }

    pub(crate) fn require_nonnegative(&self) -> Result<()> {
        if self.min_value() < 0.0 {
            Err(Error::NegativeSupport(self.min_value()))
        } else {
            Ok(())
        }
    }

    pub fn to_doc(&self) -> DistributionDoc {
        DistributionDoc {
            version: DOC_VERSION,
            kind: DistKind::Discrete,
            values: Some(self.values.clone()),
            probs: Some(self.probs.iter().map(|p| format!("{p:.16e}")).collect()),
            alpha: None,
            x_min: None,
            big_value: None,
            inv_prob: None,
        }
    }
}

fn power(b: f64, p: f64, absolute: bool) -> f64 {
    if absolute {
        b.abs().powf(p)
    } else if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
        b.powi(p as i32)
    } else {
        b.signum() * b.abs().powf(p)
    }
}

/// Free-function form of [`DiscreteDistribution::moment`].
pub fn exact_moment(dist: &DiscreteDistribution, p: f64, absolute: bool, centered: bool) -> f64 {
    dist.moment(p, absolute, centered)
}

/// Anything that can emit i.i.d. draws; each draw costs one classical query.
pub trait Sampler {
    fn sample(&self, rng: &mut RngStream, ledger: &mut OracleLedger) -> f64;
}

impl Sampler for DiscreteDistribution {
    fn sample(&self, rng: &mut RngStream, ledger: &mut OracleLedger) -> f64 {
        ledger.charge_classical(1);
        self.quantile(rng.uniform())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoModel {
    pub x_min: f64,
    pub alpha: f64,
}

impl ParetoModel {
    pub fn new(x_min: f64, alpha: f64) -> Result<Self> {
        if !(x_min > 0.0 && x_min.is_finite()) {
            return Err(Error::param(
                "x_min",
                format!("must be positive, got {x_min}"),
            ));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param(
                "alpha",
                format!("must be positive, got {alpha}"),
            ));
        }
        Ok(ParetoModel { x_min, alpha })
    }

    pub fn survival(&self, x: f64) -> f64 {
        if x <= self.x_min {
            1.0
        } else {
            (self.x_min / x).powf(self.alpha)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    /// `E[X^p] = α·x_min^p/(α − p)`, `None` when `p ≥ α`.
    pub fn moment(&self, p: f64) -> Option<f64> {
        (p < self.alpha).then(|| self.alpha * self.x_min.powf(p) / (self.alpha - p))
    }

    pub fn mean(&self) -> Option<f64> {
        self.moment(1.0)
    }

    /// `E[X · 1(X ≥ y)]` for `y ≥ x_min`; requires `α > 1`.
    pub fn tail_mean(&self, y: f64) -> Option<f64> {
        if self.alpha <= 1.0 {
            return None;
        }
        let y = y.max(self.x_min);
        Some(
            self.alpha * self.x_min.powf(self.alpha) * y.powf(1.0 - self.alpha)
                / (self.alpha - 1.0),
        )
    }

    /// `E[min(X, cap)]`; finite for every α.
    pub fn clamped_mean(&self, cap: f64) -> f64 {
        if cap <= self.x_min {
            return cap;
        }
        // E[min(X, c)] = x_min + ∫_{x_min}^{c} S(x) dx
        let a = self.alpha;
        let integral = if (a - 1.0).abs() < 1e-12 {
            self.x_min * (cap / self.x_min).ln()
        } else {
            self.x_min * (1.0 - (self.x_min / cap).powf(a - 1.0)) / (a - 1.0)
        };
        self.x_min + integral
    }
}

impl Sampler for ParetoModel {
    fn sample(&self, rng: &mut RngStream, ledger: &mut OracleLedger) -> f64 {
        ledger.charge_classical(1);
        self.x_min * rng.uniform_open_closed().powf(-1.0 / self.alpha)
    }
}

/// Mass `1/N` at `M`, mass `1 − 1/N` at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPointModel {
    pub big_value: f64,
    pub inv_prob: u64,
}

impl TwoPointModel {
    pub fn new(big_value: f64, inv_prob: u64) -> Result<Self> {
        if !(big_value > 0.0 && big_value.is_finite()) {
            return Err(Error::param(
                "M",
                format!("must be positive, got {big_value}"),
            ));
        }
        if inv_prob == 0 {
            return Err(Error::param("N", "must be at least 1"));
        }
        Ok(TwoPointModel {
            big_value,
            inv_prob,
        })
    }

    pub fn mean(&self) -> f64 {
        self.big_value / self.inv_prob as f64
    }

    pub fn moment(&self, p: f64) -> f64 {
        self.big_value.powf(p) / self.inv_prob as f64
    }

    pub fn to_distribution(&self) -> DiscreteDistribution {
        let q = 1.0 / self.inv_prob as f64;
        DiscreteDistribution::from_unnormalized(vec![(0.0, 1.0 - q), (self.big_value, q)])
    }
}

impl Sampler for TwoPointModel {
    fn sample(&self, rng: &mut RngStream, ledger: &mut OracleLedger) -> f64 {
        ledger.charge_classical(1);
        if rng.uniform() * (self.inv_prob as f64) < 1.0 {
            self.big_value
        } else {
            0.0
        }
    }
}

/// Grid for [`discretize_pareto_on`]. Each atom sits at the left edge of its cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "grid", rename_all = "snake_case")]
pub enum Grid {
    /// Points `x_min + k·step`.
    Uniform { step: f64 },
    /// Points `anchor·2^j` for integer `j`.
    Dyadic { anchor: f64 },
}

/// Discretizes on the uniform grid `x_min + k·grid_step`.
pub fn discretize_pareto(
    model: &ParetoModel,
    grid_step: f64,
    cap: f64,
) -> Result<DiscreteDistribution> {
    discretize_pareto_on(model, Grid::Uniform { step: grid_step }, cap)
}

/// Atoms at grid points below `cap`, each carrying the exact CDF mass of its
/// cell; all mass at or above `cap` goes to an atom at `cap`.
pub fn discretize_pareto_on(
    model: &ParetoModel,
    grid: Grid,
    cap: f64,
) -> Result<DiscreteDistribution> {
    if !(cap > model.x_min) {
        return Err(Error::param(
            "cap",
            format!("must exceed x_min = {}, got {cap}", model.x_min),
        ));
    }
    let points: Vec<f64> = match grid {
        Grid::Uniform { step } => {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::param(
                    "grid_step",
                    format!("must be positive, got {step}"),
                ));
            }
            let count = ((cap - model.x_min) / step).ceil() as usize;
            (0..count)
                .map(|k| model.x_min + k as f64 * step)
                .filter(|&g| g < cap)
                .collect()
        }
        Grid::Dyadic { anchor } => {
            if !(anchor > 0.0 && anchor.is_finite()) {
                return Err(Error::param(
                    "anchor",
                    format!("must be positive, got {anchor}"),
                ));
            }
            let mut j = (model.x_min / anchor).log2().floor() as i32;
            while anchor * 2f64.powi(j) > model.x_min {
                j -= 1;
            }
            while anchor * 2f64.powi(j + 1) <= model.x_min {
                j += 1;
            }
            let mut pts = Vec::new();
            while anchor * 2f64.powi(j) < cap {
                pts.push(anchor * 2f64.powi(j));
                j += 1;
            }
            pts
        }
    };
    let mut pairs = Vec::with_capacity(points.len() + 1);
    for (i, &g) in points.iter().enumerate() {
        let upper = points.get(i + 1).copied().unwrap_or(cap);
        pairs.push((g, model.survival(g) - model.survival(upper)));
    }
    pairs.push((cap, model.survival(cap)));
    Ok(DiscreteDistribution::from_unnormalized(pairs))
}

/// Dyadic layering of a nonnegative law on `x_0 = ε/8, x_{i+1} = 2x_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerDecomposition {
    pub epsilon: f64,
    pub y: f64,
    /// `x_0..=x_K`.
    pub x_grid: Vec<f64>,
    /// `q[i-1]` is the mass in `[x_{i-1}, x_i)`.
    pub q: Vec<f64>,
    /// `nu[i-1]` is true when `q_i · x_i > ε/(100K)`.
    pub nu: Vec<bool>,
    pub k: usize,
    pub mass_below: f64,
    pub mass_above: f64,
}

impl LayerDecomposition {
    pub fn threshold(&self) -> f64 {
        self.epsilon / (100.0 * self.k as f64)
    }

    /// `Σ_{ν_i = 0} q_i · x_i`, never above `ε/100`.
    pub fn dropped_weight(&self) -> f64 {
        (0..self.k)
            .filter(|&i| !self.nu[i])
            .map(|i| self.q[i] * self.x_grid[i + 1])
            .sum()
    }

    pub fn active_layers(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.k).filter(|&i| self.nu[i - 1])
    }
}

pub fn dyadic_decompose(
    dist: &DiscreteDistribution,
    epsilon: f64,
    y: f64,
) -> Result<LayerDecomposition> {
    dist.require_nonnegative()?;
    if !(epsilon > 0.0) {
        return Err(Error::param(
            "epsilon",
            format!("must be positive, got {epsilon}"),
        ));
    }
    let x0 = epsilon / 8.0;
    if !(y > x0) {
        return Err(Error::param(
            "y",
            format!("must exceed epsilon/8 = {x0}, got {y}"),
        ));
    }
    let mut k = ((8.0 * y / epsilon).log2().ceil() as i64).max(1) as usize;
    let top = |k: usize| x0 * 2f64.powi(k as i32);
    while top(k) <= y {
        k += 1;
    }
    while k > 1 && top(k - 1) > y {
        k -= 1;
    }
    let x_grid: Vec<f64> = (0..=k).map(top).collect();
    let q: Vec<f64> = (1..=k)
        .map(|i| dist.mass_in(x_grid[i - 1], x_grid[i]))
        .collect();
    let threshold = epsilon / (100.0 * k as f64);
    let nu = (1..=k).map(|i| q[i - 1] * x_grid[i] > threshold).collect();
    Ok(LayerDecomposition {
        epsilon,
        y,
        mass_below: dist.mass_in(f64::NEG_INFINITY, x0),
        mass_above: dist.mass_in(x_grid[k], f64::INFINITY),
        x_grid,
        q,
        nu,
        k,
    })
}

pub const DOC_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistKind {
    Discrete,
    Pareto,
    Twopoint,
}

/// Versioned on-disk form of any distribution model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionDoc {
    pub version: u32,
    pub kind: DistKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub big_value: Option<f64>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub inv_prob: Option<u64>,
}

/// A parsed [`DistributionDoc`].
#[derive(Clone, Debug, PartialEq)]
pub enum DistModel {
    Discrete(DiscreteDistribution),
    Pareto(ParetoModel),
    TwoPoint(TwoPointModel),
}

impl DistributionDoc {
    pub fn parse(&self) -> Result<DistModel> {
        if self.version != DOC_VERSION {
            return Err(Error::config(
                "version",
                format!("unsupported version {}", self.version),
            ));
        }
        let need = |field: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::config(field, format!("required for kind {:?}", self.kind)))
        };
        match self.kind {
            DistKind::Discrete => {
                let values = self
                    .values
                    .as_ref()
                    .ok_or_else(|| Error::config("values", "required for kind discrete"))?;
                let probs = self
                    .probs
                    .as_ref()
                    .ok_or_else(|| Error::config("probs", "required for kind discrete"))?
                    .iter()
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::config("probs", format!("`{s}`: {e}")))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                DiscreteDistribution::new(values, &probs)
                    .map(DistModel::Discrete)
                    .map_err(|e| Error::config("probs", e.to_string()))
            }
            DistKind::Pareto => {
                ParetoModel::new(need("x_min", self.x_min)?, need("alpha", self.alpha)?)
                    .map(DistModel::Pareto)
                    .map_err(|e| Error::config("alpha", e.to_string()))
            }
            DistKind::Twopoint => {
                let n = self
                    .inv_prob
                    .ok_or_else(|| Error::config("N", "required for kind twopoint"))?;
                TwoPointModel::new(need("M", self.big_value)?, n)
                    .map(DistModel::TwoPoint)
                    .map_err(|e| Error::config("M", e.to_string()))
            }
        }
    }
}

impl From<&ParetoModel> for DistributionDoc {
    fn from(m: &ParetoModel) -> Self {
        DistributionDoc {
            version: DOC_VERSION,
            kind: DistKind::Pareto,
            values: None,
            probs: None,
            alpha: Some(m.alpha),
            x_min: Some(m.x_min),
            big_value: None,
            inv_prob: None,
        }
    }
}

impl From<&TwoPointModel> for DistributionDoc {
    fn from(m: &TwoPointModel) -> Self {
        DistributionDoc {
            version: DOC_VERSION,
            kind: DistKind::Twopoint,
            values: None,
            probs: None,
            alpha: None,
            x_min: None,
            big_value: Some(m.big_value),
            inv_prob: Some(m.inv_prob),
        }
    }
}

impl From<&DiscreteDistribution> for DistributionDoc {
    fn from(d: &DiscreteDistribution) -> Self {
        d.to_doc()
    }
}
