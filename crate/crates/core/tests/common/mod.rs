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

//! Distributions shared by the integration suites.

#![allow(dead_code)]

use heavyqmc::dist::{
    discretize_pareto_on, DiscreteDistribution, Grid, ParetoModel, TwoPointModel,
};

/// The five laws the σ/n contract is checked on.
pub fn contract_dists() -> Vec<(&'static str, DiscreteDistribution)> {
    vec![
        (
            "bernoulli_half",
            DiscreteDistribution::bernoulli(0.5).unwrap(),
        ),
        (
            "uniform5",
            DiscreteDistribution::uniform(&[0.0, 0.25, 0.5, 0.75, 1.0]).unwrap(),
        ),
        (
            "twopoint_10_100",
            TwoPointModel::new(10.0, 100).unwrap().to_distribution(),
        ),
        (
            "skewed4",
            DiscreteDistribution::new(&[0.0, 1.0, 5.0, 20.0], &[0.5, 0.3, 0.15, 0.05]).unwrap(),
        ),
        ("pareto_1.8_cap1024", pareto(1024.0)),
    ]
}

/// Pareto(x_min = 1, α = 1.8) on the dyadic grid anchored at 1.
pub fn pareto(cap: f64) -> DiscreteDistribution {
    discretize_pareto_on(
        &ParetoModel::new(1.0, 1.8).unwrap(),
        Grid::Dyadic { anchor: 1.0 },
        cap,
    )
    .unwrap()
}

/// Pareto law used by the heavy-tail experiments (cap `2^30`).
pub fn pareto_heavy() -> DiscreteDistribution {
    pareto(2f64.powi(30))
}

pub fn twopoint_100_100() -> DiscreteDistribution {
    TwoPointModel::new(100.0, 100).unwrap().to_distribution()
}

pub fn symmetric_pm1() -> DiscreteDistribution {
    DiscreteDistribution::uniform(&[-1.0, 1.0]).unwrap()
}
