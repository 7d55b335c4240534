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

//! Simulation toolkit for quantum Monte Carlo mean estimation of
//! heavy-tailed random variables.
//!
//! The quantum oracle is replaced by an exactly simulated amplitude
//! estimation kernel ([`qae`]), and every estimator reports its oracle usage
//! through an [`OracleLedger`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod casestudy;
pub mod dist;
pub mod error;
pub mod estimators;
pub mod heavy_tail;
pub mod ledger;
pub mod lower_bounds;
pub mod qae;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use ledger::OracleLedger;
pub use rng::RngStream;
