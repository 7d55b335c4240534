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

//! Experiment orchestration: configs, deterministic batch runs, persisted
//! records and their verifier.

mod config;
mod pareto;
mod record;
mod run;
mod verify;

pub use config::{
    resolve_cutoff, tail_budget_cutoff, Algorithm, CutoffRule, Discretization, ExperimentConfig,
    RunMode,
};
pub use pareto::{
    pareto_configs, run_pareto_table, FittedRow, ParetoRun, ParetoTableParams, ORDERING_SLACK,
    SLOPE_TOLERANCE,
};
pub use record::{
    read_rows, summarize, verify_record, write_rows, EpsilonSummary, RunRecord, Summary,
    Thresholds, TrialRow, VerifyReport, ROW_COLUMNS,
};
pub use run::{run_estimate, run_trial, trial_stream};
pub use verify::{
    pooled_median_error, run_lowerbound, run_qae_verify, DecayRow, LowerBoundConfig,
    LowerBoundRecord, QaeVerifyConfig, QaeVerifyRecord, TvRow,
};
