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

use std::sync::OnceLock;

use heavyqmc::bounds::lb_instance_params;
use heavyqmc::lower_bounds::{
    build_sigma, classical_query_experiment, classify, quantum_query_experiment, Answer,
    ExperimentParams, QueryExperiment,
};
use heavyqmc::{OracleLedger, RngStream};
use proptest::prelude::*;

const PARAMS: ExperimentParams = ExperimentParams {
    big_value: None,
    trials: 200,
    seed: 5,
};

fn classical() -> &'static QueryExperiment {
    static CELL: OnceLock<QueryExperiment> = OnceLock::new();
    CELL.get_or_init(|| classical_query_experiment(&[64, 256, 1024], &PARAMS).unwrap())
}

fn quantum() -> &'static QueryExperiment {
    static CELL: OnceLock<QueryExperiment> = OnceLock::new();
    CELL.get_or_init(|| quantum_query_experiment(&[64, 256, 1024, 4096], &PARAMS).unwrap())
}

#[test]
fn classical_linear() {
    let c = classical();
    assert!((c.fit.slope - 1.0).abs() <= 0.15, "{:?}", c.fit);
    for w in c.cells.windows(2) {
        // N grows 4× per step, so two doublings: at least 1.7² overall.
        assert!(
            w[1].cost as f64 >= 1.7 * 1.7 * w[0].cost as f64,
            "{:?}",
            c.cells
        );
    }
    assert!(c.cells.iter().all(|x| x.success_rate >= 0.8));
}

#[test]
fn quantum_square_root() {
    let q = quantum();
    assert!((q.fit.slope - 0.5).abs() <= 0.15, "{:?}", q.fit);
    assert!(q.cells.iter().all(|x| x.cost.is_power_of_two()));
}

#[test]
fn separation() {
    let (c, q) = (classical(), quantum());
    assert!(c.fit.slope - q.fit.slope >= 0.3);
    for cell in &c.cells {
        let qc = q.cells.iter().find(|x| x.n == cell.n).unwrap();
        assert!(
            qc.cost <= cell.cost,
            "N {}: quantum {} classical {}",
            cell.n,
            qc.cost,
            cell.cost
        );
    }
}

#[test]
fn replay() {
    let again = quantum_query_experiment(&[64, 256, 1024, 4096], &PARAMS).unwrap();
    assert_eq!(&again, quantum());
}

#[test]
fn csv_layout() {
    let mut buf = Vec::new();
    quantum().write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,cost,success_rate,ci_lo,ci_hi"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn unmarked_quantum_always_no() {
    let s = build_sigma(256, 256.0, 0).unwrap();
    let mut rng = RngStream::new(0, 0);
    let mut ledger = OracleLedger::new();
    for grid in [2u64, 16, 1024] {
        let a = s.quantum_run(grid, &mut rng, &mut ledger).unwrap();
        assert_eq!(classify(256.0 * a, 256, 256.0), Answer::No);
    }
}

proptest! {
    #[test]
    fn threshold_is_exact_midpoint(n in 1u64..100_000, m in 0.001f64..1e6) {
        let yes = build_sigma(n, m, 1).unwrap().mean();
        let no = build_sigma(n, m, 0).unwrap().mean();
        prop_assert_eq!((yes + no) / 2.0, m / (2.0 * n as f64));
        prop_assert_eq!(classify(m / (2.0 * n as f64), n, m), Answer::Yes);
    }

    #[test]
    fn instance_from_bounds(c in 1.0f64..50.0, delta in 0.2f64..=1.0, eps in 0.001f64..0.05) {
        let p = lb_instance_params(c, delta, eps).unwrap();
        let s = build_sigma(p.n, p.big_value, 1).unwrap();
        let d = s.distribution();
        let rel = (d.moment(1.0 + delta, true, false) * p.n as f64 / p.n_exact - c).abs() / c;
        prop_assert!(rel < 1e-9);
        prop_assert!(((s.mean() * p.n as f64 / p.n_exact) / 3.0 - eps).abs() < 1e-9 * eps);
    }
}
