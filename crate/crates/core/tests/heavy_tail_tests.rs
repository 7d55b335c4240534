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

mod common;

use heavyqmc::bounds::Calibration;
use heavyqmc::dist::{DiscreteDistribution, Sampler, TwoPointModel};
use heavyqmc::estimators::EstimatorMode;
use heavyqmc::heavy_tail::{
    a_ideal, central_event_radius, qmc_central, qmc_heavy, qmc_heavy_mae, ClipBounds, HeavyTailSpec,
};
use heavyqmc::stats::ScalingFit;
use heavyqmc::{OracleLedger, RngStream};
use proptest::prelude::*;

const SIM: EstimatorMode = EstimatorMode::SimulatedQae;
const IDEAL: EstimatorMode = EstimatorMode::IdealContract;

fn success_rate<F: Fn(&mut RngStream) -> f64>(trials: u64, truth: f64, eps: f64, run: F) -> f64 {
    (0..trials)
        .filter(|&t| (run(&mut RngStream::new(100, t)) - truth).abs() <= eps)
        .count() as f64
        / trials as f64
}

#[test]
fn twopoint_success() {
    let d = common::twopoint_100_100();
    let spec = HeavyTailSpec::new(100.0, 1.0, 0.5, SIM).unwrap();
    let rate = success_rate(500, 1.0, 0.5, |rng| {
        qmc_heavy(&d, &spec, rng).unwrap().estimate
    });
    assert!(rate >= 0.75, "{rate}");
}

#[test]
fn pareto_success_and_ideal_calls() {
    let d = common::pareto_heavy();
    let spec = HeavyTailSpec::new(6.0, 0.5, 0.1, SIM).unwrap();
    let rate = success_rate(200, d.mean(), 0.1, |rng| {
        qmc_heavy(&d, &spec, rng).unwrap().estimate
    });
    assert!(rate >= 0.75, "{rate}");
    let ideal = qmc_heavy(
        &d,
        &HeavyTailSpec::new(6.0, 0.5, 0.1, IDEAL).unwrap(),
        &mut RngStream::new(1, 0),
    )
    .unwrap();
    // 8^{(1+δ)/2δ}·C^{1/2δ}·ε^{−(1+δ)/2δ} where 8^{1.5} comes from the ε/8 accuracy budget.
    let scale = 8f64.powf(1.5) * 6.0 * 0.1f64.powf(-1.5);
    let calls = ideal.ledger.quantum_calls as f64;
    assert!(calls >= scale && calls <= 2.0 * scale, "{calls} vs {scale}");
}

#[test]
fn mae_on_twopoint() {
    let d = common::twopoint_100_100();
    let spec = HeavyTailSpec::new(100.0, 1.0, 0.5, SIM).unwrap();
    let errs: Vec<f64> = (0..500)
        .map(|t| {
            (qmc_heavy_mae(&d, &spec, &mut RngStream::new(200, t))
                .unwrap()
                .estimate
                - 1.0)
                .abs()
        })
        .collect();
    let mae = errs.iter().sum::<f64>() / errs.len() as f64;
    assert!(mae <= 0.5, "{mae}");
}

#[test]
fn central_symmetric_success() {
    let d = common::symmetric_pm1();
    let cal = Calibration::default();
    let rate = success_rate(500, 0.0, 0.3, |rng| {
        qmc_central(&d, 1.0, 1.0, 0.3, SIM, &cal, rng)
            .unwrap()
            .estimate
    });
    assert!(rate >= 0.75, "{rate}");
}

#[test]
fn central_event_frequency() {
    let cal = Calibration::default();
    let cases = [
        (
            DiscreteDistribution::new(&[-1.0, 0.0, 1.0], &[0.05, 0.9, 0.05]).unwrap(),
            0.1,
        ),
        (
            TwoPointModel::new(10.0, 100).unwrap().to_distribution(),
            0.0,
        ),
        (common::symmetric_pm1(), 1.0),
    ];
    for (d, c_cen) in cases {
        let c_cen = if c_cen == 0.0 {
            d.moment(2.0, true, true)
        } else {
            c_cen
        };
        let radius = central_event_radius(c_cen, 1.0);
        let trials = 2000;
        let far = (0..trials)
            .filter(|&t| {
                let r = qmc_central(
                    &d,
                    c_cen,
                    1.0,
                    0.3,
                    IDEAL,
                    &cal,
                    &mut RngStream::new(300, t),
                )
                .unwrap();
                (r.provenance.params["v0"] - d.mean()).abs() > radius
            })
            .count();
        assert!(
            far as f64 / trials as f64 <= 1.0 / 9.0 + 0.03,
            "c_cen {c_cen}: {far}"
        );
    }
}

/// Ideal-mode cost of a_ideal with the literal cutoff `y = ε^{−1/(α−1)}`.
///
/// The raw slope is about −1.57: every active layer is estimated to
/// `ε/(100K)` and boosted `r(K)` times, and over this short range `K` moves
/// from 11 to 16. With the explicit `K·r` factor divided out the slope
/// matches −α/(2α−2) = −1.125.
#[test]
fn a_ideal_slope_literal_cutoff() {
    let d = common::pareto_heavy();
    let eps = [0.1f64, 0.05, 0.02];
    let runs: Vec<_> = eps
        .iter()
        .map(|&e| {
            let y = e.powf(-1.0 / 0.8);
            a_ideal(
                &d,
                y,
                e,
                IDEAL,
                &Calibration::default(),
                &mut RngStream::new(1, 0),
            )
            .unwrap()
        })
        .collect();
    let raw: Vec<f64> = runs.iter().map(|r| r.ledger.quantum_calls as f64).collect();
    let reduced: Vec<f64> = runs
        .iter()
        .map(|r| {
            r.ledger.quantum_calls as f64 / (r.provenance.params["K"] * r.provenance.params["reps"])
        })
        .collect();
    let raw_fit = ScalingFit::log_log(&eps, &raw).unwrap();
    let fit = ScalingFit::log_log(&eps, &reduced).unwrap();
    assert!(
        (raw_fit.slope + 1.5697).abs() < 0.01,
        "raw {} {raw:?}",
        raw_fit.slope
    );
    assert!(
        (fit.slope + 1.125).abs() <= 0.25,
        "reduced {} {reduced:?}",
        fit.slope
    );
}

#[test]
fn a_ideal_dropped_weight() {
    let d = common::pareto_heavy();
    for e in [0.1, 0.05, 0.02, 0.01] {
        let r = a_ideal(
            &d,
            1e4,
            e,
            SIM,
            &Calibration::default(),
            &mut RngStream::new(2, 0),
        )
        .unwrap();
        assert!(r.provenance.params["dropped_weight"] <= e / 100.0);
    }
}

#[test]
fn qmc_cost_monotone_in_epsilon() {
    let d = common::pareto_heavy();
    let cal = Calibration::default();
    let mean_calls = |e: f64, mode| {
        let mut spec = HeavyTailSpec::new(6.0, 0.5, e, mode).unwrap();
        spec.calibration = cal;
        (0..20)
            .map(|t| {
                qmc_heavy(&d, &spec, &mut RngStream::new(400, t))
                    .unwrap()
                    .ledger
                    .quantum_calls as f64
            })
            .sum::<f64>()
            / 20.0
    };
    for mode in [IDEAL, SIM] {
        let mut e = 0.2;
        let mut prev = mean_calls(e, mode);
        for _ in 0..4 {
            e /= 2.0;
            let c = mean_calls(e, mode);
            assert!(c >= prev, "{mode:?} eps {e}: {c} < {prev}");
            prev = c;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degenerate_returns_zero(c in 1e-9f64..1e-4, delta in 0.1f64..=1.0, m in 0.001f64..0.05, n in 1u64..100) {
        let eps = 8.0 * (c / 8.0).powf(1.0 / (1.0 + delta)) * 1.01;
        let spec = HeavyTailSpec::new(c, delta, eps, SIM).unwrap();
        prop_assert!(spec.is_degenerate());
        let d = TwoPointModel::new(m, n).unwrap().to_distribution();
        let r = qmc_heavy(&d, &spec, &mut RngStream::new(0, 0)).unwrap();
        prop_assert_eq!(r.estimate, 0.0);
        prop_assert!(r.ledger.is_empty());
    }

    #[test]
    fn mae_output_clipped(seed in any::<u64>(), m in 1.0f64..200.0, n in 1u64..200) {
        let d = TwoPointModel::new(m, n).unwrap().to_distribution();
        let c = d.moment(2.0, true, false);
        let spec = HeavyTailSpec::new(c, 1.0, 0.5, IDEAL).unwrap();
        let b = ClipBounds::from_moment(c, 1.0);
        let r = qmc_heavy_mae(&d, &spec, &mut RngStream::new(seed, 0)).unwrap();
        prop_assert!(r.estimate >= b.lo && r.estimate <= b.hi);
    }

    #[test]
    fn central_draw_is_charged(seed in any::<u64>()) {
        let d = common::symmetric_pm1();
        let r = qmc_central(&d, 1.0, 1.0, 0.3, IDEAL, &Calibration::default(), &mut RngStream::new(seed, 0)).unwrap();
        let mut replay = RngStream::new(seed, 0);
        let v0 = d.sample(&mut replay, &mut OracleLedger::new());
        prop_assert_eq!(r.provenance.params["v0"], v0);
        prop_assert!(r.ledger.classical_draws >= 1);
    }
}
