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

use heavyqmc::casestudy::pooled_median_error;
use heavyqmc::qae::{
    qae_distribution, qae_draw, qpe_statevector_reference, total_variation, AmplitudeQuery,
};
use heavyqmc::{OracleLedger, RngStream};
use proptest::prelude::*;

fn law(a: f64, m: u64) -> heavyqmc::qae::QaeLaw {
    qae_distribution(&AmplitudeQuery::new(a, m).unwrap())
}

proptest! {
    #[test]
    fn normalized(a in 0.0f64..=1.0, k in 1u32..14) {
        let l = law(a, 1 << k);
        prop_assert!((l.total() - 1.0).abs() < 1e-12);
        prop_assert_eq!(l.probs.len() as u64, (1u64 << k) / 2 + 1);
    }

    #[test]
    /// Equal up to the rounding of `M·θ`, which grows linearly in `M`.
    fn mirror_symmetry(a in 0.0f64..=1.0, k in 1u32..12) {
        let m = 1u64 << k;
        let p = law(a, m);
        let q = law(1.0 - a, m);
        let n = p.probs.len();
        let tol = 1e-15 * m as f64;
        for y in 0..n {
            prop_assert!((p.probs[y] - q.probs[n - 1 - y]).abs() <= tol, "y {} {} {}", y, p.probs[y], q.probs[n - 1 - y]);
            prop_assert!((p.estimates[y] - (1.0 - q.estimates[n - 1 - y])).abs() <= 1e-15);
        }
    }

    #[test]
    fn ledger_is_sum_of_grids(ks in prop::collection::vec(1u32..10, 1..20), seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 0);
        let mut ledger = OracleLedger::new();
        for &k in &ks {
            qae_draw(&AmplitudeQuery::new(0.37, 1 << k).unwrap(), &mut rng, &mut ledger);
        }
        prop_assert_eq!(ledger.quantum_calls, ks.iter().map(|&k| 1u64 << k).sum::<u64>());
        prop_assert_eq!(ledger.classical_draws, 0);
    }

    #[test]
    fn reference_agrees(a in 0.0f64..=1.0, m in 1u32..8) {
        let analytic = law(a, 1 << m);
        let reference = qpe_statevector_reference(a, m).unwrap();
        prop_assert!(total_variation(&analytic.probs, &reference.probs) < 1e-9);
    }
}

#[test]
fn reference_grid() {
    for &a in &[0.0, 0.1, 0.3, 0.5, 0.9, 1.0] {
        for m in 1..=4u32 {
            let tv = total_variation(
                &law(a, 1 << m).probs,
                &qpe_statevector_reference(a, m).unwrap().probs,
            );
            assert!(tv < 1e-9, "a {a} m {m} tv {tv}");
            if a == 0.0 {
                assert_eq!(tv, 0.0);
            }
        }
    }
}

#[test]
fn draws_follow_law() {
    let l = law(0.3, 8);
    let q = AmplitudeQuery::new(0.3, 8).unwrap();
    let mut rng = RngStream::new(17, 0);
    let mut ledger = OracleLedger::new();
    let n = 100_000u64;
    let mut counts = vec![0u64; l.estimates.len()];
    for _ in 0..n {
        let e = qae_draw(&q, &mut rng, &mut ledger);
        counts[l.estimates.iter().position(|&x| x == e).unwrap()] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(&l.probs)
        .map(|(&c, &p)| (c as f64 - p * n as f64).powi(2) / (p * n as f64))
        .sum();
    // Five outcomes, four degrees of freedom, 0.001 level.
    assert!(chi2 < 18.4668, "chi2 {chi2}");
    assert_eq!(ledger.quantum_calls, 8 * n);
}

/// At `a = 0.3` the median error stays at the same grid offset for
/// `M = 16..128`, so the single-point median does not shrink with `M`.
#[test]
fn single_point_median_plateau() {
    let frozen = 0.008658283817455092;
    for m in [16u64, 32, 64, 128] {
        let e = law(0.3, m).error_quantile(0.3, 0.5);
        assert!((e - frozen).abs() < 1e-15, "M {m}: {e}");
    }
    assert!(law(0.3, 256).error_quantile(0.3, 0.5) < frozen / 3.0);
}

/// The draw-based median at `a = 0.3` matches the exact median above.
#[test]
fn sampled_median_tracks_exact() {
    for m in [16u64, 64] {
        let q = AmplitudeQuery::new(0.3, m).unwrap();
        let mut rng = RngStream::new(m, 0);
        let mut ledger = OracleLedger::new();
        let mut errs: Vec<f64> = (0..10_000)
            .map(|_| (qae_draw(&q, &mut rng, &mut ledger) - 0.3).abs())
            .collect();
        errs.sort_by(f64::total_cmp);
        assert!((errs[5000] - law(0.3, m).error_quantile(0.3, 0.5)).abs() < 1e-12);
    }
}

/// Averaged over amplitudes, the median error halves with each doubling of `M`.
#[test]
fn pooled_median_halves() {
    let pool: Vec<f64> = (0..256).map(|i| (i as f64 + 0.5) / 256.0).collect();
    let meds: Vec<f64> = [16u64, 32, 64, 128]
        .iter()
        .map(|&m| pooled_median_error(&pool, m).unwrap())
        .collect();
    for w in meds.windows(2) {
        assert!(w[0] / w[1] >= 1.8, "{meds:?}");
    }
}

#[test]
fn success_fraction_at_half() {
    let q = AmplitudeQuery::new(0.5, 64).unwrap();
    let bound = q.error_bound();
    let mut rng = RngStream::new(99, 0);
    let mut ledger = OracleLedger::new();
    let hits = (0..100_000)
        .filter(|_| (qae_draw(&q, &mut rng, &mut ledger) - 0.5).abs() <= bound)
        .count();
    assert!(hits as f64 / 1e5 >= 0.81);
}
