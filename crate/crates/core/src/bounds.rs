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

//! Closed-form tail bounds, cutoffs and sample-size formulas.
//!
//! Every function here is a pure formula. Constants hidden by the asymptotic
//! statements live in [`Calibration`].

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multiplicative constants applied to the asymptotic sample sizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub quantum: f64,
    pub classical: f64,
    pub mz: f64,
    pub ko: f64,
    /// Repetitions per unit of `ln(1/η)` in median boosting.
    pub powering: f64,
}

pub const CALIBRATION: Calibration = Calibration {
    quantum: 1.0,
    classical: 1.0,
    mz: 1.0,
    ko: 1.0,
    powering: 8.0,
};

impl Default for Calibration {
    fn default() -> Self {
        CALIBRATION
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(
            "delta",
            format!("must lie in (0, 1], got {delta}"),
        ))
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive, got {v}")))
    }
}

/// `C · y^{−δ}`, an upper bound on `E[X·1(X ≥ y)]` whenever `E[X^{1+δ}] ≤ C`.
pub fn holder_tail_bound(c: f64, delta: f64, y: f64) -> Result<f64> {
    check_delta(delta)?;
    check_positive("C", c)?;
    check_positive("y", y)?;
    Ok(c * y.powf(-delta))
}

/// `(8C/ε)^{1/δ}`: the point where the tail bound equals `ε/8`.
pub fn cutoff_y(c: f64, delta: f64, epsilon: f64) -> f64 {
    (8.0 * c / epsilon).powf(1.0 / delta)
}

/// `(ε/8)·(8C/ε)^{1/δ}`, which dominates `E[Z²]` for `Z = X·1(X < cutoff_y)`.
pub fn truncated_l2_bound(c: f64, delta: f64, epsilon: f64) -> f64 {
    epsilon / 8.0 * cutoff_y(c, delta, epsilon)
}

/// True when `C ≤ 8(ε/8)^{1+δ}`, where the zero estimator is already accurate.
pub fn is_degenerate(c: f64, delta: f64, epsilon: f64) -> bool {
    c <= 8.0 * (epsilon / 8.0).powf(1.0 + delta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexityKind {
    Quantum,
    ClassicalMc,
    KoBounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityIndex {
    pub kind: ComplexityKind,
    pub value: f64,
    pub calibrated_n: u64,
}

/// Sample-size index before and after calibration.
///
/// * quantum: `C^{1/2δ} ε^{−(1+δ)/2δ}`
/// * classical: `C^{1/δ} ε^{−(1+δ)/δ}`
/// * ko_bounded: `√C / ε`, the σ/n rate with `C` read as a second moment
pub fn sample_complexity(
    kind: ComplexityKind,
    c: f64,
    delta: f64,
    epsilon: f64,
    calibration: &Calibration,
) -> Result<ComplexityIndex> {
    check_delta(delta)?;
    check_positive("C", c)?;
    check_positive("epsilon", epsilon)?;
    let (value, kappa) = match kind {
        ComplexityKind::Quantum => (
            c.powf(1.0 / (2.0 * delta)) * epsilon.powf(-(1.0 + delta) / (2.0 * delta)),
            calibration.quantum,
        ),
        ComplexityKind::ClassicalMc => (
            c.powf(1.0 / delta) * epsilon.powf(-(1.0 + delta) / delta),
            calibration.classical,
        ),
        ComplexityKind::KoBounded => (c.sqrt() / epsilon, calibration.ko),
    };
    let calibrated_n = if is_degenerate(c, delta, epsilon) {
        0
    } else {
        ((kappa * value).ceil() as u64).max(1)
    };
    Ok(ComplexityIndex {
        kind,
        value,
        calibrated_n,
    })
}

/// `⌈κ_mz · C^{1/δ} ε^{−(1+δ)/δ}⌉`.
pub fn mz_mc_sample_size(
    c: f64,
    delta: f64,
    epsilon: f64,
    calibration: &Calibration,
) -> Result<u64> {
    check_delta(delta)?;
    check_positive("C", c)?;
    check_positive("epsilon", epsilon)?;
    let value = c.powf(1.0 / delta) * epsilon.powf(-(1.0 + delta) / delta);
    Ok(((calibration.mz * value).ceil() as u64).max(1))
}

/// Parameters of the hard two-point instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbInstance {
    pub big_value: f64,
    /// Real-valued `N` before rounding; the round-trip identities hold for it exactly.
    pub n_exact: f64,
    pub n: u64,
}

/// `M = (C/3ε)^{1/δ}`, `N = 3^{−1/δ−1} C^{1/δ} ε^{−(1+δ)/δ}`.
pub fn lb_instance_params(c: f64, delta: f64, epsilon: f64) -> Result<LbInstance> {
    check_delta(delta)?;
    check_positive("C", c)?;
    check_positive("epsilon", epsilon)?;
    let big_value = (c / (3.0 * epsilon)).powf(1.0 / delta);
    let n_exact =
        3f64.powf(-1.0 / delta - 1.0) * c.powf(1.0 / delta) * epsilon.powf(-(1.0 + delta) / delta);
    let n = n_exact.round();
    if n_exact < 1.0 || n < 1.0 {
        return Err(Error::param(
            "epsilon",
            format!("instance size N = {n_exact} is below 1"),
        ));
    }
    Ok(LbInstance {
        big_value,
        n_exact,
        n: n as u64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    DeltaBetter,
    C2Better,
    OutputZero,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    #[serde(rename = "L")]
    pub l: f64,
    pub y: f64,
    pub t_delta: f64,
    pub t_c2: f64,
    pub verdict: Verdict,
}

/// Compares the two sample sizes on the two-point law at accuracy `ε = M/(LN)`.
///
/// `L = 1` is labelled `DeltaBetter`: both sizes have the same order there.
pub fn two_point_regime(big_value: f64, n: u64, l: f64, delta: f64) -> Result<RegimeReport> {
    check_delta(delta)?;
    check_positive("M", big_value)?;
    check_positive("L", l)?;
    if n == 0 {
        return Err(Error::param("N", "must be at least 1"));
    }
    let root_n = (n as f64).sqrt();
    let verdict = if l < 1.0 {
        Verdict::OutputZero
    } else if l == 1.0 {
        Verdict::DeltaBetter
    } else {
        Verdict::C2Better
    };
    Ok(RegimeReport {
        l,
        y: l.powf(1.0 / delta) * big_value,
        t_delta: l.powf((1.0 + delta) / (2.0 * delta)) * root_n,
        t_c2: l * root_n,
        verdict,
    })
}

/// The sufficient condition `C(δ) > 3εM^δ` under which the δ-moment
/// estimator is not beaten by the 2nd-moment one. Informational only.
pub fn c_delta_dominates(c_delta: f64, epsilon: f64, big_value: f64, delta: f64) -> bool {
    c_delta > 3.0 * epsilon * big_value.powf(delta)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub algorithm: String,
    pub exponent: f64,
    pub cutoff_exponent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoTable {
    pub alpha: f64,
    pub delta: f64,
    pub rows: Vec<TableRow>,
    /// `−1/(α−1)`.
    pub optimal_cutoff_exponent: f64,
    /// `−1/δ`.
    pub algorithm_cutoff_exponent: f64,
}

pub const QMC_HEAVY: &str = "qmc_heavy";
pub const A_IDEAL: &str = "a_ideal";
pub const KO_OPT: &str = "ko_truncated_opt";
pub const KO_DELTA: &str = "ko_truncated_delta";

/// Predicted ε-exponents of the four algorithms on a Pareto(α) input.
pub fn pareto_complexity_table(alpha: f64, delta: f64) -> Result<ParetoTable> {
    check_delta(delta)?;
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::param(
            "alpha",
            format!("must lie in (1, 2], got {alpha}"),
        ));
    }
    if 1.0 + delta >= alpha {
        return Err(Error::param(
            "delta",
            format!(
                "moment of order {} is infinite for alpha = {alpha}",
                1.0 + delta
            ),
        ));
    }
    let opt = -1.0 / (alpha - 1.0);
    let alg = -1.0 / delta;
    let row = |name: &str, e: f64, c: f64| TableRow {
        algorithm: name.to_string(),
        exponent: e,
        cutoff_exponent: c,
    };
    Ok(ParetoTable {
        alpha,
        delta,
        rows: vec![
            row(QMC_HEAVY, -(1.0 + delta) / (2.0 * delta), alg),
            row(A_IDEAL, -alpha / (2.0 * alpha - 2.0), opt),
            row(KO_OPT, -alpha / (2.0 * (alpha - 1.0)), opt),
            row(KO_DELTA, -(2.0 - alpha + 2.0 * delta) / (2.0 * delta), alg),
        ],
        optimal_cutoff_exponent: opt,
        algorithm_cutoff_exponent: alg,
    })
}

impl ParetoTable {
    pub fn exponent(&self, algorithm: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm)
            .map(|r| r.exponent)
    }

    /// CSV with header `algorithm,exponent,cutoff_exponent`, six decimals.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["algorithm", "exponent", "cutoff_exponent"])?;
        for r in &self.rows {
            w.write_record([
                r.algorithm.clone(),
                format!("{:.6}", r.exponent),
                format!("{:.6}", r.cutoff_exponent),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn tail_bound_examples() {
        assert!(close(holder_tail_bound(1.0, 1.0, 10.0).unwrap(), 0.1));
        assert!(close(holder_tail_bound(1.0, 1.0, 5.0).unwrap(), 0.2));
        assert!(holder_tail_bound(1.0, 0.0, 5.0).is_err());
        assert!(holder_tail_bound(1.0, 1.5, 5.0).is_err());
    }

    #[test]
    fn cutoff_examples() {
        assert!(close(cutoff_y(1.0, 1.0, 0.08), 100.0));
        assert!(close(cutoff_y(2.0, 0.5, 0.16), 10000.0));
        assert!(close(truncated_l2_bound(1.0, 1.0, 0.08), 1.0));
        assert!(close(truncated_l2_bound(1.0, 0.5, 0.08), 100.0));
    }

    #[test]
    fn complexity_examples() {
        let c = CALIBRATION;
        let q = sample_complexity(ComplexityKind::Quantum, 1.0, 1.0, 0.01, &c).unwrap();
        assert!(close(q.value, 100.0));
        assert_eq!(q.calibrated_n, 100);
        let cl = sample_complexity(ComplexityKind::ClassicalMc, 1.0, 1.0, 0.01, &c).unwrap();
        assert!(close(cl.value, 10000.0));
        let ko = sample_complexity(ComplexityKind::KoBounded, 4.0, 1.0, 0.1, &c).unwrap();
        assert!(close(ko.value, 20.0));
        let degenerate = sample_complexity(ComplexityKind::Quantum, 1e-6, 1.0, 0.1, &c).unwrap();
        assert!(degenerate.value > 0.0);
        assert_eq!(degenerate.calibrated_n, 0);
    }

    #[test]
    fn mz_examples() {
        let c = CALIBRATION;
        assert_eq!(mz_mc_sample_size(1.0, 1.0, 0.1, &c).unwrap(), 100);
        assert_eq!(mz_mc_sample_size(2.0, 1.0, 0.1, &c).unwrap(), 200);
        assert_eq!(mz_mc_sample_size(6.0, 0.5, 0.1, &c).unwrap(), 36000);
    }

    #[test]
    fn lb_instance_examples() {
        let p = lb_instance_params(3.0, 1.0, 1.0 / 3.0).unwrap();
        assert!(close(p.big_value, 3.0));
        assert!(close(p.n_exact, 3.0));
        assert_eq!(p.n, 3);
        assert!(lb_instance_params(1.0, 1.0, 10.0).is_err());
    }

    #[test]
    fn regime_examples() {
        let r = two_point_regime(100.0, 100, 1.0, 0.5).unwrap();
        assert!(close(r.y, 100.0) && close(r.t_delta, 10.0) && close(r.t_c2, 10.0));
        assert_eq!(r.verdict, Verdict::DeltaBetter);
        let r = two_point_regime(100.0, 100, 4.0, 1.0).unwrap();
        assert!(close(r.t_delta, 40.0) && close(r.t_c2, 40.0));
        let r = two_point_regime(100.0, 100, 4.0, 0.5).unwrap();
        assert!(close(r.t_delta, 80.0) && close(r.t_c2, 40.0));
        assert_eq!(r.verdict, Verdict::C2Better);
        assert_eq!(
            two_point_regime(100.0, 100, 0.5, 0.5).unwrap().verdict,
            Verdict::OutputZero
        );
    }

    #[test]
    fn pareto_table_example() {
        let t = pareto_complexity_table(1.8, 0.5).unwrap();
        let e: Vec<f64> = t.rows.iter().map(|r| r.exponent).collect();
        for (got, want) in e.iter().zip([-1.5, -1.125, -1.125, -1.2]) {
            assert!(close(*got, want), "{got} vs {want}");
        }
        assert!(close(t.optimal_cutoff_exponent, -1.25));
        assert!(close(t.algorithm_cutoff_exponent, -2.0));
        assert!(pareto_complexity_table(1.5, 0.5).is_err());
        assert!(pareto_complexity_table(2.5, 0.5).is_err());

        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "algorithm,exponent,cutoff_exponent\n\
             qmc_heavy,-1.500000,-2.000000\n\
             a_ideal,-1.125000,-1.250000\n\
             ko_truncated_opt,-1.125000,-1.250000\n\
             ko_truncated_delta,-1.200000,-2.000000\n"
        );
    }
}
