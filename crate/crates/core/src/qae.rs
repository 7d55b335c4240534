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

//! Canonical amplitude estimation, simulated through its exact outcome law.
//!
//! With `θ = asin(√a)/π`, a run on an `M`-point register reports grid index
//! `y` with probability `½[F_M(θ − y/M) + F_M(θ + y/M)]`, where `F_M` is the
//! Fejér kernel. The reported estimate is `sin²(πy/M)`, so `y` and `M − y`
//! coincide and the law is folded onto `0..=M/2`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ledger::OracleLedger;
use crate::rng::RngStream;

/// Largest register (in qubits) the dense reference will simulate.
pub const MAX_REFERENCE_QUBITS: u32 = 10;

/// Reference probabilities below this are treated as round-off.
const REFERENCE_NOISE_FLOOR: f64 = 1e-20;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudeQuery {
    a: f64,
    m: u64,
}

impl AmplitudeQuery {
    pub fn new(a: f64, m: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::param("a", format!("must lie in [0, 1], got {a}")));
        }
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::param(
                "M",
                format!("must be a power of two >= 2, got {m}"),
            ));
        }
        Ok(AmplitudeQuery { a, m })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn grid_size(&self) -> u64 {
        self.m
    }

    /// Phase `θ ∈ [0, ½]` with `sin²(πθ) = a`.
    pub fn theta(&self) -> f64 {
        // atan2 stays well conditioned near a = 1, unlike asin(√a).
        self.a.sqrt().atan2((1.0 - self.a).sqrt()) / PI
    }

    /// `π√(a(1−a))/M + π²/M²`, met with probability at least `8/π²`.
    pub fn error_bound(&self) -> f64 {
        let m = self.m as f64;
        PI * (self.a * (1.0 - self.a)).sqrt() / m + PI * PI / (m * m)
    }
}

/// `sin²(Mπd) / (M² sin²(πd))`, equal to 1 at integer `d`.
pub fn fejer(m: u64, d: f64) -> f64 {
    fejer_offset(m, m as f64 * (d - d.round()))
}

/// Kernel at `d = t/M`, taking the offset in grid units to keep precision at large `M`.
fn fejer_offset(m: u64, t: f64) -> f64 {
    let mf = m as f64;
    let t = t - mf * (t / mf).round();
    if t.abs() < 1e-12 {
        return 1.0;
    }
    // sin²(πt) has period 1; reducing first avoids large arguments.
    let num = (PI * (t - t.round())).sin();
    let den = mf * (PI * t / mf).sin();
    (num * num) / (den * den)
}

/// Outcome law over estimates `sin²(πy/M)`, `y = 0..=M/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct QaeLaw {
    pub grid_size: u64,
    pub estimates: Vec<f64>,
    pub probs: Vec<f64>,
}

impl QaeLaw {
    fn point_mass(m: u64, index: usize) -> Self {
        let mut probs = vec![0.0; (m / 2 + 1) as usize];
        probs[index] = 1.0;
        QaeLaw {
            grid_size: m,
            estimates: estimate_grid(m),
            probs,
        }
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Smallest `e` with `P(|â − a| ≤ e) ≥ level`.
    pub fn error_quantile(&self, a: f64, level: f64) -> f64 {
        let mut pairs: Vec<(f64, f64)> = self
            .estimates
            .iter()
            .zip(&self.probs)
            .map(|(e, p)| ((e - a).abs(), *p))
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut acc = 0.0;
        for (e, p) in &pairs {
            acc += p;
            if acc >= level {
                return *e;
            }
        }
        pairs.last().map(|p| p.0).unwrap_or(0.0)
    }

    /// CSV dump with header `grid,estimate,probability`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["grid", "estimate", "probability"])?;
        for (y, (e, p)) in self.estimates.iter().zip(&self.probs).enumerate() {
            w.write_record([y.to_string(), format!("{e:.17e}"), format!("{p:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn estimate_grid(m: u64) -> Vec<f64> {
    (0..=(m / 2) as usize).map(|y| estimate_at(m, y)).collect()
}

fn fold(m: u64, y: u64) -> usize {
    y.min(m - y) as usize
}

pub fn qae_distribution(q: &AmplitudeQuery) -> QaeLaw {
    let m = q.m;
    if q.a == 0.0 {
        return QaeLaw::point_mass(m, 0);
    }
    if q.a == 1.0 {
        return QaeLaw::point_mass(m, (m / 2) as usize);
    }
    let mt = m as f64 * q.theta();
    let mut probs = vec![0.0; (m / 2 + 1) as usize];
    for y in 0..m {
        let yf = y as f64;
        probs[fold(m, y)] += 0.5 * (fejer_offset(m, mt - yf) + fejer_offset(m, mt + yf));
    }
    QaeLaw {
        grid_size: m,
        estimates: estimate_grid(m),
        probs,
    }
}

/// One simulated run: samples `â` from the exact law and charges `M` oracle calls.
///
/// Picks one of the eigenphases `±θ` with a fair coin, then walks outward
/// from the nearest grid point accumulating kernel mass. The kernel sums to
/// one over the grid, so the walk ends after `O(log M)` steps on average and
/// never materializes the full law.
pub fn qae_draw(q: &AmplitudeQuery, rng: &mut RngStream, ledger: &mut OracleLedger) -> f64 {
    ledger.charge_quantum(q.m);
    if q.a == 0.0 || q.a == 1.0 {
        return q.a;
    }
    let m = q.m;
    let mf = m as f64;
    let phi = if rng.coin() {
        q.theta()
    } else {
        1.0 - q.theta()
    };
    let centre_f = (mf * phi).round();
    let frac = mf * phi - centre_f;
    let centre = (centre_f as u64) % m;
    let u = rng.uniform();
    let mut acc = 0.0;
    let mut chosen = centre;
    for step in 0..m {
        // offsets 0, +1, −1, +2, −2, ...
        let k: i64 = if step % 2 == 1 {
            step.div_ceil(2) as i64
        } else {
            -((step / 2) as i64)
        };
        acc += fejer_offset(m, frac - k as f64);
        chosen = (centre as i64 + k).rem_euclid(m as i64) as u64;
        if acc > u {
            break;
        }
    }
    estimate_at(m, fold(m, chosen))
}

fn estimate_at(m: u64, y: usize) -> f64 {
    (PI * y as f64 / m as f64).sin().powi(2)
}

/// Dense phase-estimation reference on an `m`-qubit register.
///
/// Builds the Grover iterate `Q = (2|ψ⟩⟨ψ| − I)(I − 2|g⟩⟨g|)` on the span
/// of the good and bad states, applies controlled `Q^{2^k}` for every
/// register qubit, then the explicit inverse Fourier matrix, and folds the
/// register distribution onto the estimate grid.
pub fn qpe_statevector_reference(a: f64, m: u32) -> Result<QaeLaw> {
    if m == 0 || m > MAX_REFERENCE_QUBITS {
        return Err(Error::param(
            "m",
            format!("register size must be in 1..={MAX_REFERENCE_QUBITS}, got {m}"),
        ));
    }
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::param("a", format!("must lie in [0, 1], got {a}")));
    }
    let size = 1usize << m;
    let psi = [(1.0 - a).sqrt(), a.sqrt()];
    let reflect_psi = [
        [2.0 * psi[0] * psi[0] - 1.0, 2.0 * psi[0] * psi[1]],
        [2.0 * psi[1] * psi[0], 2.0 * psi[1] * psi[1] - 1.0],
    ];
    let flip_good = [[1.0, 0.0], [0.0, -1.0]];
    let mut q_pow = matmul(reflect_psi, flip_good);

    // Register in uniform superposition, target in |ψ⟩.
    let amp = 1.0 / (size as f64).sqrt();
    let mut state: Vec<[Complex64; 2]> = vec![
        [
            Complex64::new(amp * psi[0], 0.0),
            Complex64::new(amp * psi[1], 0.0)
        ];
        size
    ];
    for k in 0..m {
        let bit = 1usize << k;
        for (j, s) in state.iter_mut().enumerate() {
            if j & bit != 0 {
                *s = apply(&q_pow, s);
            }
        }
        q_pow = matmul(q_pow, q_pow);
    }

    let n = size as f64;
    let iqft: Vec<Complex64> = (0..size * size)
        .map(|idx| {
            let (y, j) = (idx / size, idx % size);
            let phase = -2.0 * PI * ((y * j) % size) as f64 / n;
            Complex64::from_polar(1.0 / n.sqrt(), phase)
        })
        .collect();
    let mg = size as u64;
    let mut probs = vec![0.0; size / 2 + 1];
    for y in 0..size {
        let row = &iqft[y * size..(y + 1) * size];
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for (c, s) in row.iter().zip(&state) {
            out[0] += c * s[0];
            out[1] += c * s[1];
        }
        probs[fold(mg, y as u64)] += out[0].norm_sqr() + out[1].norm_sqr();
    }
    // Flush round-off residue so degenerate phases give exact point masses.
    for p in probs.iter_mut() {
        if *p < REFERENCE_NOISE_FLOOR {
            *p = 0.0;
        }
    }
    let total: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= total;
    }
    Ok(QaeLaw {
        grid_size: mg,
        estimates: estimate_grid(mg),
        probs,
    })
}

type Mat2 = [[f64; 2]; 2];

fn matmul(x: Mat2, y: Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

fn apply(u: &Mat2, s: &[Complex64; 2]) -> [Complex64; 2] {
    [
        s[0] * u[0][0] + s[1] * u[0][1],
        s[0] * u[1][0] + s[1] * u[1][1],
    ]
}

/// `½ Σ |p_i − q_i|`; vectors of different length are zero-padded.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    0.5 * (0..n)
        .map(|i| (p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(a: f64, m: u64) -> QaeLaw {
        qae_distribution(&AmplitudeQuery::new(a, m).unwrap())
    }

    #[test]
    fn query_validation() {
        assert!(AmplitudeQuery::new(0.5, 3).is_err());
        assert!(AmplitudeQuery::new(0.5, 1).is_err());
        assert!(AmplitudeQuery::new(1.5, 4).is_err());
        assert!(AmplitudeQuery::new(0.5, 1 << 40).is_ok());
    }

    #[test]
    fn kernel_values() {
        assert_eq!(fejer(8, 0.0), 1.0);
        assert_eq!(fejer(8, 3.0), 1.0);
        assert!(fejer(8, 1.0 / 8.0) < 1e-28);
        assert!((fejer(4, 0.125) - 1.0 / (16.0 * (PI / 8.0).sin().powi(2))).abs() < 1e-15);
    }

    #[test]
    fn degenerate_amplitudes() {
        let z = law(0.0, 16);
        assert_eq!(z.probs[0], 1.0);
        assert_eq!(z.total(), 1.0);
        let one = law(1.0, 4);
        assert_eq!(one.probs[2], 1.0);
        assert_eq!(one.estimates[2], 1.0);
    }

    #[test]
    fn matches_reference_at_m8() {
        let analytic = law(0.3, 8);
        let reference = qpe_statevector_reference(0.3, 3).unwrap();
        assert!((analytic.total() - 1.0).abs() < 1e-12);
        assert!(total_variation(&analytic.probs, &reference.probs) < 1e-9);
    }

    #[test]
    fn reference_degenerate_and_guard() {
        let z = qpe_statevector_reference(0.0, 3).unwrap();
        assert!((z.probs[0] - 1.0).abs() < 1e-12);
        let one = qpe_statevector_reference(1.0, 2).unwrap();
        assert!((one.probs[2] - 1.0).abs() < 1e-12);
        assert!(qpe_statevector_reference(0.3, 11).is_err());
    }

    #[test]
    fn draw_accounting() {
        let q = AmplitudeQuery::new(0.0, 16).unwrap();
        let mut rng = RngStream::new(3, 0);
        let mut ledger = OracleLedger::new();
        for _ in 0..50 {
            assert_eq!(qae_draw(&q, &mut rng, &mut ledger), 0.0);
        }
        let q = AmplitudeQuery::new(0.4, 32).unwrap();
        let mut ledger = OracleLedger::new();
        for _ in 0..3 {
            qae_draw(&q, &mut rng, &mut ledger);
        }
        assert_eq!(ledger.quantum_calls, 96);
    }

    #[test]
    fn draw_success_at_half() {
        let q = AmplitudeQuery::new(0.5, 64).unwrap();
        let bound = PI * 0.5 / 64.0 + PI * PI / 4096.0;
        let mut rng = RngStream::new(11, 0);
        let mut ledger = OracleLedger::new();
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| (qae_draw(&q, &mut rng, &mut ledger) - 0.5).abs() <= bound)
            .count();
        assert!(hits as f64 / trials as f64 >= 0.81, "{hits}");
    }

    #[test]
    fn csv_dump() {
        let mut buf = Vec::new();
        law(0.0, 4).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("grid,estimate,probability\n0,"));
        assert_eq!(text.lines().count(), 4);
    }
}
