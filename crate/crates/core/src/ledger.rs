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

use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

/// Oracle invocation counts: one unit per quantum oracle application inside
/// amplitude estimation, one unit per classical draw.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OracleLedger {
    pub quantum_calls: u64,
    pub classical_draws: u64,
}

impl OracleLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge_quantum(&mut self, calls: u64) {
        self.quantum_calls += calls;
    }

    pub fn charge_classical(&mut self, draws: u64) {
        self.classical_draws += draws;
    }

    pub fn is_empty(&self) -> bool {
        self.quantum_calls == 0 && self.classical_draws == 0
    }
}

impl Add for OracleLedger {
    type Output = OracleLedger;

    fn add(self, rhs: OracleLedger) -> OracleLedger {
        OracleLedger {
            quantum_calls: self.quantum_calls + rhs.quantum_calls,
            classical_draws: self.classical_draws + rhs.classical_draws,
        }
    }
}

impl AddAssign for OracleLedger {
    fn add_assign(&mut self, rhs: OracleLedger) {
        *self = *self + rhs;
    }
}

impl Sum for OracleLedger {
    fn sum<I: Iterator<Item = OracleLedger>>(iter: I) -> Self {
        iter.fold(OracleLedger::default(), Add::add)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn componentwise_merge() {
        let a = OracleLedger {
            quantum_calls: 3,
            classical_draws: 1,
        };
        let b = OracleLedger {
            quantum_calls: 10,
            classical_draws: 0,
        };
        assert_eq!(
            a + b,
            OracleLedger {
                quantum_calls: 13,
                classical_draws: 1
            }
        );
        assert_eq!((a + b) + a, a + (b + a));
        let total: OracleLedger = vec![a, b, a].into_iter().sum();
        assert_eq!(total.quantum_calls, 16);
        assert_eq!(total.classical_draws, 2);
        assert!(OracleLedger::new().is_empty());
    }
}
