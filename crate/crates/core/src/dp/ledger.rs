// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{DpError, DpResult};

/// Relative slack on the allotment so that e.g. ten charges of `eps / 10`
/// do not trip on rounding.
const ROUNDING_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub label: String,
    pub epsilon: f64,
    pub delta: f64,
}

/// Sequential-composition accountant: the epsilons of all charges add up and
/// may not exceed the allotment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetLedger {
    total_epsilon: f64,
    entries: Vec<LedgerEntry>,
}

impl BudgetLedger {
    pub fn new(total_epsilon: f64) -> DpResult<Self> {
        if !(total_epsilon >= 0.0) || total_epsilon.is_infinite() {
            return Err(DpError::NonPositiveEpsilon(total_epsilon));
        }
        Ok(Self {
            total_epsilon,
            entries: Vec::new(),
        })
    }

    pub fn total_epsilon(&self) -> f64 {
        self.total_epsilon
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn spent_epsilon(&self) -> f64 {
        self.entries.iter().map(|e| e.epsilon).sum()
    }

    pub fn spent_delta(&self) -> f64 {
        self.entries.iter().map(|e| e.delta).sum()
    }

    pub fn remaining(&self) -> f64 {
        (self.total_epsilon - self.spent_epsilon()).max(0.0)
    }

    /// Records a charge. On error the ledger is left unchanged.
    pub fn charge(&mut self, label: impl Into<String>, epsilon: f64, delta: f64) -> DpResult<()> {
        if !(epsilon > 0.0) || epsilon.is_infinite() {
            return Err(DpError::NonPositiveCharge(epsilon));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(DpError::InvalidDelta {
                delta,
                range: "[0, 1)",
            });
        }
        let spent = self.spent_epsilon();
        if spent + epsilon > self.total_epsilon * (1.0 + ROUNDING_SLACK) {
            return Err(DpError::Overdraft {
                requested: epsilon,
                remaining: self.remaining(),
                total: self.total_epsilon,
            });
        }
        self.entries.push(LedgerEntry {
            label: label.into(),
            epsilon,
            delta,
        });
        Ok(())
    }

    /// Functional form of [`charge`](Self::charge).
    pub fn charged(&self, label: impl Into<String>, epsilon: f64, delta: f64) -> DpResult<Self> {
        let mut next = self.clone();
        next.charge(label, epsilon, delta)?;
        Ok(next)
    }
}
