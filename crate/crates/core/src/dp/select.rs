// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use rand::Rng;

use super::{sample_laplace, DpError, DpResult};

/// Report Noisy Arg Max: perturbs every value with independent
/// Laplace(`scale`) noise and returns only the name of the largest.
///
/// Noise is drawn in name order. Ties go to the lexicographically smallest
/// name. A zero scale returns the exact argmax.
pub fn report_noisy_argmax<R: Rng + ?Sized>(
    values: &BTreeMap<String, f64>,
    scale: f64,
    rng: &mut R,
) -> DpResult<String> {
    if values.is_empty() {
        return Err(DpError::EmptySelection);
    }
    if !(scale >= 0.0) {
        return Err(DpError::NonPositiveScale(scale));
    }
    let mut best: Option<(&String, f64)> = None;
    for (name, &value) in values {
        let noisy = if scale == 0.0 {
            value
        } else {
            value + sample_laplace(scale, rng)?
        };
        if best.is_none_or(|(_, b)| noisy > b) {
            best = Some((name, noisy));
        }
    }
    Ok(best.expect("non-empty").0.clone())
}
