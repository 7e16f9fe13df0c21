// SPDX-License-Identifier: Apache-2.0

use rand::Rng;

use super::{DpError, DpResult};

/// One draw from Laplace(0, scale) by inverting the CDF at a uniform draw.
pub fn sample_laplace<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> DpResult<f64> {
    if !(scale > 0.0) {
        return Err(DpError::NonPositiveScale(scale));
    }
    // u uniform on the open interval (-1/2, 1/2).
    let u = loop {
        let u = rng.gen::<f64>() - 0.5;
        if u != -0.5 {
            break u;
        }
    };
    Ok(-scale * u.signum() * (-2.0 * u.abs()).ln_1p())
}

/// CDF of Laplace(0, scale).
pub fn laplace_cdf(x: f64, scale: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / scale).exp()
    } else {
        1.0 - 0.5 * (-x / scale).exp()
    }
}

/// `value + Laplace(sensitivity / epsilon)`. A zero scale (zero sensitivity
/// or infinite epsilon) returns `value` unchanged without consuming
/// randomness.
pub fn laplace_mechanism<R: Rng + ?Sized>(
    value: f64,
    sensitivity: f64,
    epsilon: f64,
    rng: &mut R,
) -> DpResult<f64> {
    if !(epsilon > 0.0) {
        return Err(DpError::NonPositiveEpsilon(epsilon));
    }
    if !(sensitivity >= 0.0) {
        return Err(DpError::NegativeSensitivity(sensitivity));
    }
    let scale = sensitivity / epsilon;
    if scale == 0.0 {
        return Ok(value);
    }
    Ok(value + sample_laplace(scale, rng)?)
}
