// SPDX-License-Identifier: Apache-2.0

//! Standard normal distribution functions.
//!
//! Φ is computed from the complementary error function of `libm` (the
//! fdlibm rational approximations, absolute error well under 1e-15).
//! Upper tails go through `erfc` directly so they keep relative accuracy
//! far into the tail instead of cancelling against 1.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Φ(x).
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// 1 − Φ(x).
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn ln_pdf(x: f64) -> f64 {
    -0.5 * x * x - 0.5 * (2.0 * PI).ln()
}
