use std::f64::consts::SQRT_2;

use libm::erfc;

use crate::error::{Error, Result};

/// Gaussian tail probability `Q(x) = ½ erfc(x/√2)`. NaN in, NaN out.
pub fn q_exact(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(x / SQRT_2)
}

/// Two-exponential approximation `(1/12)e^{-x²/2} + (1/4)e^{-2x²/3}`.
///
/// Only meaningful for `x ≥ 0`; it is an upper bound on `Q` for
/// `x ≳ 0.6655` and never below `(2/3)·Q`.
pub fn q_approx(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::NanInput("q_approx"));
    }
    if x < 0.0 {
        return Err(Error::invalid(format!(
            "q_approx is defined for x >= 0, got {x}"
        )));
    }
    Ok(q_approx_sq(x * x))
}

/// `q_approx` written in terms of `x²`, which is what the BER engines carry.
#[inline]
pub fn q_approx_sq(x_sq: f64) -> f64 {
    (-0.5 * x_sq).exp() / 12.0 + (-2.0 * x_sq / 3.0).exp() / 4.0
}
