//! Ideal sine-pulse intensity from the zero-order Bessel pulse condition.

use core::f64::consts::PI;

use crate::error::{Error, Result};

/// First positive zero of `J₀`, refined by Newton's method from a nearby guess.
pub fn first_j0_zero() -> f64 {
    let mut x = 2.4;
    for _ in 0..50 {
        // J₀' = −J₁
        let step = libm::j0(x) / -libm::j1(x);
        x -= step;
        if libm::fabs(step) < 1e-15 * x {
            break;
        }
    }
    x
}

/// Intensity `I` of `c(t) = I sin(πt/τ)` satisfying `J₀(Iτ/π) = 0` at the first root.
pub fn ideal_intensity(half_period: f64) -> Result<f64> {
    if !(half_period > 0.0 && half_period.is_finite()) {
        return Err(Error::InvalidParameter { name: "half_period", value: half_period });
    }
    Ok(PI * first_j0_zero() / half_period)
}
