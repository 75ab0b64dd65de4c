//! Float helpers that work without `std`.

pub(crate) const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// Log density of `N(mean, var)` at `x`.
#[inline]
pub(crate) fn log_normal(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (LN_2PI + ln(var)) - d * d / (2.0 * var)
}

/// Rounds to the nearest micro-unit so values survive a 6-decimal text round trip.
#[inline]
pub(crate) fn quantize_micro(x: f64) -> f64 {
    let q = round(x * 1e6) / 1e6;
    if q == 0.0 {
        0.0
    } else {
        q
    }
}
