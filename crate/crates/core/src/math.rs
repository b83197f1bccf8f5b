// Thin wrappers so the rest of the crate reads like ordinary float code
// without `std`.

pub(crate) use core::f64::consts::TAU;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub(crate) fn tan(x: f64) -> f64 {
    libm::tan(x)
}

#[inline]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// Euclidean remainder into `[0, m)`.
#[inline]
pub(crate) fn rem_euclid(x: f64, m: f64) -> f64 {
    let r = x - m * floor(x / m);
    if r >= m {
        0.0
    } else {
        r
    }
}
