//! Gamma and Beta functions.
//!
//! Γ and log Γ are evaluated with the `libm` port of musl's `tgamma` /
//! `lgamma_r`. The wrappers here pin down the pole and overflow behavior the
//! rest of the crate relies on: [`reciprocal_gamma`] is total and vanishes
//! exactly at the poles, which is what makes fractional-derivative
//! coefficients like `Γ(1+β)/Γ(1+β−α)` drop out cleanly.

use crate::error::{Error, Result};

/// Largest argument for which Γ(x) is representable as an `f64`.
pub const GAMMA_MAX_ARG: f64 = 171.624_376_956_302_7;

/// True when `x` is 0, −1, −2, ...
pub fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Γ(x).
///
/// Fails with [`Error::Pole`] at nonpositive integers and [`Error::Overflow`]
/// once the result leaves the `f64` range.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("gamma of NaN".into()));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if x > GAMMA_MAX_ARG {
        return Err(Error::Overflow(x));
    }
    let g = libm::tgamma(x);
    if g.is_finite() {
        Ok(g)
    } else {
        Err(Error::Overflow(x))
    }
}

/// ln|Γ(x)| together with the sign of Γ(x).
pub fn ln_gamma(x: f64) -> Result<(f64, f64)> {
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    let (value, sign) = libm::lgamma_r(x);
    Ok((value, if sign < 0 { -1.0 } else { 1.0 }))
}

/// 1/Γ(x), defined everywhere: exactly zero at the poles of Γ and for
/// arguments large enough that the reciprocal underflows.
pub fn reciprocal_gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if is_nonpositive_integer(x) || x == f64::INFINITY {
        return 0.0;
    }
    if x > 170.0 {
        let (lg, sign) = libm::lgamma_r(x);
        return if sign < 0 { -(-lg).exp() } else { (-lg).exp() };
    }
    let g = libm::tgamma(x);
    if g.is_infinite() {
        // close enough to a pole that Γ overflowed
        0.0
    } else {
        1.0 / g
    }
}

/// B(a, b) = Γ(a)Γ(b)/Γ(a+b) for a, b > 0.
///
/// The arguments are ordered before evaluation, so `beta(a, b)` and
/// `beta(b, a)` follow the same code path and agree bit for bit. Large
/// arguments go through log Γ so the intermediate products never overflow.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::Domain(format!("beta({a}, {b}) needs positive arguments")));
    }
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let sum = lo + hi;
    if sum < 150.0 {
        return Ok(libm::tgamma(lo) * libm::tgamma(hi) / libm::tgamma(sum));
    }
    let (la, _) = libm::lgamma_r(lo);
    let (lb, _) = libm::lgamma_r(hi);
    let (ls, _) = libm::lgamma_r(sum);
    Ok((la + lb - ls).exp())
}
