//! Stable scalar special functions backing the rectified learning rule.
//!
//! The rectified gradient needs the ratio e^{-z^2} / (1 - erf(z)), which is a
//! 0/0-in-disguise for large positive z and underflows for large negative z.
//! Everything here is built around the scaled complementary error function
//! erfcx(z) = e^{z^2} (1 - erf(z)), which stays representable where the naive
//! composition overflows (naive e^{z^2} erfc(z) dies near z = 27, while the
//! training code at sigma = 1e-4 produces z of order 1e4).

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NumericsError {
    #[error("non-finite argument: {0}")]
    NonFinite(f64),
}

const FRAC_1_SQRT_PI: f64 = 0.5641895835477563;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Error function, absolute accuracy better than 1e-13 on |z| <= 6.
pub fn erf(z: f64) -> Result<f64, NumericsError> {
    if !z.is_finite() {
        return Err(NumericsError::NonFinite(z));
    }
    Ok(erf_raw(z))
}

/// Scaled complementary error function e^{z^2} (1 - erf(z)).
///
/// Finite for arbitrarily large positive z (asymptotically 1/(z sqrt(pi))).
/// For z below about -26.6 the true value exceeds f64 range and +inf is
/// returned; callers that need the reciprocal should use
/// [`gaussian_hazard_ratio`], which handles that regime without overflow.
pub fn erfcx(z: f64) -> Result<f64, NumericsError> {
    if !z.is_finite() {
        return Err(NumericsError::NonFinite(z));
    }
    Ok(erfcx_raw(z))
}

/// The hazard-style ratio e^{-z^2} / (1 - erf(z)).
///
/// Equals 1/erfcx(z). Monotonically increasing; tends to 0 as z -> -inf
/// (underflowing to exactly 0, which is what shuts learning off on
/// inhibitor-alone trials) and to z*sqrt(pi) as z -> +inf.
pub fn gaussian_hazard_ratio(z: f64) -> Result<f64, NumericsError> {
    if !z.is_finite() {
        return Err(NumericsError::NonFinite(z));
    }
    Ok(hazard_raw(z))
}

/// log(1 - erf(z)) without intermediate underflow.
pub fn log_erfc(z: f64) -> Result<f64, NumericsError> {
    if !z.is_finite() {
        return Err(NumericsError::NonFinite(z));
    }
    Ok(log_erfc_raw(z))
}

pub(crate) fn erf_raw(z: f64) -> f64 {
    let a = z.abs();
    if a <= 2.0 {
        erf_series(z)
    } else {
        let tail = (-z * z).exp() * erfcx_cf(a);
        (1.0 - tail).copysign(z)
    }
}

pub(crate) fn erfcx_raw(z: f64) -> f64 {
    if z >= 2.0 {
        erfcx_cf(z)
    } else if z >= 0.0 {
        (z * z).exp() * (1.0 - erf_series(z))
    } else {
        // erfcx(-z) = 2 e^{z^2} - erfcx(z); overflows to +inf below z ~ -26.6
        2.0 * (z * z).exp() - erfcx_raw(-z)
    }
}

pub(crate) fn hazard_raw(z: f64) -> f64 {
    if z >= 0.0 {
        // erfcx is in (0, 1] here, so the reciprocal never overflows
        1.0 / erfcx_raw(z)
    } else {
        // 1 - erf(z) = 1 + erf(-z) lies in [1, 2); only e^{-z^2} can underflow
        (-z * z).exp() / (1.0 + erf_raw(-z))
    }
}

pub(crate) fn log_erfc_raw(z: f64) -> f64 {
    if z >= 0.0 {
        erfcx_raw(z).ln() - z * z
    } else {
        (erf_raw(-z)).ln_1p()
    }
}

/// z-score form used throughout training: phi.x / (sqrt(2) sigma).
pub(crate) fn z_score(linear: f64, sigma: f64) -> f64 {
    linear / (SQRT_2 * sigma)
}

/// Maclaurin series for erf, adequate for |z| <= 2.
fn erf_series(z: f64) -> f64 {
    let zz = z * z;
    let mut term = z;
    let mut sum = z;
    let mut k = 1.0f64;
    loop {
        term *= -zz / k;
        let contrib = term / (2.0 * k + 1.0);
        sum += contrib;
        if contrib.abs() < 1e-18 {
            break;
        }
        k += 1.0;
    }
    2.0 * FRAC_1_SQRT_PI * sum
}

/// Laplace continued fraction for erfcx, valid for z >= 2:
/// sqrt(pi) e^{z^2} erfc(z) = 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
/// evaluated by the modified Lentz algorithm.
fn erfcx_cf(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = z;
    let mut c = z;
    let mut d = 0.0f64;
    for n in 1..200 {
        let a = n as f64 / 2.0;
        d = z + a * d;
        if d == 0.0 {
            d = TINY;
        }
        d = 1.0 / d;
        c = z + a / c;
        if c == 0.0 {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    FRAC_1_SQRT_PI / f
}
