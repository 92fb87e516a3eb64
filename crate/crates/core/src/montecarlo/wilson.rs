//! Wilson score interval for a binomial proportion.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Two-sided standard normal quantile for `confidence` (0.95 -> 1.95996...).
pub fn normal_quantile(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::domain("confidence", confidence));
    }
    let std = Normal::standard();
    Ok(std.inverse_cdf(0.5 + 0.5 * confidence))
}

/// Wilson score interval at `confidence`.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    wilson_interval_z(successes, trials, normal_quantile(confidence)?)
}

/// Wilson score interval for `z` standard errors.
pub fn wilson_interval_z(successes: u64, trials: u64, z: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::domain("trials", 0.0));
    }
    if successes > trials {
        return Err(Error::domain("successes", successes as f64));
    }
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::domain("z", z));
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    Ok((lo, hi))
}
