use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Number of instances to label by hand so that a proportion estimated from
/// them reaches the given two-sided `confidence` and `margin`.
///
/// Uses the worst-case proportion p = 0.5 and a finite-population correction.
pub fn validation_sample_size(population: u64, confidence: f64, margin: f64) -> Result<u64> {
    if population == 0 {
        return Err(Error::InvalidArgument("population must be at least 1".into()));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence {confidence} not in (0, 1)")));
    }
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::InvalidArgument(format!("margin {margin} not in (0, 1)")));
    }
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let p = 0.5;
    let n0 = z * z * p * (1.0 - p) / (margin * margin);
    let n = n0 / (1.0 + (n0 - 1.0) / population as f64);
    Ok((n.ceil() as u64).clamp(1, population))
}
