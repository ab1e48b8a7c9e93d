use crate::error::{Error, Result};

/// Min-Max normalization over the whole slice:
/// `(x - min) / (max - min) * (n_max - n_min) + n_min`.
///
/// The minimum maps to exactly `n_min` and the maximum to exactly `n_max`.
/// A constant input has no spread and maps to `n_min` everywhere.
pub fn min_max_normalize(values: &[f64], n_min: f64, n_max: f64) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !n_min.is_finite() || !n_max.is_finite() || n_max <= n_min {
        return Err(Error::InvalidRange { n_min, n_max });
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi == lo {
        return Ok(vec![n_min; values.len()]);
    }
    let spread = hi - lo;
    let range = n_max - n_min;
    Ok(values
        .iter()
        .map(|&x| {
            if x == hi {
                n_max
            } else {
                ((x - lo) / spread * range + n_min).min(n_max)
            }
        })
        .collect())
}
