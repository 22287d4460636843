//! Derivative-based outlier rule shared by the S-H pixel filter and the depth gate.
//!
//! Given a history of `(timestamp, value)` samples, the latest rate of change
//! is compared against the mean absolute rate over the preceding `window`
//! derivatives. The latest derivative is an outlier when it exceeds
//! `rel_threshold` times that mean and, when a floor is set, also exceeds
//! the floor.

use crate::error::{Error, Result};

/// Outcome of evaluating the newest sample of a history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck {
    /// |rate| between the last two samples.
    pub latest_rate: f64,
    /// Mean |rate| of the reference window, `None` during warm-up.
    pub reference_rate: Option<f64>,
    /// Relative threshold (`rel_threshold` times the reference mean).
    pub threshold: Option<f64>,
    pub is_outlier: bool,
}

/// Absolute rates between consecutive samples, in history order.
pub(crate) fn abs_rates(history: &[(f64, f64)]) -> Result<Vec<f64>> {
    if history.len() < 2 {
        return Err(Error::InsufficientHistory { needed: 2, got: history.len() });
    }
    history
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let dt = w[1].0 - w[0].0;
            if !(dt > 0.0) {
                return Err(Error::NonMonotoneTimestamp { index: i + 1, prev: w[0].0, next: w[1].0 });
            }
            Ok(((w[1].1 - w[0].1) / dt).abs())
        })
        .collect()
}

/// Evaluate the newest sample against the mean of the `window` rates before it.
///
/// During warm-up (fewer than `window` reference rates) only the absolute
/// floor applies, so with `min_rate == 0` warm-up never flags.
pub fn check_latest(
    history: &[(f64, f64)],
    window: usize,
    rel_threshold: f64,
    min_rate: f64,
) -> Result<DerivativeCheck> {
    let rates = abs_rates(history)?;
    let (latest, earlier) = rates.split_last().expect("at least one rate");
    let beyond_floor = min_rate > 0.0 && *latest > min_rate;
    if earlier.len() < window {
        return Ok(DerivativeCheck {
            latest_rate: *latest,
            reference_rate: None,
            threshold: None,
            is_outlier: beyond_floor,
        });
    }
    let reference = &earlier[earlier.len() - window..];
    let mean = reference.iter().sum::<f64>() / window as f64;
    let threshold = rel_threshold * mean;
    Ok(DerivativeCheck {
        latest_rate: *latest,
        reference_rate: Some(mean),
        threshold: Some(threshold),
        is_outlier: *latest > threshold && (min_rate == 0.0 || beyond_floor),
    })
}

/// Build a history whose consecutive rates are exactly `rates`, one second apart.
#[cfg(test)]
pub(crate) fn history_from_rates(rates: &[f64]) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0)];
    let mut v = 0.0;
    for (i, r) in rates.iter().enumerate() {
        v += r;
        out.push(((i + 1) as f64, v));
    }
    out
}
