//! Error statistics of a distance estimate against ground truth.
//!
//! Errors are `estimate - truth` in centimeters. The reported mean error is the
//! absolute value of the signed mean, and the standard deviation is the
//! population one, so `rmse^2 = mean^2 + std^2` holds for every report.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Keypoint,
    Depth,
    Fused,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Keypoint, Method::Depth, Method::Fused];

    pub fn name(self) -> &'static str {
        match self {
            Method::Keypoint => "keypoint",
            Method::Depth => "depth",
            Method::Fused => "fused",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: Method,
    /// |mean(e)| (cm).
    pub mean_abs_err_cm: f64,
    pub rmse_cm: f64,
    /// Population standard deviation of e (cm).
    pub std_cm: f64,
    /// Frames that entered the statistics.
    pub n_frames: usize,
    /// Frames without an estimate or without ground truth nearby.
    pub n_excluded: usize,
}

impl MetricsReport {
    /// Relative mismatch between `rmse` and `sqrt(mean^2 + std^2)`.
    pub fn identity_residual(&self) -> f64 {
        identity_residual(self.mean_abs_err_cm, self.rmse_cm, self.std_cm)
    }
}

/// Relative mismatch between a reported RMSE and the one implied by mean error and std.
pub fn identity_residual(mean_abs_err: f64, rmse: f64, std: f64) -> f64 {
    let implied = mean_abs_err.hypot(std);
    if rmse == 0.0 {
        implied
    } else {
        (implied - rmse).abs() / rmse
    }
}

/// Statistics over raw errors in centimeters.
pub fn error_stats(method: Method, errors_cm: &[f64], n_excluded: usize) -> Result<MetricsReport> {
    if errors_cm.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    if let Some(e) = errors_cm.iter().find(|e| !e.is_finite()) {
        return Err(Error::OutOfRange { value: *e, reason: "error must be finite".into() });
    }
    let n = errors_cm.len() as f64;
    let mean = errors_cm.iter().sum::<f64>() / n;
    let var = errors_cm.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
    let mse = errors_cm.iter().map(|e| e * e).sum::<f64>() / n;
    Ok(MetricsReport {
        method,
        mean_abs_err_cm: mean.abs(),
        rmse_cm: mse.sqrt(),
        std_cm: var.sqrt(),
        n_frames: errors_cm.len(),
        n_excluded,
    })
}

fn nearest(truth: &[(f64, f64)], t: f64) -> (f64, f64) {
    let i = truth.partition_point(|(tt, _)| *tt < t);
    match (i.checked_sub(1).map(|j| truth[j]), truth.get(i).copied()) {
        (Some(a), Some(b)) => {
            if t - a.0 <= b.0 - t {
                a
            } else {
                b
            }
        }
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => unreachable!("truth is non-empty"),
    }
}

/// Associate each estimate with the nearest ground-truth sample within
/// `max_dt` seconds and summarize the errors.
///
/// Values are in meters. `None` estimates and estimates without a truth sample
/// in reach count as excluded. `truth` must be sorted by time.
pub fn compute_metrics(
    method: Method,
    estimates: &[(f64, Option<f64>)],
    truth: &[(f64, f64)],
    max_dt: f64,
) -> Result<MetricsReport> {
    if truth.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::Config("ground truth must be sorted by time".into()));
    }
    let mut errors = Vec::with_capacity(estimates.len());
    let mut excluded = 0;
    for &(t, est) in estimates {
        let matched = match (est, truth.is_empty()) {
            (Some(v), false) => {
                let (tt, gt) = nearest(truth, t);
                ((tt - t).abs() <= max_dt).then_some(v - gt)
            }
            _ => None,
        };
        match matched {
            Some(e) => errors.push(100.0 * e),
            None => excluded += 1,
        }
    }
    error_stats(method, &errors, excluded)
}

pub const CSV_HEADER: &str = "method,mean_abs_err_cm,rmse_cm,std_cm,n_frames,n_excluded";

pub fn write_reports_csv<W: Write>(mut w: W, reports: &[MetricsReport]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{:.6},{:.6},{:.6},{},{}",
            r.method, r.mean_abs_err_cm, r.rmse_cm, r.std_cm, r.n_frames, r.n_excluded
        )?;
    }
    Ok(())
}

pub fn write_reports_json<W: Write>(mut w: W, reports: &[MetricsReport]) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, reports).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}
