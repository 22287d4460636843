//! Derivative-based outlier gate for depth measurements.
//!
//! A depth sample is an outlier when its rate of change against the last
//! accepted sample exceeds `rel_threshold` times the mean absolute rate over
//! the previous `window` accepted rates. Rejected samples never enter the
//! history. Two additions keep the rule usable on real streams:
//!
//! * A sample is only rejected when its rate also exceeds a floor. Without
//!   it the accepted-only mean shrinks geometrically on a stationary noisy
//!   stream until every sample is rejected. The floor is `noise_factor`
//!   times the median absolute rate between consecutive raw samples, rejected
//!   ones included, and never below `min_rate`. The median ignores short
//!   outlier bursts but follows sensor noise, which grows quickly with
//!   range. The floor also applies during warm-up, when there is no reference
//!   mean yet.
//! * After `max_consecutive_rejections` rejections in a row the gate restarts
//!   from the current sample, so a genuine change of motion regime cannot lock
//!   the depth channel out indefinitely.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outlier;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    pub window: usize,
    pub rel_threshold: f64,
    /// Smallest rate floor (m/s). Zero, together with a zero `noise_factor`,
    /// gives the pure relative rule.
    pub min_rate: f64,
    /// Raw rates in the noise estimate.
    pub noise_window: usize,
    /// Quantile of the raw rates used as the noise level.
    pub noise_quantile: f64,
    /// Floor as a multiple of the noise level.
    pub noise_factor: f64,
    /// Restart after this many consecutive rejections. Zero disables restarts.
    pub max_consecutive_rejections: usize,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            window: 10,
            rel_threshold: 1.25,
            min_rate: MIN_RATE,
            noise_window: 60,
            noise_quantile: 0.25,
            noise_factor: 6.0,
            max_consecutive_rejections: 15,
        }
    }
}

impl GateConfig {
    /// The bare relative rule: no rate floor, no restarts.
    pub fn relative_only() -> Self {
        Self { min_rate: 0.0, noise_factor: 0.0, max_consecutive_rejections: 0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::Config("gate window must be at least 2".into()));
        }
        if !(self.rel_threshold > 1.0) || !self.rel_threshold.is_finite() {
            return Err(Error::Config("gate threshold ratio must exceed 1".into()));
        }
        if !(self.min_rate >= 0.0) || !self.min_rate.is_finite() {
            return Err(Error::Config("gate rate floor must be non-negative".into()));
        }
        if !(self.noise_factor >= 0.0) || !self.noise_factor.is_finite() {
            return Err(Error::Config("gate noise factor must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.noise_quantile) {
            return Err(Error::Config("gate noise quantile must lie in [0, 1]".into()));
        }
        if self.noise_factor > 0.0 && self.noise_window == 0 {
            return Err(Error::Config("gate noise window must be positive".into()));
        }
        Ok(())
    }
}

const MIN_RATE: f64 = 0.25;

/// True when the newest entry of `depth_history` is an outlier.
///
/// `depth_history` is `(timestamp, depth_m)` of previously accepted samples
/// followed by the candidate as the last entry. Without the raw stream the
/// floor is `min_rate`.
pub fn gate_check(depth_history: &[(f64, f64)], cfg: &GateConfig) -> Result<bool> {
    Ok(outlier::check_latest(depth_history, cfg.window, cfg.rel_threshold, cfg.min_rate)?.is_outlier)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateVerdict {
    /// First sample of a (re)started history; accepted without a rate test.
    Seeded,
    Accepted,
    Rejected,
    /// Too many rejections in a row: history restarted from this sample,
    /// which is not used for correction.
    Restarted,
}

impl GateVerdict {
    pub fn is_open(self) -> bool {
        matches!(self, GateVerdict::Seeded | GateVerdict::Accepted)
    }
}

/// Stateful gate over a depth stream.
#[derive(Debug, Clone)]
pub struct DepthGate {
    cfg: GateConfig,
    accepted: VecDeque<(f64, f64)>,
    raw: VecDeque<(f64, f64)>,
    consecutive_rejections: usize,
    scratch: Vec<(f64, f64)>,
}

impl DepthGate {
    pub fn new(cfg: GateConfig) -> Self {
        Self {
            cfg,
            accepted: VecDeque::with_capacity(cfg.window + 2),
            raw: VecDeque::with_capacity(cfg.noise_window + 2),
            consecutive_rejections: 0,
            scratch: Vec::new(),
        }
    }

    pub fn config(&self) -> &GateConfig {
        &self.cfg
    }

    pub fn consecutive_rejections(&self) -> usize {
        self.consecutive_rejections
    }

    /// Test a new depth sample and update the accepted and raw histories.
    pub fn observe(&mut self, t: f64, depth: f64) -> Result<GateVerdict> {
        if self.raw.back().is_some_and(|&(prev, _)| t <= prev) {
            return Err(Error::NonMonotoneTimestamp { index: 0, prev: self.raw.back().unwrap().0, next: t });
        }
        if self.raw.len() == self.cfg.noise_window + 1 {
            self.raw.pop_front();
        }
        self.raw.push_back((t, depth));
        if self.accepted.is_empty() {
            self.push(t, depth);
            return Ok(GateVerdict::Seeded);
        }
        self.scratch.clear();
        self.scratch.extend(self.accepted.iter().copied());
        self.scratch.push((t, depth));
        let check = outlier::check_latest(&self.scratch, self.cfg.window, self.cfg.rel_threshold, self.floor())?;
        if !check.is_outlier {
            self.consecutive_rejections = 0;
            self.push(t, depth);
            return Ok(GateVerdict::Accepted);
        }
        self.consecutive_rejections += 1;
        let limit = self.cfg.max_consecutive_rejections;
        if limit > 0 && self.consecutive_rejections >= limit {
            self.accepted.clear();
            self.consecutive_rejections = 0;
            self.push(t, depth);
            return Ok(GateVerdict::Restarted);
        }
        Ok(GateVerdict::Rejected)
    }

    /// Current rate floor (m/s).
    pub fn floor(&self) -> f64 {
        if self.cfg.noise_factor == 0.0 || self.raw.len() < 2 {
            return self.cfg.min_rate;
        }
        let mut rates: Vec<f64> = self
            .raw
            .iter()
            .zip(self.raw.iter().skip(1))
            .map(|(a, b)| ((b.1 - a.1) / (b.0 - a.0)).abs())
            .collect();
        rates.sort_by(f64::total_cmp);
        let idx = ((rates.len() - 1) as f64 * self.cfg.noise_quantile).round() as usize;
        self.cfg.min_rate.max(self.cfg.noise_factor * rates[idx])
    }

    fn push(&mut self, t: f64, depth: f64) {
        // window rates plus the reference sample
        if self.accepted.len() == self.cfg.window + 1 {
            self.accepted.pop_front();
        }
        self.accepted.push_back((t, depth));
    }
}
