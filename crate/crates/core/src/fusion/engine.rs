//! Frame-by-frame fusion of the monocular estimate and the depth measurement.
//!
//! Each frame:
//! 1. the S-H pixel distance is mapped to a monocular distance and screened by
//!    the S-H rate rule;
//! 2. the prediction step runs with the distance rate taken from the recent
//!    monocular estimates (falling back to the filter's own rate);
//! 3. the depth measurement corrects the prediction only if the gate accepts it.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::ekf::{self, FilterState, NoiseConfig, MIN_DISTANCE_M};
use super::gate::{DepthGate, GateConfig, GateVerdict};
use crate::depth::DepthLineSample;
use crate::error::{Error, Result};
use crate::monocular::{self, KeypointFrame, MonocularModelParams, ShOutlierConfig};

/// One time step of paired sensor data, reduced to scalars.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorFrame {
    pub t: f64,
    /// S-H pixel distance, absent when the pose was not detected.
    pub sh_px: Option<f64>,
    /// Mean depth along the S-H line (m), absent when unavailable.
    pub depth_m: Option<f64>,
}

impl SensorFrame {
    pub fn new(t: f64, sh_px: Option<f64>, depth_m: Option<f64>) -> Self {
        Self { t, sh_px, depth_m }
    }
}

/// How the monocular rate fed into the prediction is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonoVelocityConfig {
    /// Number of most recent accepted monocular estimates in the rate fit.
    /// `2` is a plain finite difference of consecutive estimates.
    pub fit_window: usize,
    /// Minimum number of estimates before a rate is produced.
    pub min_points: usize,
    /// Estimates older than this (s) are dropped from the fit.
    pub max_age: f64,
    /// Fits whose slope standard error exceeds this (m/s) are not used.
    pub max_stderr: f64,
    /// Rates above this magnitude (m/s) are not used.
    pub max_speed: f64,
}

impl Default for MonoVelocityConfig {
    fn default() -> Self {
        Self { fit_window: 15, min_points: 6, max_age: 1.0, max_stderr: 0.5, max_speed: 4.0 }
    }
}

impl MonoVelocityConfig {
    pub fn finite_difference() -> Self {
        Self { fit_window: 2, min_points: 2, max_stderr: f64::INFINITY, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fit_window < 2 || self.min_points < 2 || self.min_points > self.fit_window {
            return Err(Error::Config("monocular rate fit needs 2 <= min_points <= fit_window".into()));
        }
        if !(self.max_age > 0.0) || !(self.max_stderr > 0.0) || !(self.max_speed > 0.0) {
            return Err(Error::Config("monocular rate limits must be positive".into()));
        }
        Ok(())
    }
}

/// How the monocular channel enters the filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MonocularMode {
    /// Rate of the monocular estimate drives the prediction.
    RateInput,
    /// Rate input plus a second direct-distance correction with this variance (m^2).
    RateAndMeasurement { variance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitConfig {
    /// Frames to wait for a depth measurement before initializing from the monocular estimate.
    pub depth_wait_frames: usize,
    pub p0_var: f64,
    pub pdot0_var: f64,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self { depth_wait_frames: 10, p0_var: 0.25, pdot0_var: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub model: MonocularModelParams,
    pub noise: NoiseConfig,
    pub gate: GateConfig,
    pub sh_outlier: ShOutlierConfig,
    pub mono_velocity: MonoVelocityConfig,
    pub mode: MonocularMode,
    pub init: InitConfig,
    pub min_distance: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            model: MonocularModelParams::default(),
            noise: NoiseConfig::default(),
            gate: GateConfig::default(),
            sh_outlier: ShOutlierConfig::default(),
            mono_velocity: MonoVelocityConfig::default(),
            mode: MonocularMode::RateInput,
            init: InitConfig::default(),
            min_distance: MIN_DISTANCE_M,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.noise.validate()?;
        self.gate.validate()?;
        self.sh_outlier.validate()?;
        self.mono_velocity.validate()?;
        if let MonocularMode::RateAndMeasurement { variance } = self.mode {
            if !(variance > 0.0) {
                return Err(Error::Config("monocular measurement variance must be positive".into()));
            }
        }
        if !(self.init.p0_var > 0.0) || !(self.init.pdot0_var > 0.0) {
            return Err(Error::Config("initial covariance must be positive".into()));
        }
        if !(self.min_distance > 0.0) {
            return Err(Error::Config("minimum distance must be positive".into()));
        }
        Ok(())
    }
}

/// Per-frame diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FrameFlags {
    /// Neither modality delivered a measurement.
    pub no_measurement: bool,
    /// The S-H pixel distance was outside the monocular model's domain.
    pub mono_domain: bool,
    /// The S-H rate rule flagged this frame.
    pub mono_outlier: bool,
    /// The prediction used the monocular rate.
    pub mono_rate_used: bool,
    /// The predicted distance was non-physical and clamped.
    pub clamped: bool,
    /// The depth gate restarted on this frame.
    pub gate_restart: bool,
    /// The depth line pixel count left the nominal envelope.
    pub depth_envelope: bool,
}

/// Per-frame trace record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionOutput {
    pub timestamp: f64,
    /// Fused distance (m); absent until the filter is initialized.
    pub fused_cb: Option<f64>,
    /// This frame's monocular estimate (m).
    pub monocular_cb: Option<f64>,
    /// This frame's depth measurement (m).
    pub depth_cb: Option<f64>,
    /// The depth measurement was used for correction.
    pub gate_open: bool,
    pub covariance_trace: Option<f64>,
    pub flags: FrameFlags,
}

/// Ordinary least squares slope of `(t, v)` and its standard error.
fn slope_fit(points: impl Iterator<Item = (f64, f64)> + Clone) -> Option<(f64, f64)> {
    let n = points.clone().count();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let (st, sv) = points.clone().fold((0.0, 0.0), |(a, b), (t, v)| (a + t, b + v));
    let (mt, mv) = (st / nf, sv / nf);
    let (sxx, sxy) = points.clone().fold((0.0, 0.0), |(a, b), (t, v)| {
        let dt = t - mt;
        (a + dt * dt, b + dt * (v - mv))
    });
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    if n == 2 {
        return Some((slope, 0.0));
    }
    let ssr: f64 = points
        .map(|(t, v)| {
            let r = v - (mv + slope * (t - mt));
            r * r
        })
        .sum();
    Some((slope, (ssr / (nf - 2.0) / sxx).sqrt()))
}

/// Sliding rate estimate over accepted monocular distances.
#[derive(Debug, Clone)]
struct MonoRateTracker {
    cfg: MonoVelocityConfig,
    samples: VecDeque<(f64, f64)>,
}

impl MonoRateTracker {
    fn new(cfg: MonoVelocityConfig) -> Self {
        Self { cfg, samples: VecDeque::with_capacity(cfg.fit_window + 1) }
    }

    fn push(&mut self, t: f64, distance_m: f64) {
        if self.samples.len() == self.cfg.fit_window {
            self.samples.pop_front();
        }
        self.samples.push_back((t, distance_m));
    }

    fn rate(&mut self, now: f64) -> Option<f64> {
        while self.samples.front().is_some_and(|(t, _)| now - t > self.cfg.max_age) {
            self.samples.pop_front();
        }
        if self.samples.len() < self.cfg.min_points {
            return None;
        }
        let (slope, stderr) = slope_fit(self.samples.iter().copied())?;
        (stderr <= self.cfg.max_stderr && slope.abs() <= self.cfg.max_speed).then_some(slope)
    }
}

/// Sequential fusion state machine for one tracked subject.
#[derive(Debug, Clone)]
pub struct FusionEngine {
    cfg: FusionConfig,
    state: Option<FilterState>,
    gate: DepthGate,
    sh_history: VecDeque<(f64, f64)>,
    mono_rate: MonoRateTracker,
    frames_before_init: usize,
    last_t: Option<f64>,
}

impl FusionEngine {
    pub fn new(cfg: FusionConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            state: None,
            gate: DepthGate::new(cfg.gate),
            sh_history: VecDeque::with_capacity(cfg.sh_outlier.window + 3),
            mono_rate: MonoRateTracker::new(cfg.mono_velocity),
            frames_before_init: 0,
            last_t: None,
        })
    }

    pub fn config(&self) -> &FusionConfig {
        &self.cfg
    }

    pub fn state(&self) -> Option<&FilterState> {
        self.state.as_ref()
    }

    /// One fusion step from raw sensor records.
    ///
    /// An invalid keypoint frame counts as a missing monocular channel, as does a
    /// depth sample without valid pixels.
    pub fn fuse_step(
        &mut self,
        t: f64,
        keypoints: Option<&KeypointFrame>,
        depth: Option<&DepthLineSample>,
    ) -> Result<FusionOutput> {
        let sh_px = match keypoints {
            Some(k) if k.valid => Some(monocular::sh_pixel_distance(k)?),
            _ => None,
        };
        let depth_m = depth.and_then(|d| d.mean_depth);
        let mut out = self.step(&SensorFrame::new(t, sh_px, depth_m))?;
        out.flags.depth_envelope = depth.is_some_and(|d| d.range_violation());
        Ok(out)
    }

    /// One fusion step from a scalar sensor frame.
    pub fn step(&mut self, frame: &SensorFrame) -> Result<FusionOutput> {
        let t = frame.t;
        if !t.is_finite() {
            return Err(Error::Config(format!("non-finite timestamp {t}")));
        }
        if let Some(prev) = self.last_t {
            if t <= prev {
                return Err(Error::NonMonotoneTimestamp { index: 0, prev, next: t });
            }
        }
        if let Some(z) = frame.depth_m {
            if !(z > 0.0) || !z.is_finite() {
                return Err(Error::NonPositiveMeasurement(z));
            }
        }
        if let Some(x) = frame.sh_px {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::OutOfRange { value: x, reason: "S-H distance must be positive".into() });
            }
        }
        self.last_t = Some(t);

        let mut flags = FrameFlags { no_measurement: frame.sh_px.is_none() && frame.depth_m.is_none(), ..Default::default() };

        // monocular channel
        let mut mono_m = None;
        let mut mono_usable = false;
        if let Some(x) = frame.sh_px {
            flags.mono_outlier = self.sh_is_outlier(t, x)?;
            match monocular::monocular_cb_estimate(x, &self.cfg.model) {
                Ok(cm) => {
                    mono_m = Some(cm / 100.0);
                    mono_usable = !flags.mono_outlier;
                }
                Err(_) => flags.mono_domain = true,
            }
        }
        if let (Some(m), true) = (mono_m, mono_usable) {
            self.mono_rate.push(t, m);
        }

        let Some(prev) = self.state else {
            return Ok(self.initialize(frame, mono_m.filter(|_| mono_usable), mono_m, flags));
        };

        let mut state = prev;
        if let Some(v) = self.mono_rate.rate(t) {
            state.p_dot = v;
            flags.mono_rate_used = true;
        }
        let pred = ekf::ekf_predict(&state, t - prev.timestamp, &self.cfg.noise, self.cfg.min_distance)?;
        flags.clamped = pred.clamped;
        let mut state = pred.state;
        state.timestamp = t;

        if let (MonocularMode::RateAndMeasurement { variance }, Some(m), true) = (self.cfg.mode, mono_m, mono_usable) {
            state = ekf::ekf_correct_with_variance(&state, m, variance)?.state;
        }

        let mut gate_open = false;
        if let Some(z) = frame.depth_m {
            let verdict = self.gate.observe(t, z)?;
            flags.gate_restart = verdict == GateVerdict::Restarted;
            if verdict.is_open() {
                state = ekf::ekf_correct(&state, z, &self.cfg.noise)?.state;
                gate_open = true;
            }
        }

        self.state = Some(state);
        Ok(FusionOutput {
            timestamp: t,
            fused_cb: Some(state.p),
            monocular_cb: mono_m,
            depth_cb: frame.depth_m,
            gate_open,
            covariance_trace: Some(state.trace()),
            flags,
        })
    }

    fn sh_is_outlier(&mut self, t: f64, x: f64) -> Result<bool> {
        // window derivatives before the newest one, plus the newest
        let keep = self.cfg.sh_outlier.window + 2;
        if self.sh_history.len() == keep {
            self.sh_history.pop_front();
        }
        self.sh_history.push_back((t, x));
        if self.sh_history.len() < 2 {
            return Ok(false);
        }
        let history: Vec<(f64, f64)> = self.sh_history.iter().copied().collect();
        monocular::sh_outlier_check(&history, &self.cfg.sh_outlier)
    }

    fn initialize(&mut self, frame: &SensorFrame, mono_usable: Option<f64>, mono_m: Option<f64>, flags: FrameFlags) -> FusionOutput {
        let waited = self.frames_before_init;
        self.frames_before_init += 1;
        let (p, gate_open) = match (frame.depth_m, mono_usable) {
            (Some(z), _) => {
                // seeds the gate history
                let _ = self.gate.observe(frame.t, z);
                (Some(z), true)
            }
            (None, Some(m)) if waited >= self.cfg.init.depth_wait_frames => (Some(m), false),
            _ => (None, false),
        };
        let state = p.map(|p| {
            let cov = [[self.cfg.init.p0_var, 0.0], [0.0, self.cfg.init.pdot0_var]];
            FilterState::new(p, 0.0, cov, frame.t)
        });
        self.state = state;
        FusionOutput {
            timestamp: frame.t,
            fused_cb: state.map(|s| s.p),
            monocular_cb: mono_m,
            depth_cb: frame.depth_m,
            gate_open,
            covariance_trace: state.map(|s| s.trace()),
            flags,
        }
    }
}

/// Run the filter over a whole stream; one output per input frame.
pub fn run_fusion(frames: &[SensorFrame], cfg: &FusionConfig) -> Result<Vec<FusionOutput>> {
    for (i, w) in frames.windows(2).enumerate() {
        if !(w[1].t > w[0].t) {
            return Err(Error::NonMonotoneTimestamp { index: i + 1, prev: w[0].t, next: w[1].t });
        }
    }
    let mut engine = FusionEngine::new(*cfg)?;
    frames.iter().map(|f| engine.step(f)).collect()
}
