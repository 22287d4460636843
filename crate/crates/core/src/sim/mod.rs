//! Seeded synthetic scenarios: ground-truth trajectories and the paired
//! keypoint / depth streams a person-following camera would record.

mod render;
mod trajectory;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monocular::MonocularModelParams;

pub use render::{render_sensors, synthesize_depth_frame, OutlierProcess, RenderedFrame};
pub use trajectory::{generate_trajectory, DepthLineParams, GroundTruthFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    DiscreteFwdBack,
    ContinuousFwdBack,
    LateralSweep,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] =
        [ScenarioKind::DiscreteFwdBack, ScenarioKind::ContinuousFwdBack, ScenarioKind::LateralSweep];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::DiscreteFwdBack => "discrete",
            ScenarioKind::ContinuousFwdBack => "continuous",
            ScenarioKind::LateralSweep => "lateral",
        }
    }

    /// Length of one full pass of the default scenario (s).
    pub fn default_duration(self) -> f64 {
        match self {
            ScenarioKind::DiscreteFwdBack => 53.0,
            ScenarioKind::ContinuousFwdBack | ScenarioKind::LateralSweep => 60.0,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete" | "discrete_fwd_back" => Ok(ScenarioKind::DiscreteFwdBack),
            "continuous" | "continuous_fwd_back" => Ok(ScenarioKind::ContinuousFwdBack),
            "lateral" | "lateral_sweep" => Ok(ScenarioKind::LateralSweep),
            other => Err(Error::Config(format!("unknown scenario '{other}' (discrete, continuous, lateral)"))),
        }
    }
}

/// Depth error as a function of true distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthNoiseModel {
    /// Noise std inside the optimal range (m).
    pub base_sigma: f64,
    pub optimal_max: f64,
    pub min_range: f64,
    /// Exponential noise growth beyond `optimal_max` (1/m).
    pub growth_rate: f64,
    /// Positive bias per meter beyond `optimal_max`.
    pub overshoot_bias_rate: f64,
    pub max_range: f64,
}

impl Default for DepthNoiseModel {
    fn default() -> Self {
        Self {
            base_sigma: 0.005,
            optimal_max: 4.0,
            min_range: 0.4,
            growth_rate: 0.8,
            overshoot_bias_rate: 0.05,
            max_range: 10.0,
        }
    }
}

impl DepthNoiseModel {
    pub fn noiseless() -> Self {
        Self { base_sigma: 0.0, growth_rate: 0.0, overshoot_bias_rate: 0.0, ..Self::default() }
    }

    pub fn sigma(&self, d: f64) -> f64 {
        if d <= self.optimal_max {
            self.base_sigma
        } else {
            self.base_sigma * (self.growth_rate * (d - self.optimal_max)).exp()
        }
    }

    pub fn bias(&self, d: f64) -> f64 {
        if d <= self.optimal_max {
            0.0
        } else {
            self.overshoot_bias_rate * (d - self.optimal_max)
        }
    }

    pub fn in_range(&self, d: f64) -> bool {
        d >= self.min_range && d <= self.max_range
    }

    /// A zero `base_sigma` is allowed for noiseless streams.
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.base_sigma,
            self.optimal_max,
            self.min_range,
            self.growth_rate,
            self.overshoot_bias_rate,
            self.max_range,
        ];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config("depth noise parameters must be finite and non-negative".into()));
        }
        if !(self.min_range < self.optimal_max && self.optimal_max < self.max_range) {
            return Err(Error::Config("depth ranges must satisfy min_range < optimal_max < max_range".into()));
        }
        Ok(())
    }
}

/// Bursts of gross depth errors.
///
/// Each frame starts a new burst with `probability_per_frame` (times
/// `edge_fov_multiplier` near the image edges in the lateral scenario). A burst
/// lasts a uniform number of frames in `burst_min..=burst_max`; every frame in
/// it gets an independent half-normal offset of scale `magnitude_sigma`,
/// pointing away from the camera with probability `far_fraction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierInjection {
    pub probability_per_frame: f64,
    pub magnitude_sigma: f64,
    pub burst_min: usize,
    pub burst_max: usize,
    pub edge_fov_multiplier: f64,
    pub far_fraction: f64,
}

impl Default for OutlierInjection {
    fn default() -> Self {
        Self {
            probability_per_frame: 0.03,
            magnitude_sigma: 1.0,
            burst_min: 1,
            burst_max: 5,
            edge_fov_multiplier: 4.0,
            far_fraction: 0.85,
        }
    }
}

impl OutlierInjection {
    pub fn none() -> Self {
        Self { probability_per_frame: 0.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.probability_per_frame) {
            return Err(Error::Config("outlier probability must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.far_fraction) {
            return Err(Error::Config("outlier far fraction must lie in [0, 1]".into()));
        }
        if !(self.magnitude_sigma >= 0.0) || !self.magnitude_sigma.is_finite() {
            return Err(Error::Config("outlier magnitude must be finite and non-negative".into()));
        }
        if self.burst_min == 0 || self.burst_min > self.burst_max {
            return Err(Error::Config("outlier bursts need 1 <= burst_min <= burst_max".into()));
        }
        if !(self.edge_fov_multiplier >= 0.0) || !self.edge_fov_multiplier.is_finite() {
            return Err(Error::Config("edge multiplier must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Pinhole camera used to place the keypoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub width: u32,
    pub height: u32,
    /// Horizontal field of view (degrees).
    pub hfov_deg: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self { width: 1280, height: 720, hfov_deg: 87.0 }
    }
}

impl CameraModel {
    pub fn half_fov(&self) -> f64 {
        0.5 * self.hfov_deg.to_radians()
    }

    pub fn fx(&self) -> f64 {
        0.5 * self.width as f64 / self.half_fov().tan()
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || !(self.hfov_deg > 0.0 && self.hfov_deg < 180.0) {
            return Err(Error::Config("camera needs a non-empty image and 0 < hfov < 180 degrees".into()));
        }
        Ok(())
    }
}

/// Trajectory shape parameters. Each scenario reads only its own group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryShape {
    pub plateau_near: f64,
    pub plateau_far: f64,
    pub plateau_step: f64,
    /// Pause on each plateau (s).
    pub plateau_pause: f64,
    /// Walking speed between plateaus (m/s).
    pub ramp_speed: f64,
    pub sine_mean: f64,
    pub sine_amplitude: f64,
    pub sine_period: f64,
    pub lateral_distance: f64,
    /// Peak bearing of the sweep as a fraction of the half field of view.
    pub lateral_fov_fraction: f64,
    pub lateral_period: f64,
}

impl Default for TrajectoryShape {
    fn default() -> Self {
        Self {
            plateau_near: 1.5,
            plateau_far: 6.5,
            plateau_step: 1.0,
            plateau_pause: 3.0,
            ramp_speed: 0.5,
            sine_mean: 4.0,
            sine_amplitude: 2.5,
            sine_period: 20.0,
            lateral_distance: 3.0,
            lateral_fov_fraction: 0.95,
            lateral_period: 12.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub duration: f64,
    pub frame_rate: f64,
    pub seed: u64,
    pub depth_noise: DepthNoiseModel,
    /// Isotropic std of each synthesized keypoint (px).
    pub keypoint_noise_px: f64,
    pub outlier: OutlierInjection,
    /// Real over assumed body height; 1.0 makes keypoints consistent with the model.
    pub height_factor: f64,
    pub shape: TrajectoryShape,
    pub camera: CameraModel,
    pub model: MonocularModelParams,
}

impl ScenarioConfig {
    pub fn new(kind: ScenarioKind, seed: u64) -> Self {
        Self {
            kind,
            duration: kind.default_duration(),
            frame_rate: 30.0,
            seed,
            depth_noise: DepthNoiseModel::default(),
            keypoint_noise_px: 1.5,
            outlier: OutlierInjection::default(),
            height_factor: 1.0,
            shape: TrajectoryShape::default(),
            camera: CameraModel::default(),
            model: MonocularModelParams::default(),
        }
    }

    /// Same trajectory with every noise and outlier source switched off.
    pub fn noiseless(mut self) -> Self {
        self.depth_noise = DepthNoiseModel::noiseless();
        self.keypoint_noise_px = 0.0;
        self.outlier = OutlierInjection::none();
        self
    }

    pub fn frame_period(&self) -> f64 {
        1.0 / self.frame_rate
    }

    pub fn frame_count(&self) -> usize {
        (self.duration * self.frame_rate).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::Config("duration must be positive".into()));
        }
        if !(self.frame_rate > 0.0) || !self.frame_rate.is_finite() {
            return Err(Error::Config("frame rate must be positive".into()));
        }
        if self.frame_count() == 0 {
            return Err(Error::Config("duration is shorter than one frame".into()));
        }
        if !(self.keypoint_noise_px >= 0.0) || !self.keypoint_noise_px.is_finite() {
            return Err(Error::Config("keypoint noise must be finite and non-negative".into()));
        }
        if !(self.height_factor > 0.0) || !self.height_factor.is_finite() {
            return Err(Error::Config("height factor must be positive".into()));
        }
        self.depth_noise.validate()?;
        self.outlier.validate()?;
        self.camera.validate()?;
        self.model.validate()?;
        trajectory::validate_shape(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn noise_model_in_range() {
        let m = DepthNoiseModel::default();
        assert_eq!(m.sigma(3.0), 0.005);
        assert_eq!(m.bias(3.0), 0.0);
    }

    #[test]
    fn noise_model_beyond_optimal_range() {
        let m = DepthNoiseModel::default();
        assert_abs_diff_eq!(m.sigma(6.0), 0.024765162, epsilon = 1e-9);
        assert_abs_diff_eq!(m.bias(6.0), 0.10, epsilon = 1e-12);
    }

    #[test]
    fn camera_focal_length() {
        assert_abs_diff_eq!(CameraModel::default().fx(), 674.419280180, epsilon = 1e-6);
    }

    #[test]
    fn scenario_names_parse() {
        for k in ScenarioKind::ALL {
            assert_eq!(k.name().parse::<ScenarioKind>().unwrap(), k);
        }
        assert!("sideways".parse::<ScenarioKind>().is_err());
    }

    #[test]
    fn config_validation() {
        let ok = ScenarioConfig::new(ScenarioKind::LateralSweep, 1);
        assert!(ok.validate().is_ok());
        assert!(ScenarioConfig { duration: 0.0, ..ok }.validate().is_err());
        assert!(ScenarioConfig { frame_rate: -1.0, ..ok }.validate().is_err());
        let mut bad = ok;
        bad.outlier.probability_per_frame = 1.5;
        assert!(bad.validate().is_err());
        let mut bad = ok;
        bad.depth_noise.min_range = 5.0;
        assert!(bad.validate().is_err());
    }
}
