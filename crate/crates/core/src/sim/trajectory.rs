use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{ScenarioConfig, ScenarioKind, TrajectoryShape};
use crate::error::{Error, Result};
use crate::monocular::{self, KeypointFrame, Point2};

/// What the depth channel needs to synthesize a line sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthLineParams {
    /// Pixels on the S-H line.
    pub pixel_count: usize,
    /// The subject is in the outer band of the field of view.
    pub near_edge: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFrame {
    pub timestamp: f64,
    /// Euclidean camera-to-body distance (m).
    pub true_cb: f64,
    /// Sideways offset of the body in the camera frame (m).
    pub lateral_offset: f64,
    /// Noiseless keypoints.
    pub keypoints: KeypointFrame,
    pub depth_line: DepthLineParams,
}

/// Plateau-and-ramp schedule as `(start_time, start_distance, end_distance, duration)`.
fn discrete_segments(s: &TrajectoryShape) -> Vec<(f64, f64, f64, f64)> {
    let n = ((s.plateau_far - s.plateau_near) / s.plateau_step + 1e-9).floor() as usize;
    let up: Vec<f64> = (0..=n).map(|i| s.plateau_near + i as f64 * s.plateau_step).collect();
    let levels: Vec<f64> = up.iter().chain(up.iter().rev().skip(1)).copied().collect();
    let mut segments = Vec::with_capacity(2 * levels.len());
    let mut t = 0.0;
    for (i, &level) in levels.iter().enumerate() {
        segments.push((t, level, level, s.plateau_pause));
        t += s.plateau_pause;
        if let Some(&next) = levels.get(i + 1) {
            let ramp = (next - level).abs() / s.ramp_speed;
            segments.push((t, level, next, ramp));
            t += ramp;
        }
    }
    segments
}

fn discrete_distance(segments: &[(f64, f64, f64, f64)], t: f64) -> f64 {
    for &(start, from, to, len) in segments {
        if t < start + len {
            let u = if len > 0.0 { ((t - start) / len).clamp(0.0, 1.0) } else { 1.0 };
            return from + u * (to - from);
        }
    }
    segments.last().map_or(0.0, |s| s.2)
}

/// S-H pixel length the monocular model maps to `d` meters for a subject of
/// `height_factor` times the assumed height. Distances in the model's seam gap
/// get the boundary length.
fn keypoint_length(d: f64, cfg: &ScenarioConfig) -> Result<f64> {
    match monocular::monocular_cb_inverse(100.0 * d / cfg.height_factor, &cfg.model) {
        Ok(x) => Ok(x),
        Err(Error::Domain(_)) => Ok(cfg.model.branch_boundary),
        Err(e) => Err(e),
    }
}

/// Distance extremes of the configured scenario.
fn distance_span(cfg: &ScenarioConfig) -> (f64, f64) {
    let s = &cfg.shape;
    match cfg.kind {
        ScenarioKind::DiscreteFwdBack => (s.plateau_near, s.plateau_far),
        ScenarioKind::ContinuousFwdBack => (s.sine_mean - s.sine_amplitude, s.sine_mean + s.sine_amplitude),
        ScenarioKind::LateralSweep => (s.lateral_distance, s.lateral_distance),
    }
}

pub(super) fn validate_shape(cfg: &ScenarioConfig) -> Result<()> {
    let s = &cfg.shape;
    let fail = |m: &str| Err(Error::Config(m.into()));
    match cfg.kind {
        ScenarioKind::DiscreteFwdBack => {
            if !(s.plateau_near > 0.0 && s.plateau_far > s.plateau_near && s.plateau_step > 0.0) {
                return fail("plateaus need 0 < near < far and a positive step");
            }
            if !(s.plateau_pause >= 0.0 && s.ramp_speed > 0.0) {
                return fail("plateau pause must be non-negative and ramp speed positive");
            }
        }
        ScenarioKind::ContinuousFwdBack => {
            if !(s.sine_amplitude >= 0.0 && s.sine_period > 0.0) {
                return fail("sine amplitude must be non-negative and its period positive");
            }
        }
        ScenarioKind::LateralSweep => {
            if !(s.lateral_distance > 0.0 && s.lateral_period > 0.0) {
                return fail("lateral distance and period must be positive");
            }
            if !(s.lateral_fov_fraction >= 0.0 && s.lateral_fov_fraction < 1.0) {
                return fail("lateral sweep must stay inside the field of view");
            }
        }
    }
    let (lo, hi) = distance_span(cfg);
    let (min_ok, max_ok) = (0.5 * cfg.depth_noise.min_range, 1.2 * cfg.depth_noise.max_range);
    if lo < min_ok || hi > max_ok {
        return Err(Error::Config(format!(
            "trajectory spans {lo:.2}..{hi:.2} m, outside the simulated {min_ok:.2}..{max_ok:.2} m"
        )));
    }
    Ok(())
}

/// Ground truth for every frame of the scenario.
pub fn generate_trajectory(cfg: &ScenarioConfig) -> Result<Vec<GroundTruthFrame>> {
    cfg.validate()?;
    let s = &cfg.shape;
    let segments = discrete_segments(s);
    let cam = &cfg.camera;
    let (fx, cx, cy) = (cam.fx(), 0.5 * cam.width as f64, 0.5 * cam.height as f64);
    let edge_tan = 0.8 * cam.half_fov().tan();

    (0..cfg.frame_count())
        .map(|i| {
            let t = i as f64 / cfg.frame_rate;
            let (d, bearing) = match cfg.kind {
                ScenarioKind::DiscreteFwdBack => (discrete_distance(&segments, t), 0.0),
                ScenarioKind::ContinuousFwdBack => (s.sine_mean - s.sine_amplitude * (TAU * t / s.sine_period).cos(), 0.0),
                ScenarioKind::LateralSweep => {
                    (s.lateral_distance, s.lateral_fov_fraction * cam.half_fov() * (TAU * t / s.lateral_period).sin())
                }
            };
            let length = keypoint_length(d, cfg)?;
            let u = cx + fx * bearing.tan();
            let keypoints =
                KeypointFrame::new(t, Point2::new(u, cy - 0.5 * length), Point2::new(u, cy + 0.5 * length));
            Ok(GroundTruthFrame {
                timestamp: t,
                true_cb: d,
                lateral_offset: d * bearing.sin(),
                keypoints,
                depth_line: DepthLineParams {
                    pixel_count: length.round() as usize + 1,
                    near_edge: bearing.tan().abs() > edge_tan,
                },
            })
        })
        .collect()
}
