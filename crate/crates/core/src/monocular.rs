//! Keypoint-based monocular camera-to-body distance model.
//!
//! The S-H distance is the pixel length of the segment between the shoulder
//! midpoint and the hip midpoint. A piecewise logarithmic model maps it to an
//! approximate camera-to-body distance in centimeters for a subject of
//! fixed (assumed) height:
//!
//! ```text
//! f(x) = a1 * ln(x - s1) + o1    x <  boundary
//! f(x) = a2 * ln(x - s2) + o2    x >= boundary
//! ```
//!
//! With the default coefficients the two branches do not meet at the boundary;
//! see [`MonocularModelParams::seam`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outlier;

/// Continuous pixel coordinates (sub-pixel allowed).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Image extent in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageBounds {
    pub width: u32,
    pub height: u32,
}

impl Default for ImageBounds {
    fn default() -> Self {
        Self { width: 1280, height: 720 }
    }
}

impl ImageBounds {
    pub fn contains(&self, p: &Point2) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= (self.width - 1) as f64 && p.y <= (self.height - 1) as f64
    }

    pub fn diagonal(&self) -> f64 {
        (self.width as f64).hypot(self.height as f64)
    }
}

/// Per-frame shoulder and hip midpoints from the pose detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeypointFrame {
    pub timestamp: f64,
    pub shoulder_mid: Point2,
    pub hip_mid: Point2,
    /// False when pose detection failed for this frame.
    pub valid: bool,
}

impl KeypointFrame {
    pub fn new(timestamp: f64, shoulder_mid: Point2, hip_mid: Point2) -> Self {
        Self { timestamp, shoulder_mid, hip_mid, valid: true }
    }

    pub fn invalid(timestamp: f64) -> Self {
        Self { timestamp, shoulder_mid: Point2::default(), hip_mid: Point2::default(), valid: false }
    }

    /// Checks that a valid frame's midpoints lie inside `bounds`.
    pub fn check_bounds(&self, bounds: &ImageBounds) -> Result<()> {
        if !self.valid {
            return Ok(());
        }
        for p in [&self.shoulder_mid, &self.hip_mid] {
            if !bounds.contains(p) {
                return Err(Error::KeypointOutOfBounds {
                    x: p.x,
                    y: p.y,
                    width: bounds.width,
                    height: bounds.height,
                });
            }
        }
        Ok(())
    }
}

/// Coefficients of the two-branch logarithmic model. Output is in centimeters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonocularModelParams {
    pub branch1_scale: f64,
    pub branch1_shift: f64,
    pub branch1_offset: f64,
    pub branch2_scale: f64,
    pub branch2_shift: f64,
    pub branch2_offset: f64,
    pub branch_boundary: f64,
    /// Subject height the coefficients were calibrated for (meters).
    pub assumed_height: f64,
    /// Largest S-H pixel length the inverse may return (image diagonal).
    pub max_sh_pixels: f64,
}

impl Default for MonocularModelParams {
    fn default() -> Self {
        Self {
            branch1_scale: -48.03,
            branch1_shift: 179.4,
            branch1_offset: 401.0,
            branch2_scale: -240.2,
            branch2_shift: 47.3,
            branch2_offset: 1457.0,
            branch_boundary: 200.0,
            assumed_height: 1.80,
            max_sh_pixels: ImageBounds::default().diagonal(),
        }
    }
}

impl MonocularModelParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.branch1_scale,
            self.branch1_shift,
            self.branch1_offset,
            self.branch2_scale,
            self.branch2_shift,
            self.branch2_offset,
            self.branch_boundary,
            self.assumed_height,
            self.max_sh_pixels,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("monocular model coefficients must be finite".into()));
        }
        if self.branch1_shift >= self.branch_boundary || self.branch2_shift >= self.branch_boundary {
            return Err(Error::Config("both branch shifts must lie below the branch boundary".into()));
        }
        // the inverse relies on each branch being strictly decreasing
        if self.branch1_scale >= 0.0 || self.branch2_scale >= 0.0 {
            return Err(Error::Config("branch scales must be negative".into()));
        }
        if self.assumed_height <= 0.0 || self.max_sh_pixels <= self.branch_boundary {
            return Err(Error::Config("assumed height and pixel limit must be positive".into()));
        }
        Ok(())
    }

    fn branch1(&self, x: f64) -> f64 {
        self.branch1_scale * (x - self.branch1_shift).ln() + self.branch1_offset
    }

    fn branch2(&self, x: f64) -> f64 {
        self.branch2_scale * (x - self.branch2_shift).ln() + self.branch2_offset
    }

    /// Branch 1 evaluated at the boundary (the limit from the left), in cm.
    pub fn upper_branch_at_boundary(&self) -> f64 {
        self.branch1(self.branch_boundary)
    }

    /// Branch 2 evaluated at the boundary, in cm.
    pub fn lower_branch_at_boundary(&self) -> f64 {
        self.branch2(self.branch_boundary)
    }

    /// Jump of the model across the branch boundary, `f(b-) - f(b)` in cm.
    ///
    /// Distances strictly between the two boundary values have no preimage.
    pub fn seam(&self) -> f64 {
        self.upper_branch_at_boundary() - self.lower_branch_at_boundary()
    }
}

/// Euclidean S-H pixel distance of a valid frame.
pub fn sh_pixel_distance(frame: &KeypointFrame) -> Result<f64> {
    if !frame.valid {
        return Err(Error::InvalidFrame);
    }
    let d = frame.shoulder_mid.distance(&frame.hip_mid);
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::OutOfRange { value: d, reason: "S-H distance must be positive".into() });
    }
    Ok(d)
}

/// Approximate camera-to-body distance in centimeters for an S-H length of `x` pixels.
pub fn monocular_cb_estimate(x: f64, params: &MonocularModelParams) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("non-finite S-H distance {x}")));
    }
    let (shift, value) = if x < params.branch_boundary {
        (params.branch1_shift, params.branch1(x))
    } else {
        (params.branch2_shift, params.branch2(x))
    };
    if x - shift <= 0.0 {
        return Err(Error::Domain(format!("S-H distance {x} px is not above the branch shift {shift} px")));
    }
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::Domain(format!("S-H distance {x} px maps to non-physical distance {value} cm")));
    }
    Ok(value)
}

/// S-H pixel length that the model maps to `d` centimeters.
pub fn monocular_cb_inverse(d: f64, params: &MonocularModelParams) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::OutOfRange { value: d, reason: "distance must be positive and finite".into() });
    }
    let lower = params.lower_branch_at_boundary();
    let upper = params.upper_branch_at_boundary();
    let x = if d <= lower {
        params.branch2_shift + ((d - params.branch2_offset) / params.branch2_scale).exp()
    } else if d > upper {
        params.branch1_shift + ((d - params.branch1_offset) / params.branch1_scale).exp()
    } else {
        return Err(Error::Domain(format!(
            "{d} cm falls in the model gap ({lower:.3}, {upper:.3}] cm at the branch boundary"
        )));
    };
    if !(x > 0.0) || x > params.max_sh_pixels || !x.is_finite() {
        return Err(Error::OutOfRange {
            value: x,
            reason: format!("S-H length must lie in (0, {:.1}] px", params.max_sh_pixels),
        });
    }
    Ok(x)
}

/// Rate-of-change rule for the leaning-subject filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShOutlierConfig {
    pub window: usize,
    pub rel_threshold: f64,
}

impl Default for ShOutlierConfig {
    fn default() -> Self {
        Self { window: 10, rel_threshold: 1.25 }
    }
}

impl ShOutlierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::Config("S-H outlier window must be at least 2".into()));
        }
        if !(self.rel_threshold > 1.0) {
            return Err(Error::Config("S-H outlier threshold ratio must exceed 1".into()));
        }
        Ok(())
    }
}

/// True when the newest S-H sample changes faster than the rule allows.
///
/// `history` holds `(timestamp, sh_px)` pairs; derivatives are per second.
pub fn sh_outlier_check(history: &[(f64, f64)], cfg: &ShOutlierConfig) -> Result<bool> {
    Ok(outlier::check_latest(history, cfg.window, cfg.rel_threshold, 0.0)?.is_outlier)
}
