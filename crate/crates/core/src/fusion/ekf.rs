//! Two-state (distance, distance-rate) filter with a nearly constant velocity
//! process and a direct distance measurement.
//!
//! State `x = [p, p_dot]`, transition `F = [[1, dt], [0, 1]]`, measurement
//! `H = [1, 0]`, process noise `Q = diag(sigma_p_sq, sigma_pdot_sq)` and scalar
//! measurement noise `R = sigma_z_sq`. Everything is in meters and seconds.
//! The 2x2 algebra is written out by hand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Cov2 = [[f64; 2]; 2];

/// Distances below this are treated as non-physical and clamped after prediction.
pub const MIN_DISTANCE_M: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterState {
    /// Estimated C-B distance (m).
    pub p: f64,
    /// Distance rate (m/s).
    pub p_dot: f64,
    pub cov: Cov2,
    pub timestamp: f64,
}

impl FilterState {
    pub fn new(p: f64, p_dot: f64, cov: Cov2, timestamp: f64) -> Self {
        Self { p, p_dot, cov, timestamp }
    }

    pub fn trace(&self) -> f64 {
        self.cov[0][0] + self.cov[1][1]
    }

    /// Eigenvalues of the covariance, smallest first.
    pub fn cov_eigenvalues(&self) -> (f64, f64) {
        let [[a, b], [c, d]] = self.cov;
        let off = 0.5 * (b + c);
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + off * off).sqrt();
        (mean - r, mean + r)
    }

    /// Symmetric to `sym_tol` (relative) and numerically positive semi-definite.
    pub fn cov_is_healthy(&self, sym_tol: f64, eig_tol: f64) -> bool {
        let [[a, b], [c, d]] = self.cov;
        if ![a, b, c, d, self.p, self.p_dot].iter().all(|v| v.is_finite()) {
            return false;
        }
        let scale = a.abs().max(d.abs()).max(b.abs()).max(f64::MIN_POSITIVE);
        let (lo, _) = self.cov_eigenvalues();
        (b - c).abs() <= sym_tol * scale && lo >= -eig_tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Process noise on distance (m^2).
    pub sigma_p_sq: f64,
    /// Process noise on the distance rate (m^2/s^2).
    pub sigma_pdot_sq: f64,
    /// Depth measurement variance (m^2).
    pub sigma_z_sq: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { sigma_p_sq: 0.02, sigma_pdot_sq: 0.8, sigma_z_sq: 0.018 }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_p_sq", self.sigma_p_sq),
            ("sigma_pdot_sq", self.sigma_pdot_sq),
            ("sigma_z_sq", self.sigma_z_sq),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub state: FilterState,
    /// The propagated distance was non-positive and got clamped.
    pub clamped: bool,
}

/// Propagate the state by `dt` seconds.
pub fn ekf_predict(state: &FilterState, dt: f64, noise: &NoiseConfig, min_distance: f64) -> Result<Prediction> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::NonPositiveDt(dt));
    }
    let [[p00, p01], [p10, p11]] = state.cov;
    // F P F^T + Q with F = [[1, dt], [0, 1]]
    let cov = [
        [p00 + dt * (p10 + p01) + dt * dt * p11 + noise.sigma_p_sq, p01 + dt * p11],
        [p10 + dt * p11, p11 + noise.sigma_pdot_sq],
    ];
    let mut p = state.p + dt * state.p_dot;
    let clamped = p <= 0.0;
    if clamped {
        p = min_distance;
    }
    Ok(Prediction {
        state: FilterState { p, p_dot: state.p_dot, cov, timestamp: state.timestamp + dt },
        clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correction {
    pub state: FilterState,
    /// Kalman gain `[K_p, K_pdot]`.
    pub gain: [f64; 2],
    pub innovation: f64,
}

/// Depth correction with `R = noise.sigma_z_sq`.
pub fn ekf_correct(state: &FilterState, z: f64, noise: &NoiseConfig) -> Result<Correction> {
    ekf_correct_with_variance(state, z, noise.sigma_z_sq)
}

/// Direct distance correction with an explicit measurement variance.
pub fn ekf_correct_with_variance(state: &FilterState, z: f64, r: f64) -> Result<Correction> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::NonPositiveMeasurement(z));
    }
    if !(r > 0.0) {
        return Err(Error::Config(format!("measurement variance must be positive, got {r}")));
    }
    let [[p00, p01], [p10, p11]] = state.cov;
    let s = p00 + r;
    let gain = [p00 / s, p10 / s];
    let innovation = z - state.p;
    // (I - K H) P, then symmetrize
    let a = (1.0 - gain[0]) * p00;
    let b = (1.0 - gain[0]) * p01;
    let c = p10 - gain[1] * p00;
    let d = p11 - gain[1] * p01;
    let off = 0.5 * (b + c);
    Ok(Correction {
        state: FilterState {
            p: state.p + gain[0] * innovation,
            p_dot: state.p_dot + gain[1] * innovation,
            cov: [[a, off], [off, d]],
            timestamp: state.timestamp,
        },
        gain,
        innovation,
    })
}
