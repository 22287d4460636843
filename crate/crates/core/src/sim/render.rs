use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{GroundTruthFrame, OutlierInjection, ScenarioConfig, ScenarioKind};
use crate::depth::{DepthFrame, DepthLineSample};
use crate::error::{Error, Result};
use crate::fusion::SensorFrame;
use crate::monocular::{self, ImageBounds, KeypointFrame, Point2};

/// Burst state of the depth outlier injector.
#[derive(Debug, Clone)]
pub struct OutlierProcess {
    cfg: OutlierInjection,
    remaining: usize,
    bursts_started: usize,
}

impl OutlierProcess {
    pub fn new(cfg: OutlierInjection) -> Self {
        Self { cfg, remaining: 0, bursts_started: 0 }
    }

    /// Offset (m) to add to this frame's depth, if the frame is corrupted.
    ///
    /// `rate_multiplier` scales the burst start probability.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R, rate_multiplier: f64) -> Option<f64> {
        let p = (self.cfg.probability_per_frame * rate_multiplier).clamp(0.0, 1.0);
        if rng.random::<f64>() < p {
            let len = rng.random_range(self.cfg.burst_min..=self.cfg.burst_max);
            self.remaining = self.remaining.max(len);
            self.bursts_started += 1;
        }
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let magnitude = self.cfg.magnitude_sigma * rng.sample::<f64, _>(StandardNormal).abs();
        let far = rng.random::<f64>() < self.cfg.far_fraction;
        Some(if far { magnitude } else { -magnitude })
    }

    pub fn bursts_started(&self) -> usize {
        self.bursts_started
    }
}

/// One frame of the simulated sensor stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderedFrame {
    pub timestamp: f64,
    pub true_cb: f64,
    /// Noisy keypoints; invalid when a keypoint left the image.
    pub keypoints: KeypointFrame,
    pub depth: DepthLineSample,
    /// Injected depth outlier offset (m).
    pub outlier_offset: Option<f64>,
}

impl RenderedFrame {
    pub fn sensor_frame(&self) -> SensorFrame {
        let sh_px = if self.keypoints.valid { monocular::sh_pixel_distance(&self.keypoints).ok() } else { None };
        SensorFrame::new(self.timestamp, sh_px, self.depth.mean_depth)
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Add sensor noise and outliers to a ground-truth trajectory.
///
/// The random stream is seeded from `cfg.seed` and consumed in a fixed order
/// per frame, so equal configurations give bit-identical output.
pub fn render_sensors(gt: &[GroundTruthFrame], cfg: &ScenarioConfig) -> Result<Vec<RenderedFrame>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut outliers = OutlierProcess::new(cfg.outlier);
    let noise = &cfg.depth_noise;
    let bounds = ImageBounds { width: cfg.camera.width, height: cfg.camera.height };
    let sigma_px = cfg.keypoint_noise_px;

    Ok(gt
        .iter()
        .map(|g| {
            let d = g.true_cb;
            let edge = cfg.kind == ScenarioKind::LateralSweep && g.depth_line.near_edge;
            let outlier_offset = outliers.sample(&mut rng, if edge { cfg.outlier.edge_fov_multiplier } else { 1.0 });
            let z = d + noise.bias(d) + noise.sigma(d) * normal(&mut rng) + outlier_offset.unwrap_or(0.0);
            let pixel_count = g.depth_line.pixel_count;
            let depth = if noise.in_range(d) && z > 0.0 {
                DepthLineSample::from_mean(g.timestamp, z, pixel_count)
            } else {
                DepthLineSample { timestamp: g.timestamp, pixel_count, valid_count: 0, mean_depth: None }
            };

            let jitter: [f64; 4] = std::array::from_fn(|_| sigma_px * normal(&mut rng));
            let k = &g.keypoints;
            let shoulder = Point2::new(k.shoulder_mid.x + jitter[0], k.shoulder_mid.y + jitter[1]);
            let hip = Point2::new(k.hip_mid.x + jitter[2], k.hip_mid.y + jitter[3]);
            let mut keypoints = KeypointFrame::new(g.timestamp, shoulder, hip);
            if keypoints.check_bounds(&bounds).is_err() {
                keypoints.valid = false;
            }

            RenderedFrame { timestamp: g.timestamp, true_cb: d, keypoints, depth, outlier_offset }
        })
        .collect())
}

/// Small dense depth image of a flat surface at `depth` meters with Gaussian
/// noise and a fraction of zero (hole) pixels.
pub fn synthesize_depth_frame<R: Rng + ?Sized>(
    rng: &mut R,
    timestamp: f64,
    width: u32,
    height: u32,
    depth: f64,
    sigma: f64,
    hole_fraction: f64,
) -> Result<DepthFrame> {
    if width > 64 || height > 64 {
        return Err(Error::DepthFrame(format!("synthetic frames are limited to 64x64, got {width}x{height}")));
    }
    if !(depth > 0.0) || !(sigma >= 0.0) || !(0.0..=1.0).contains(&hole_fraction) {
        return Err(Error::Config("synthetic depth frame needs depth > 0, sigma >= 0, holes in [0, 1]".into()));
    }
    let data = (0..width as usize * height as usize)
        .map(|_| {
            let v = depth + sigma * normal(rng);
            if rng.random::<f64>() < hole_fraction || v <= 0.0 {
                0.0
            } else {
                v
            }
        })
        .collect();
    DepthFrame::new(timestamp, width, height, data)
}
