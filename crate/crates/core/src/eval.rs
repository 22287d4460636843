//! Scenario runs scored per method.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fusion::{run_fusion, FusionConfig, FusionOutput, SensorFrame};
use crate::metrics::{compute_metrics, Method, MetricsReport};
use crate::sim::{generate_trajectory, render_sensors, ScenarioConfig};

/// Per-method estimates of a fused stream as `(t, value_m)`.
pub fn method_series(outputs: &[FusionOutput], method: Method) -> Vec<(f64, Option<f64>)> {
    outputs
        .iter()
        .map(|o| {
            let v = match method {
                Method::Keypoint => o.monocular_cb,
                Method::Depth => o.depth_cb,
                Method::Fused => o.fused_cb,
            };
            (o.timestamp, v)
        })
        .collect()
}

/// Keypoint, depth and fused reports against `truth`.
pub fn score(outputs: &[FusionOutput], truth: &[(f64, f64)], frame_period: f64) -> Result<Vec<MetricsReport>> {
    Method::ALL
        .iter()
        .map(|&m| compute_metrics(m, &method_series(outputs, m), truth, 0.5 * frame_period))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRun {
    pub frames: Vec<SensorFrame>,
    pub truth: Vec<(f64, f64)>,
    pub outputs: Vec<FusionOutput>,
    pub reports: Vec<MetricsReport>,
}

impl ScenarioRun {
    pub fn report(&self, method: Method) -> &MetricsReport {
        self.reports.iter().find(|r| r.method == method).expect("all methods are scored")
    }
}

/// Simulate a scenario, fuse it in memory and score all three methods.
pub fn run_scenario(scenario: &ScenarioConfig, fusion: &FusionConfig) -> Result<ScenarioRun> {
    let gt = generate_trajectory(scenario)?;
    let rendered = render_sensors(&gt, scenario)?;
    let frames: Vec<SensorFrame> = rendered.iter().map(|r| r.sensor_frame()).collect();
    let truth: Vec<(f64, f64)> = rendered.iter().map(|r| (r.timestamp, r.true_cb)).collect();
    let outputs = run_fusion(&frames, fusion)?;
    let reports = score(&outputs, &truth, scenario.frame_period())?;
    Ok(ScenarioRun { frames, truth, outputs, reports })
}
