//! Depth / monocular fusion: the filter, its outlier gate and the stream driver.

pub mod ekf;
pub mod engine;
pub mod gate;

pub use ekf::{ekf_correct, ekf_predict, Cov2, FilterState, NoiseConfig, MIN_DISTANCE_M};
pub use engine::{
    run_fusion, FrameFlags, FusionConfig, FusionEngine, FusionOutput, InitConfig, MonoVelocityConfig, MonocularMode,
    SensorFrame,
};
pub use gate::{gate_check, DepthGate, GateConfig, GateVerdict};
