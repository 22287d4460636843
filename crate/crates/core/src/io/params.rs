//! Run parameters from a flat `key=value` file and command-line flags.
//!
//! Keys are the long flag names without the leading dashes. File values are
//! applied first and flags override them.

use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fusion::{FusionConfig, MonocularMode};
use crate::sim::{ScenarioConfig, ScenarioKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Scenario,
    Filter,
}

/// `(key, scope, help)` for every tunable parameter.
pub const PARAMS: &[(&str, Scope, &str)] = &[
    ("scenario", Scope::Scenario, "discrete, continuous or lateral [default: discrete]"),
    ("seed", Scope::Scenario, "random seed [default: 0]"),
    ("duration", Scope::Scenario, "scenario length in seconds"),
    ("fps", Scope::Scenario, "frame rate in Hz [default: 30]"),
    ("keypoint-noise", Scope::Scenario, "keypoint pixel noise std"),
    ("height-factor", Scope::Scenario, "real over assumed body height"),
    ("depth-base-sigma", Scope::Scenario, "depth noise std inside the optimal range (m)"),
    ("depth-growth-rate", Scope::Scenario, "depth noise growth beyond the optimal range (1/m)"),
    ("depth-bias-rate", Scope::Scenario, "depth overshoot per meter beyond the optimal range"),
    ("depth-optimal-max", Scope::Scenario, "end of the optimal depth range (m)"),
    ("depth-min-range", Scope::Scenario, "minimum depth range (m)"),
    ("depth-max-range", Scope::Scenario, "maximum depth range (m)"),
    ("outlier-prob", Scope::Scenario, "depth outlier burst probability per frame"),
    ("outlier-sigma", Scope::Scenario, "depth outlier magnitude scale (m)"),
    ("outlier-burst-min", Scope::Scenario, "shortest outlier burst (frames)"),
    ("outlier-burst-max", Scope::Scenario, "longest outlier burst (frames)"),
    ("outlier-edge-mult", Scope::Scenario, "outlier rate multiplier near the image edges"),
    ("outlier-far-fraction", Scope::Scenario, "share of outliers pointing away from the camera"),
    ("sigma-p-sq", Scope::Filter, "process noise on distance (m^2)"),
    ("sigma-pdot-sq", Scope::Filter, "process noise on distance rate (m^2/s^2)"),
    ("sigma-z-sq", Scope::Filter, "depth measurement variance (m^2)"),
    ("gate-window", Scope::Filter, "gate history length"),
    ("gate-threshold", Scope::Filter, "gate ratio to the mean rate"),
    ("gate-min-rate", Scope::Filter, "smallest gate rate floor (m/s)"),
    ("gate-noise-window", Scope::Filter, "raw depth rates in the gate noise estimate"),
    ("gate-noise-quantile", Scope::Filter, "quantile of raw depth rates taken as the noise level"),
    ("gate-noise-factor", Scope::Filter, "gate rate floor as a multiple of the noise level"),
    ("gate-max-rejections", Scope::Filter, "consecutive rejections before a gate restart (0 = never)"),
    ("mono-fit-window", Scope::Filter, "monocular estimates in the rate fit"),
    ("mono-min-points", Scope::Filter, "monocular estimates needed for a rate"),
    ("mono-measurement-var", Scope::Filter, "also correct with the monocular distance at this variance (m^2)"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub scenario: ScenarioConfig,
    pub fusion: FusionConfig,
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

impl RunParams {
    /// Build parameters from ordered `(key, value)` pairs; later pairs win.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let kind = match pairs.iter().rev().find(|(k, _)| k == "scenario") {
            Some((_, v)) => v.trim().parse()?,
            None => ScenarioKind::DiscreteFwdBack,
        };
        let mut p = RunParams { scenario: ScenarioConfig::new(kind, 0), fusion: FusionConfig::default() };
        for (k, v) in pairs {
            p.apply(k, v)?;
        }
        Ok(p)
    }

    fn apply(&mut self, key: &str, v: &str) -> Result<()> {
        let s = &mut self.scenario;
        let f = &mut self.fusion;
        match key {
            "scenario" => {}
            "seed" => s.seed = num(key, v)?,
            "duration" => s.duration = num(key, v)?,
            "fps" => s.frame_rate = num(key, v)?,
            "keypoint-noise" => s.keypoint_noise_px = num(key, v)?,
            "height-factor" => s.height_factor = num(key, v)?,
            "depth-base-sigma" => s.depth_noise.base_sigma = num(key, v)?,
            "depth-growth-rate" => s.depth_noise.growth_rate = num(key, v)?,
            "depth-bias-rate" => s.depth_noise.overshoot_bias_rate = num(key, v)?,
            "depth-optimal-max" => s.depth_noise.optimal_max = num(key, v)?,
            "depth-min-range" => s.depth_noise.min_range = num(key, v)?,
            "depth-max-range" => s.depth_noise.max_range = num(key, v)?,
            "outlier-prob" => s.outlier.probability_per_frame = num(key, v)?,
            "outlier-sigma" => s.outlier.magnitude_sigma = num(key, v)?,
            "outlier-burst-min" => s.outlier.burst_min = num(key, v)?,
            "outlier-burst-max" => s.outlier.burst_max = num(key, v)?,
            "outlier-edge-mult" => s.outlier.edge_fov_multiplier = num(key, v)?,
            "outlier-far-fraction" => s.outlier.far_fraction = num(key, v)?,
            "sigma-p-sq" => f.noise.sigma_p_sq = num(key, v)?,
            "sigma-pdot-sq" => f.noise.sigma_pdot_sq = num(key, v)?,
            "sigma-z-sq" => f.noise.sigma_z_sq = num(key, v)?,
            "gate-window" => f.gate.window = num(key, v)?,
            "gate-threshold" => f.gate.rel_threshold = num(key, v)?,
            "gate-min-rate" => f.gate.min_rate = num(key, v)?,
            "gate-noise-window" => f.gate.noise_window = num(key, v)?,
            "gate-noise-quantile" => f.gate.noise_quantile = num(key, v)?,
            "gate-noise-factor" => f.gate.noise_factor = num(key, v)?,
            "gate-max-rejections" => f.gate.max_consecutive_rejections = num(key, v)?,
            "mono-fit-window" => f.mono_velocity.fit_window = num(key, v)?,
            "mono-min-points" => f.mono_velocity.min_points = num(key, v)?,
            "mono-measurement-var" => f.mode = MonocularMode::RateAndMeasurement { variance: num(key, v)? },
            other => return Err(Error::Config(format!("unknown parameter '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.fusion.validate()
    }
}

/// Entries of a `key=value` file. Blank lines and `#` comments are skipped;
/// `out` and `log` are allowed next to the tunable keys.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected key=value", i + 1)))?;
        let k = k.trim().trim_start_matches("--").to_string();
        if !PARAMS.iter().any(|(name, _, _)| *name == k) && k != "out" && k != "log" {
            return Err(Error::Config(format!("config line {}: unknown key '{k}'", i + 1)));
        }
        pairs.push((k, v.trim().to_string()));
    }
    Ok(pairs)
}

/// Paths given in a config file, if any.
pub fn path_entry(pairs: &[(String, String)], key: &str) -> Option<PathBuf> {
    pairs.iter().rev().find(|(k, _)| k == key).map(|(_, v)| PathBuf::from(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults() {
        let p = RunParams::from_pairs(&[]).unwrap();
        assert_eq!(p.scenario, ScenarioConfig::new(ScenarioKind::DiscreteFwdBack, 0));
        assert_eq!(p.fusion, FusionConfig::default());
    }

    #[test]
    fn later_values_win() {
        let p = RunParams::from_pairs(&pairs(&[("seed", "3"), ("scenario", "lateral"), ("seed", "9")])).unwrap();
        assert_eq!(p.scenario.seed, 9);
        assert_eq!(p.scenario.kind, ScenarioKind::LateralSweep);
        assert_eq!(p.scenario.duration, 60.0);
    }

    #[test]
    fn bad_values_are_config_errors() {
        assert!(matches!(RunParams::from_pairs(&pairs(&[("seed", "x")])), Err(Error::Config(_))));
        assert!(matches!(RunParams::from_pairs(&pairs(&[("scenario", "up")])), Err(Error::Config(_))));
        assert!(matches!(RunParams::from_pairs(&pairs(&[("nope", "1")])), Err(Error::Config(_))));
    }

    #[test]
    fn config_file_format() {
        let text = "# run\nscenario = continuous\n\nseed=4  # trailing\nout=/tmp/x\n";
        let p = parse_config_file(text).unwrap();
        assert_eq!(p, pairs(&[("scenario", "continuous"), ("seed", "4"), ("out", "/tmp/x")]));
        assert_eq!(path_entry(&p, "out"), Some(PathBuf::from("/tmp/x")));
        assert!(parse_config_file("seed 4\n").is_err());
        assert!(parse_config_file("colour=red\n").is_err());
    }

    #[test]
    fn every_listed_key_is_accepted() {
        for (k, _, _) in PARAMS {
            let v = if *k == "scenario" { "lateral" } else { "1" };
            RunParams::from_pairs(&pairs(&[(k, v)])).unwrap();
        }
    }
}
