use depthfuse::depth::extract_cb_measurement;
use depthfuse::monocular::{monocular_cb_estimate, sh_pixel_distance, Point2};
use depthfuse::sim::{
    generate_trajectory, render_sensors, synthesize_depth_frame, OutlierInjection, OutlierProcess, RenderedFrame,
    ScenarioConfig, ScenarioKind,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn render(cfg: &ScenarioConfig) -> Vec<RenderedFrame> {
    render_sensors(&generate_trajectory(cfg).unwrap(), cfg).unwrap()
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[test]
fn depth_noise_matches_its_model() {
    let mut cfg = ScenarioConfig::new(ScenarioKind::ContinuousFwdBack, 5);
    cfg.duration = 400.0;
    cfg.outlier = OutlierInjection::none();
    let noise = cfg.depth_noise;
    let z: Vec<f64> = render(&cfg)
        .iter()
        .filter_map(|r| r.depth.mean_depth.map(|m| (m - r.true_cb - noise.bias(r.true_cb)) / noise.sigma(r.true_cb)))
        .collect();
    assert!(z.len() >= 10_000, "{} samples", z.len());
    let (mean, std) = mean_std(&z);
    assert!(mean.abs() < 0.05, "standardized mean {mean}");
    assert!((0.85..1.15).contains(&std), "standardized std {std}");
}

#[test]
fn flat_range_noise_has_the_base_sigma() {
    let mut cfg = ScenarioConfig::new(ScenarioKind::LateralSweep, 9);
    cfg.duration = 400.0;
    cfg.outlier = OutlierInjection::none();
    let residuals: Vec<f64> =
        render(&cfg).iter().filter_map(|r| r.depth.mean_depth.map(|m| m - r.true_cb)).collect();
    assert!(residuals.len() >= 10_000);
    let (_, std) = mean_std(&residuals);
    let base = cfg.depth_noise.base_sigma;
    assert!((std / base - 1.0).abs() < 0.15, "std {std} vs {base}");
}

#[test]
fn burst_start_rate_matches_probability() {
    let cfg = OutlierInjection::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut process = OutlierProcess::new(cfg);
    let frames = 100_000;
    let corrupted = (0..frames).filter(|_| process.sample(&mut rng, 1.0).is_some()).count();
    let rate = process.bursts_started() as f64 / frames as f64;
    assert!((rate / cfg.probability_per_frame - 1.0).abs() < 0.2, "start rate {rate}");
    // every burst lasts at least one frame and at most burst_max
    assert!(corrupted >= process.bursts_started());
    assert!(corrupted <= process.bursts_started() * cfg.burst_max);
}

#[test]
fn edge_frames_get_more_bursts() {
    let cfg = OutlierInjection::default();
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let mut base = OutlierProcess::new(cfg);
    let mut edge = OutlierProcess::new(cfg);
    for _ in 0..50_000 {
        base.sample(&mut rng, 1.0);
        edge.sample(&mut rng, cfg.edge_fov_multiplier);
    }
    let ratio = edge.bursts_started() as f64 / base.bursts_started() as f64;
    assert!((ratio / cfg.edge_fov_multiplier - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn noiseless_stream_is_model_consistent() {
    for kind in ScenarioKind::ALL {
        let cfg = ScenarioConfig::new(kind, 1).noiseless();
        let lower = cfg.model.lower_branch_at_boundary() / 100.0;
        let upper = cfg.model.upper_branch_at_boundary() / 100.0;
        let mut checked = 0;
        for r in render(&cfg) {
            if let Some(m) = r.depth.mean_depth {
                assert!((m - r.true_cb).abs() < 1e-12 || r.true_cb > cfg.depth_noise.optimal_max);
            }
            // lengths inside the model gap are snapped to the boundary
            if !r.keypoints.valid || (r.true_cb > lower && r.true_cb <= upper) {
                continue;
            }
            let est = monocular_cb_estimate(sh_pixel_distance(&r.keypoints).unwrap(), &cfg.model).unwrap() / 100.0;
            assert!((est - r.true_cb).abs() < 1e-6, "{kind} t={}: {est} vs {}", r.timestamp, r.true_cb);
            checked += 1;
        }
        assert!(checked > 1000, "{kind}: {checked}");
    }
}

#[test]
fn frames_are_evenly_spaced() {
    for kind in ScenarioKind::ALL {
        let cfg = ScenarioConfig::new(kind, 2);
        let frames = render(&cfg);
        assert_eq!(frames.len(), cfg.frame_count());
        assert_eq!(frames[0].timestamp, 0.0);
        for w in frames.windows(2) {
            assert!((w[1].timestamp - w[0].timestamp - cfg.frame_period()).abs() < 1e-9);
        }
    }
}

#[test]
fn synthetic_frame_line_mean_recovers_depth() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let frame = synthesize_depth_frame(&mut rng, 0.0, 64, 64, 2.5, 0.02, 0.2).unwrap();
    let s = extract_cb_measurement(&frame, Point2::new(32.0, 2.0), Point2::new(32.0, 61.0)).unwrap();
    assert_eq!(s.pixel_count, 60);
    assert!(s.valid_count > 30 && s.valid_count < s.pixel_count);
    // 5 standard errors of the line mean
    let tol = 5.0 * 0.02 / (s.valid_count as f64).sqrt();
    assert!((s.mean_depth.unwrap() - 2.5).abs() < tol);
}
