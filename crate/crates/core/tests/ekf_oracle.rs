//! The hand-written 2x2 filter against a dense nalgebra implementation.

use depthfuse::fusion::ekf::{ekf_correct, ekf_correct_with_variance, ekf_predict, FilterState, NoiseConfig, MIN_DISTANCE_M};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::DenseEkf;

#[test]
fn thousand_random_cycles_match_the_dense_oracle() {
    let noise = NoiseConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut state = FilterState::new(3.0, 0.0, [[0.25, 0.0], [0.0, 1.0]], 0.0);
    let mut oracle = DenseEkf::new(3.0, 0.0, [[0.25, 0.0], [0.0, 1.0]], &noise);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let dt = rng.random_range(0.01..0.2);
        let pred = ekf_predict(&state, dt, &noise, MIN_DISTANCE_M).unwrap();
        assert!(!pred.clamped);
        state = pred.state;
        oracle.predict(dt);
        worst = worst.max(oracle.max_abs_diff(&state));
        if rng.random::<f64>() < 0.7 {
            let z = 3.0 + rng.random_range(-1.0..1.0);
            state = ekf_correct(&state, z, &noise).unwrap().state;
            oracle.correct(z);
            worst = worst.max(oracle.max_abs_diff(&state));
        }
    }
    assert!(worst < 1e-10, "max deviation {worst:e}");
}

fn cov_strategy() -> impl Strategy<Value = [[f64; 2]; 2]> {
    (1e-4..5.0f64, 1e-4..5.0f64, -0.99..0.99f64).prop_map(|(a, d, rho)| {
        let off = rho * (a * d).sqrt();
        [[a, off], [off, d]]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn distance_gain_is_a_proper_fraction(cov in cov_strategy(), z in 0.1..10.0f64, r in 1e-4..10.0f64) {
        let s = FilterState::new(3.0, 0.1, cov, 0.0);
        let c = ekf_correct_with_variance(&s, z, r).unwrap();
        prop_assert!(c.gain[0] > 0.0 && c.gain[0] < 1.0);
        prop_assert!(c.state.cov[0][0] < s.cov[0][0]);
        prop_assert!(c.state.cov[0][1] == c.state.cov[1][0]);
    }

    #[test]
    fn prediction_adds_process_noise(cov in cov_strategy(), dt in 1e-3..2.0f64, v in -2.0..2.0f64) {
        let noise = NoiseConfig::default();
        let s = FilterState::new(5.0, v, cov, 0.0);
        let p = ekf_predict(&s, dt, &noise, MIN_DISTANCE_M).unwrap().state;
        // P' - Q = F P F^T stays positive semi-definite
        let q = FilterState::new(0.0, 0.0, [[p.cov[0][0] - noise.sigma_p_sq, p.cov[0][1]], [p.cov[1][0], p.cov[1][1] - noise.sigma_pdot_sq]], 0.0);
        prop_assert!(q.cov_eigenvalues().0 >= -1e-12);
        prop_assert!(p.cov[1][1] >= s.cov[1][1] + noise.sigma_pdot_sq - 1e-12);
        if s.cov[0][1] >= 0.0 {
            prop_assert!(p.trace() > s.trace());
        }
    }

    #[test]
    fn huge_measurement_variance_is_prediction_only(cov in cov_strategy(), z in 0.1..10.0f64) {
        let s = FilterState::new(3.0, 0.2, cov, 0.0);
        let c = ekf_correct_with_variance(&s, z, 1e12).unwrap().state;
        prop_assert!((c.p - s.p).abs() < 1e-9);
        prop_assert!((c.p_dot - s.p_dot).abs() < 1e-9);
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((c.cov[i][j] - s.cov[i][j]).abs() < 1e-9);
            }
        }
    }
}
