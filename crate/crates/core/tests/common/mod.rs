//! Dense reference filter built on nalgebra.

use nalgebra::{Matrix1, Matrix1x2, Matrix2, Matrix2x1, Vector2};

use depthfuse::fusion::ekf::{FilterState, NoiseConfig};

pub struct DenseEkf {
    pub x: Vector2<f64>,
    pub p: Matrix2<f64>,
    q: Matrix2<f64>,
    r: Matrix1<f64>,
}

impl DenseEkf {
    pub fn new(p0: f64, v0: f64, cov: [[f64; 2]; 2], noise: &NoiseConfig) -> Self {
        Self {
            x: Vector2::new(p0, v0),
            p: Matrix2::new(cov[0][0], cov[0][1], cov[1][0], cov[1][1]),
            q: Matrix2::new(noise.sigma_p_sq, 0.0, 0.0, noise.sigma_pdot_sq),
            r: Matrix1::new(noise.sigma_z_sq),
        }
    }

    pub fn predict(&mut self, dt: f64) {
        let f = Matrix2::new(1.0, dt, 0.0, 1.0);
        self.x = f * self.x;
        self.p = f * self.p * f.transpose() + self.q;
    }

    pub fn correct(&mut self, z: f64) {
        let h = Matrix1x2::new(1.0, 0.0);
        let s = h * self.p * h.transpose() + self.r;
        let k: Matrix2x1<f64> = self.p * h.transpose() * s.try_inverse().unwrap();
        self.x += k * (Matrix1::new(z) - h * self.x);
        // Joseph form
        let a = Matrix2::identity() - k * h;
        self.p = a * self.p * a.transpose() + k * self.r * k.transpose();
    }

    pub fn max_abs_diff(&self, s: &FilterState) -> f64 {
        let mut d = (s.p - self.x[0]).abs().max((s.p_dot - self.x[1]).abs());
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((s.cov[i][j] - self.p[(i, j)]).abs());
            }
        }
        d
    }
}
