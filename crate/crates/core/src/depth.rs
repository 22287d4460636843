//! Depth-camera C-B measurement along the S-H line.
//!
//! The S-H segment is rasterized onto the aligned depth image and the mean of
//! the valid (non-zero) depth pixels along it is taken as the measurement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monocular::Point2;

/// Operating envelope of line pixel counts; samples outside it are flagged, not rejected.
pub const LINE_PIXEL_RANGE: (usize, usize) = (50, 350);

/// Aligned depth image. `0.0` means no return for that pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthFrame {
    pub timestamp: f64,
    pub width: u32,
    pub height: u32,
    depth: Vec<f64>,
}

impl DepthFrame {
    pub fn new(timestamp: f64, width: u32, height: u32, depth: Vec<f64>) -> Result<Self> {
        if depth.len() != width as usize * height as usize {
            return Err(Error::DepthFrame(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width as usize * height as usize,
                depth.len()
            )));
        }
        if let Some(v) = depth.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::DepthFrame(format!("depth values must be finite and >= 0, found {v}")));
        }
        Ok(Self { timestamp, width, height, depth })
    }

    /// A frame with every pixel at `value` meters.
    pub fn filled(timestamp: f64, width: u32, height: u32, value: f64) -> Result<Self> {
        Self::new(timestamp, width, height, vec![value; width as usize * height as usize])
    }

    pub fn get(&self, x: u32, y: u32) -> Option<f64> {
        (x < self.width && y < self.height).then(|| self.depth[y as usize * self.width as usize + x as usize])
    }

    pub fn set(&mut self, x: u32, y: u32, value: f64) -> Result<()> {
        if x >= self.width || y >= self.height {
            return Err(Error::PixelOutOfBounds { x: x as i64, y: y as i64, width: self.width, height: self.height });
        }
        if !value.is_finite() || value < 0.0 {
            return Err(Error::DepthFrame(format!("depth values must be finite and >= 0, found {value}")));
        }
        self.depth[y as usize * self.width as usize + x as usize] = value;
        Ok(())
    }

    pub fn data(&self) -> &[f64] {
        &self.depth
    }
}

/// Depth statistics of one rasterized S-H line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthLineSample {
    pub timestamp: f64,
    pub pixel_count: usize,
    pub valid_count: usize,
    /// Mean of the valid depths in meters; `None` when no pixel was valid.
    pub mean_depth: Option<f64>,
}

impl DepthLineSample {
    /// A sample that only carries the line statistics (used by the simulator and log replay).
    pub fn from_mean(timestamp: f64, mean_depth: f64, pixel_count: usize) -> Self {
        Self { timestamp, pixel_count, valid_count: pixel_count, mean_depth: Some(mean_depth) }
    }

    /// True when the number of line pixels falls outside [`LINE_PIXEL_RANGE`].
    pub fn range_violation(&self) -> bool {
        self.pixel_count < LINE_PIXEL_RANGE.0 || self.pixel_count > LINE_PIXEL_RANGE.1
    }
}

fn round_in_bounds(p: &Point2, width: u32, height: u32) -> Result<(i64, i64)> {
    let (x, y) = (p.x.round(), p.y.round());
    if !x.is_finite() || !y.is_finite() || x < 0.0 || y < 0.0 || x >= width as f64 || y >= height as f64 {
        return Err(Error::PixelOutOfBounds { x: x as i64, y: y as i64, width, height });
    }
    Ok((x as i64, y as i64))
}

/// 8-connected integer line between the rounded endpoints, both inclusive.
pub fn rasterize_line(a: Point2, b: Point2, width: u32, height: u32) -> Result<Vec<(u32, u32)>> {
    let (x0, y0) = round_in_bounds(&a, width, height)?;
    let (x1, y1) = round_in_bounds(&b, width, height)?;
    Ok(bresenham(x0, y0, x1, y1).map(|(x, y)| (x as u32, y as u32)).collect())
}

fn bresenham(x0: i64, y0: i64, x1: i64, y1: i64) -> impl Iterator<Item = (i64, i64)> {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let (mut x, mut y) = (x0, y0);
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = (x, y);
        if x == x1 && y == y1 {
            done = true;
        } else {
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
        Some(out)
    })
}

/// Mean of the strictly positive depth values along the S-H line.
pub fn extract_cb_measurement(frame: &DepthFrame, shoulder_mid: Point2, hip_mid: Point2) -> Result<DepthLineSample> {
    let pixels = rasterize_line(shoulder_mid, hip_mid, frame.width, frame.height)?;
    let values = pixels.iter().filter_map(|&(x, y)| frame.get(x, y));
    let sample = summarize(frame.timestamp, values);
    if sample.valid_count == 0 {
        return Err(Error::NoValidPixels { pixel_count: sample.pixel_count });
    }
    Ok(sample)
}

/// Line statistics over raw depth values; zeros are holes and are skipped.
pub fn summarize(timestamp: f64, values: impl IntoIterator<Item = f64>) -> DepthLineSample {
    let (mut n, mut valid, mut sum) = (0usize, 0usize, 0.0);
    for v in values {
        n += 1;
        if v > 0.0 {
            valid += 1;
            sum += v;
        }
    }
    DepthLineSample {
        timestamp,
        pixel_count: n,
        valid_count: valid,
        mean_depth: (valid > 0).then(|| sum / valid as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn vertical_line() {
        let px = rasterize_line(p(10.0, 10.0), p(10.0, 60.0), 64, 64).unwrap();
        assert_eq!(px.len(), 51);
        assert!(px.iter().all(|&(x, _)| x == 10));
    }

    #[test]
    fn diagonal_line() {
        let px = rasterize_line(p(0.0, 0.0), p(3.0, 3.0), 8, 8).unwrap();
        assert_eq!(px, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
    }

    #[test]
    fn single_pixel_line() {
        assert_eq!(rasterize_line(p(5.0, 5.0), p(5.0, 5.0), 8, 8).unwrap(), vec![(5, 5)]);
    }

    #[test]
    fn endpoints_are_rounded() {
        let px = rasterize_line(p(1.4, 2.6), p(4.5, 2.6), 8, 8).unwrap();
        assert_eq!(px.first(), Some(&(1, 3)));
        assert_eq!(px.last(), Some(&(5, 3)));
    }

    #[test]
    fn out_of_bounds_endpoint() {
        assert!(matches!(
            rasterize_line(p(0.0, 0.0), p(8.0, 3.0), 8, 8),
            Err(Error::PixelOutOfBounds { .. })
        ));
        assert!(rasterize_line(p(-0.6, 0.0), p(3.0, 3.0), 8, 8).is_err());
        // -0.4 rounds to 0 and stays in bounds
        assert!(rasterize_line(p(-0.4, 0.0), p(3.0, 3.0), 8, 8).is_ok());
    }

    #[test]
    fn constant_field() {
        let f = DepthFrame::filled(0.0, 64, 64, 4.0).unwrap();
        let s = extract_cb_measurement(&f, p(10.0, 10.0), p(10.0, 60.0)).unwrap();
        assert_eq!(s.mean_depth, Some(4.0));
        assert_eq!((s.valid_count, s.pixel_count), (51, 51));
        assert!(!s.range_violation());
    }

    #[test]
    fn holes_are_excluded() {
        let values = std::iter::repeat_n(3.0, 100).chain(std::iter::repeat_n(0.0, 20));
        let s = summarize(0.0, values);
        assert_eq!(s.mean_depth, Some(3.0));
        assert_eq!((s.valid_count, s.pixel_count), (100, 120));
    }

    #[test]
    fn two_level_mean() {
        let values = std::iter::repeat_n(2.0, 50).chain(std::iter::repeat_n(4.0, 50));
        assert_abs_diff_eq!(summarize(0.0, values).mean_depth.unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn holes_on_the_line_in_a_frame() {
        let mut f = DepthFrame::filled(0.5, 32, 32, 0.0).unwrap();
        f.set(5, 20, 2.5).unwrap();
        let s = extract_cb_measurement(&f, p(5.0, 2.0), p(5.0, 30.0)).unwrap();
        assert_eq!(s.mean_depth, Some(2.5));
        assert_eq!(s.valid_count, 1);
        assert_eq!(s.timestamp, 0.5);
        assert!(s.range_violation());
    }

    #[test]
    fn no_valid_pixels() {
        let f = DepthFrame::filled(0.0, 16, 16, 0.0).unwrap();
        assert_eq!(
            extract_cb_measurement(&f, p(1.0, 1.0), p(1.0, 10.0)),
            Err(Error::NoValidPixels { pixel_count: 10 })
        );
    }

    #[test]
    fn frame_validation() {
        assert!(DepthFrame::new(0.0, 2, 2, vec![1.0; 3]).is_err());
        assert!(DepthFrame::new(0.0, 2, 2, vec![1.0, -1.0, 0.0, 0.0]).is_err());
        assert!(DepthFrame::new(0.0, 2, 2, vec![1.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn pixel_envelope_flag() {
        assert!(DepthLineSample::from_mean(0.0, 3.0, 49).range_violation());
        assert!(!DepthLineSample::from_mean(0.0, 3.0, 50).range_violation());
        assert!(!DepthLineSample::from_mean(0.0, 3.0, 350).range_violation());
        assert!(DepthLineSample::from_mean(0.0, 3.0, 351).range_violation());
    }

    fn line_values() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(prop_oneof![Just(0.0), 0.1..10.0f64], 1..400)
            .prop_filter("needs a valid pixel", |v| v.iter().any(|x| *x > 0.0))
    }

    proptest! {
        #[test]
        fn mean_within_valid_range(values in line_values()) {
            let m = summarize(0.0, values.iter().copied()).mean_depth.unwrap();
            let valid = values.iter().filter(|v| **v > 0.0);
            let lo = valid.clone().cloned().fold(f64::INFINITY, f64::min);
            let hi = valid.cloned().fold(0.0, f64::max);
            prop_assert!(m >= lo - 1e-12 && m <= hi + 1e-12);
        }

        #[test]
        fn mean_permutation_invariant(values in line_values(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = values.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = summarize(0.0, values).mean_depth.unwrap();
            let b = summarize(0.0, shuffled).mean_depth.unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }

        #[test]
        fn shifting_valid_samples_shifts_mean(values in line_values(), delta in 0.0..5.0f64) {
            let shifted: Vec<f64> = values.iter().map(|v| if *v > 0.0 { v + delta } else { 0.0 }).collect();
            let a = summarize(0.0, values).mean_depth.unwrap();
            let b = summarize(0.0, shifted).mean_depth.unwrap();
            prop_assert!((b - a - delta).abs() < 1e-9);
        }

        #[test]
        fn single_valid_pixel_wins(v in 0.01..10.0f64, holes in 0usize..500) {
            let values = std::iter::once(v).chain(std::iter::repeat_n(0.0, holes));
            prop_assert_eq!(summarize(0.0, values).mean_depth, Some(v));
        }

        #[test]
        fn line_is_8_connected_without_duplicates(
            x0 in 0.0..63.0f64, y0 in 0.0..63.0f64, x1 in 0.0..63.0f64, y1 in 0.0..63.0f64,
        ) {
            let px = rasterize_line(p(x0, y0), p(x1, y1), 64, 64).unwrap();
            let (a, b) = ((x0.round() as u32, y0.round() as u32), (x1.round() as u32, y1.round() as u32));
            prop_assert_eq!(px[0], a);
            prop_assert_eq!(*px.last().unwrap(), b);
            let span = (a.0 as i64 - b.0 as i64).abs().max((a.1 as i64 - b.1 as i64).abs()) as usize;
            prop_assert_eq!(px.len(), span + 1);
            for w in px.windows(2) {
                let dx = (w[0].0 as i64 - w[1].0 as i64).abs();
                let dy = (w[0].1 as i64 - w[1].1 as i64).abs();
                prop_assert!(dx <= 1 && dy <= 1 && dx + dy > 0);
            }
        }
    }
}
