//! Monotone piecewise-cubic Hermite interpolation.
//!
//! Node slopes are either supplied (when the caller knows the exact
//! derivative) or estimated with the Fritsch–Butland harmonic mean. Either
//! way they are passed through the Fritsch–Carlson limiter, so monotone data
//! produce a monotone interpolant.

use crate::error::{Error, Result};

/// Shape-preserving three-point end slope.
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: &[f64], y: &[f64], slopes: Option<&[f64]>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n || slopes.is_some_and(|s| s.len() != n) {
            return Err(Error::Domain("interpolation needs >= 2 matching samples".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(
                "interpolation abscissae must be strictly increasing".into(),
            ));
        }
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut m: Vec<f64> = match slopes {
            Some(s) => s.to_vec(),
            None => {
                let mut m = vec![0.0; n];
                if n == 2 {
                    m[0] = delta[0];
                    m[1] = delta[0];
                } else {
                    m[0] = end_slope(x[1] - x[0], x[2] - x[1], delta[0], delta[1]);
                    m[n - 1] = end_slope(x[n - 1] - x[n - 2], x[n - 2] - x[n - 3], delta[n - 2], delta[n - 3]);
                }
                for i in 1..n - 1 {
                    let (d0, d1) = (delta[i - 1], delta[i]);
                    if d0 * d1 > 0.0 {
                        let h0 = x[i] - x[i - 1];
                        let h1 = x[i + 1] - x[i];
                        let w0 = 2.0 * h1 + h0;
                        let w1 = h1 + 2.0 * h0;
                        m[i] = (w0 + w1) / (w0 / d0 + w1 / d1);
                    }
                }
                m
            }
        };
        // Fritsch–Carlson limiter.
        for i in 0..n - 1 {
            let d = delta[i];
            if d == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            if m[i] * d < 0.0 {
                m[i] = 0.0;
            }
            if m[i + 1] * d < 0.0 {
                m[i + 1] = 0.0;
            }
            let a = m[i] / d;
            let b = m[i + 1] / d;
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                m[i] = t * a * d;
                m[i + 1] = t * b * d;
            }
        }
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    /// Evaluate at `t`; outside the sample range the end value is held.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&v| v <= t) - 1;
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.m[i] + h01 * self.y[i + 1] + h11 * h * self.m[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_cubic_with_exact_slopes() {
        let x: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v * v + v).collect();
        let d: Vec<f64> = x.iter().map(|v| 3.0 * v * v + 1.0).collect();
        let p = MonotoneCubic::new(&x, &y, Some(&d)).unwrap();
        for i in 0..100 {
            let t = i as f64 * 0.01;
            assert!((p.eval(t) - (t * t * t + t)).abs() < 1e-14);
        }
    }

    #[test]
    fn estimated_slopes_are_accurate_for_smooth_data() {
        let x: Vec<f64> = (0..201).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 - (-v).exp()).collect();
        let p = MonotoneCubic::new(&x, &y, None).unwrap();
        for i in 0..1000 {
            let t = i as f64 * 0.002;
            assert!((p.eval(t) - (1.0 - (-t).exp())).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_unsorted() {
        assert!(MonotoneCubic::new(&[0.0, 0.0], &[1.0, 2.0], None).is_err());
    }

    proptest! {
        #[test]
        fn monotone_data_give_monotone_interpolant(steps in proptest::collection::vec(0.0f64..1.0, 3..20)) {
            let x: Vec<f64> = (0..steps.len()).map(|i| i as f64).collect();
            let mut acc = 0.0;
            let y: Vec<f64> = steps.iter().map(|s| { acc += s; acc }).collect();
            let p = MonotoneCubic::new(&x, &y, None).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=((x.len() - 1) * 20) {
                let v = p.eval(i as f64 / 20.0);
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
