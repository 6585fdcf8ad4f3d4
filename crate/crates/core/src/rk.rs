//! Dormand–Prince 5(4) integrator with a mixed absolute/relative error norm.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RkOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub max_steps: usize,
}

impl Default for RkOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: 1e-3,
            max_steps: 2_000_000,
        }
    }
}

/// Accepted steps of an integration: abscissae, states and derivatives.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub x: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub dy: Vec<[f64; N]>,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrate `y' = f(x, y)` from `x0` to `x_end > x0`. `max_step(x)` caps the
/// step taken from `x`.
pub fn integrate<const N: usize, F, M>(
    mut f: F,
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    opts: RkOptions,
    max_step: M,
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    M: Fn(f64) -> f64,
{
    if !(x_end > x0) {
        return Err(Error::Domain(format!("integration range [{x0}, {x_end}] is empty")));
    }
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut traj = Trajectory {
        x: vec![x],
        y: vec![y],
        dy: vec![k1],
    };
    let mut h = opts.h_init.min(max_step(x)).min(x_end - x0);
    let mut steps = 0usize;
    while x < x_end {
        if steps >= opts.max_steps {
            return Err(Error::Integration(format!(
                "step budget of {} exhausted at x = {x:e}",
                opts.max_steps
            )));
        }
        steps += 1;
        h = h.min(max_step(x));
        let last = x + h >= x_end;
        if last {
            h = x_end - x;
        }
        if h <= 1e-14 * x.abs().max(1.0) {
            return Err(Error::Integration(format!("step size underflow at x = {x:e}")));
        }
        let k2 = f(x + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(x + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(x + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            x + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            x + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let x_new = if last { x_end } else { x + h };
        let k7 = f(x_new, &y_new);

        let mut err: f64 = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            h *= 0.1;
            continue;
        }
        if err <= 1.0 {
            x = x_new;
            y = y_new;
            k1 = k7;
            traj.x.push(x);
            traj.y.push(y);
            traj.dy.push(k1);
            let grow = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= grow;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let opts = RkOptions {
            rtol: 1e-12,
            atol: 1e-12,
            ..RkOptions::default()
        };
        let t = integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 5.0, opts, |_| 1.0).unwrap();
        let last = *t.y.last().unwrap();
        assert!((last[0] - (-5.0f64).exp()).abs() < 1e-11);
        assert_eq!(*t.x.last().unwrap(), 5.0);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let opts = RkOptions {
            rtol: 1e-11,
            atol: 1e-11,
            ..RkOptions::default()
        };
        let t = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], 20.0, opts, |_| 0.5).unwrap();
        for (xi, yi) in t.x.iter().zip(&t.y) {
            assert!((yi[0] - xi.cos()).abs() < 1e-8);
        }
        assert!(t.x.windows(2).all(|w| w[1] - w[0] <= 0.5 + 1e-15));
    }

    #[test]
    fn empty_range_rejected() {
        assert!(integrate(|_, y: &[f64; 1]| [y[0]], 1.0, [1.0], 1.0, RkOptions::default(), |_| 1.0).is_err());
    }
}
