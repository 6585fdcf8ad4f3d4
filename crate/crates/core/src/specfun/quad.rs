//! Globally adaptive Gauss–Legendre quadrature.
//!
//! Each panel is integrated with an `ORDER`-point Gauss–Legendre rule on the
//! whole panel and on its two halves; the difference between the two is the
//! panel's error estimate and the sum of the halves is its value. The panel
//! with the largest estimate is bisected until the global estimate meets the
//! tolerance. Semi-infinite ranges `[a, ∞)` are mapped to `[0, 1)` with
//! `τ = a + s/(1 − s)`.
//!
//! Endpoint singularities at `a` (logarithmic, or `τ^p` with `p > −1`) are
//! resolved by repeated bisection toward the endpoint; the Gauss nodes never
//! touch the endpoints themselves.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Estimated absolute error, always `>= 0`.
    pub error_estimate: f64,
    /// Number of integrand evaluations, always `>= 1`.
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl QuadOptions {
    /// Purely relative tolerance; useful for integrals with tiny values.
    pub fn relative(rel_tol: f64) -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol,
            ..Self::default()
        }
    }
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_panels: 4000,
        }
    }
}

fn gauss_legendre() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        (nodes, weights)
    })
}

fn gl_panel<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64, evals: &mut usize) -> f64 {
    let (nodes, weights) = gauss_legendre();
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        sum += w * f(mid + half * x);
    }
    *evals += ORDER;
    sum * half
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    left: f64,
    right: f64,
    err: f64,
}

impl Panel {
    fn value(&self) -> f64 {
        self.left + self.right
    }

    fn splittable(&self) -> bool {
        let mid = 0.5 * (self.lo + self.hi);
        mid > self.lo && mid < self.hi && (self.hi - self.lo) > 1e-300
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn make_panel<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64, whole: f64, evals: &mut usize) -> Panel {
    let mid = 0.5 * (lo + hi);
    let left = gl_panel(f, lo, mid, evals);
    let right = gl_panel(f, mid, hi, evals);
    Panel {
        lo,
        hi,
        left,
        right,
        err: (whole - left - right).abs(),
    }
}

/// Integrate `integrand` over `[a, b]`, where `b` may be `f64::INFINITY`.
///
/// `tol` is used both as absolute and relative tolerance.
pub fn quad_adaptive<F>(integrand: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
{
    quad_with(
        integrand,
        a,
        b,
        QuadOptions {
            abs_tol: tol,
            rel_tol: tol,
            ..QuadOptions::default()
        },
    )
}

pub fn quad_with<F>(mut integrand: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
{
    if !(opts.abs_tol >= 0.0 && opts.rel_tol >= 0.0) || (opts.abs_tol == 0.0 && opts.rel_tol == 0.0) {
        return Err(Error::Domain("quadrature tolerance must be positive".into()));
    }
    if !a.is_finite() || b.is_nan() {
        return Err(Error::Domain(format!("invalid quadrature range [{a}, {b}]")));
    }
    if b == f64::INFINITY {
        let mapped = move |s: f64| {
            let one_minus = 1.0 - s;
            let t = s / one_minus;
            let fx = integrand(a + t);
            if fx == 0.0 {
                0.0
            } else {
                fx / (one_minus * one_minus)
            }
        };
        adaptive(mapped, 0.0, 1.0, opts)
    } else if b < a {
        adaptive(integrand, b, a, opts).map(|r| QuadratureResult { value: -r.value, ..r })
    } else if b == a {
        Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 1,
        })
    } else {
        adaptive(integrand, a, b, opts)
    }
}

fn adaptive<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, opts: QuadOptions) -> Result<QuadratureResult> {
    let mut evals = 0usize;
    let whole = gl_panel(&mut f, lo, hi, &mut evals);
    let root = make_panel(&mut f, lo, hi, whole, &mut evals);
    if !root.value().is_finite() {
        return Err(Error::Accuracy {
            context: "quadrature (non-finite integrand)".into(),
            best_estimate: root.value(),
            error_estimate: f64::INFINITY,
        });
    }

    let mut heap = BinaryHeap::new();
    let mut frozen_value = 0.0;
    let mut frozen_err = 0.0;
    let mut total = root.value();
    let mut total_err = root.err;
    heap.push(root);
    let mut panels = 1usize;

    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        // Roundoff floor: a handful of ulps of the accumulated magnitude.
        let floor = 64.0 * f64::EPSILON * total.abs();
        if total_err <= target || total_err <= floor {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        if !worst.splittable() {
            frozen_value += worst.value();
            frozen_err += worst.err;
            continue;
        }
        if panels >= opts.max_panels {
            heap.push(worst);
            return Err(Error::Accuracy {
                context: "adaptive quadrature (panel budget exhausted)".into(),
                best_estimate: total,
                error_estimate: total_err,
            });
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        let l = make_panel(&mut f, worst.lo, mid, worst.left, &mut evals);
        let r = make_panel(&mut f, mid, worst.hi, worst.right, &mut evals);
        if !(l.value().is_finite() && r.value().is_finite()) {
            return Err(Error::Accuracy {
                context: "quadrature (non-finite integrand)".into(),
                best_estimate: total,
                error_estimate: total_err,
            });
        }
        panels += 1;
        heap.push(l);
        heap.push(r);
        // Re-sum rather than update incrementally to avoid drift.
        total = frozen_value;
        total_err = frozen_err;
        for p in heap.iter() {
            total += p.value();
            total_err += p.err;
        }
    }

    Ok(QuadratureResult {
        value: total,
        error_estimate: total_err,
        evaluations: evals.max(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_integrate_polynomials_exactly() {
        let r = quad_adaptive(|x| x.powi(28) + 3.0 * x, 0.0, 1.0, 1e-14).unwrap();
        assert!((r.value - (1.0 / 29.0 + 1.5)).abs() < 1e-15);
    }

    #[test]
    fn exponential_on_half_line() {
        let r = quad_adaptive(|t| (-t).exp(), 0.0, f64::INFINITY, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-13);
        assert!(r.error_estimate >= 0.0);
        assert!(r.evaluations >= 1);
    }

    #[test]
    fn log_and_power_endpoint_singularities() {
        // ∫_0^1 ln t dt = -1
        let r = quad_adaptive(|t| t.ln(), 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value + 1.0).abs() < 1e-11, "{}", r.value);
        // ∫_0^1 t^{-1/2} dt = 2
        let r = quad_adaptive(|t| t.powf(-0.5), 0.0, 1.0, 1e-11).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = quad_adaptive(|t| t, 1.0, 0.0, 1e-12).unwrap();
        assert!((r.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn budget_exhaustion_reports_best_estimate() {
        let opts = QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            max_panels: 3,
        };
        let err = quad_with(|t| (50.0 * t).sin().abs(), 0.0, 10.0, opts).unwrap_err();
        match err {
            Error::Accuracy { best_estimate, .. } => assert!(best_estimate.is_finite()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_tolerance_is_a_domain_error() {
        assert!(matches!(quad_adaptive(|t| t, 0.0, 1.0, 0.0), Err(Error::Domain(_))));
    }
}
