//! Shooting on the reduced first-order system obtained from the first
//! integral `r^{n−1} u' e^{F(u) + εw} = c`, `w = ∫₁^r u`.
//!
//! The state is `(u, z)` with `z = ∫₁^r (1 − u)`, so that `w = (r − 1) − z`.
//! Carrying `z` instead of `w` keeps the deficit integral needed for the
//! constant `C` free of cancellation at large `r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rk::{integrate, RkOptions};
use crate::roots::{expand_bracket_increasing, solve_bracketed, RootOptions};
use crate::specfun::{exp_integral_scaled, integral_of_e_scaled};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionProfile {
    pub r_grid: Vec<f64>,
    pub u: Vec<f64>,
    /// `u'(r)` as returned by the right-hand side at each accepted step.
    pub du: Vec<f64>,
    /// `w(r) = ∫₁^r u`.
    pub w: Vec<f64>,
    /// `z(r) = ∫₁^r (1 − u)`.
    pub z: Vec<f64>,
    pub c: f64,
    pub u_inf: f64,
    pub u_inf_bound: f64,
}

impl SolutionProfile {
    pub fn r_max(&self) -> f64 {
        *self.r_grid.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.r_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_grid.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingConfig {
    /// Target `|u(∞; c*) − 1| ≤ root_tol`.
    pub root_tol: f64,
    pub ivp_tol: f64,
    pub initial_c: Option<f64>,
    pub expansion_factor: f64,
    pub max_expansions: usize,
    /// `r_max` never exceeds `r_max_cap / ε`.
    pub r_max_cap: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            root_tol: 1e-8,
            ivp_tol: 1e-10,
            initial_c: None,
            expansion_factor: 2.0,
            max_expansions: 60,
            r_max_cap: 1e4,
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Integrate the reduced system from `r = 1` to `r_max` with slope `c`.
///
/// When `r_max ≥ 2` the profile also carries the tail estimate of `u(∞)`;
/// otherwise `u_inf = u(r_max)` with an infinite bound.
pub fn integrate_ivp(params: &ModelParams, c: f64, r_max: f64, tol: f64) -> Result<SolutionProfile> {
    params.validate()?;
    check_positive("c", c)?;
    check_positive("tol", tol)?;
    if !(r_max > 1.0 && r_max.is_finite()) {
        return Err(Error::Domain(format!("r_max must exceed 1, got {r_max}")));
    }
    let (n, eps) = (params.n, params.eps);
    let nl = &params.nonlinearity;
    let rhs = |r: f64, y: &[f64; 2]| {
        let w = (r - 1.0) - y[1];
        [c * r.powf(1.0 - n) * (-nl.big_f(y[0]) - eps * w).exp(), 1.0 - y[0]]
    };
    let opts = RkOptions {
        rtol: tol,
        atol: tol,
        h_init: 1e-3_f64.min(0.1 / eps),
        ..RkOptions::default()
    };
    let traj = integrate(rhs, 1.0, [0.0, 0.0], r_max, opts, |r| (0.1 * r).min(1.0 / eps))?;
    let m = traj.x.len();
    let mut profile = SolutionProfile {
        u: traj.y.iter().map(|y| y[0]).collect(),
        du: traj.dy.iter().map(|d| d[0]).collect(),
        z: traj.y.iter().map(|y| y[1]).collect(),
        w: traj.x.iter().zip(&traj.y).map(|(r, y)| (r - 1.0) - y[1]).collect(),
        r_grid: traj.x,
        c,
        u_inf: 0.0,
        u_inf_bound: f64::INFINITY,
    };
    profile.u_inf = profile.u[m - 1];
    if r_max >= 2.0 {
        let (u_inf, bound) = tail_u_infinity(&profile, params)?;
        profile.u_inf = u_inf;
        profile.u_inf_bound = bound;
    }
    Ok(profile)
}

/// `c·e^{−F(u_R) − εw_R}`, the common prefactor of the tail integrals.
fn tail_prefactor(profile: &SolutionProfile, params: &ModelParams) -> (f64, f64, f64) {
    let i = profile.len() - 1;
    let r = profile.r_grid[i];
    let u_r = profile.u[i];
    let pre = profile.c * (-params.nonlinearity.big_f(u_r) - params.eps * profile.w[i]).exp();
    (pre, r, params.eps * u_r)
}

/// Estimate `u(∞)` from a profile ending at `R ≥ 2`.
///
/// The remaining increment is `c∫_R^∞ s^{1−n} e^{−F(u) − εw} ds`. Freezing
/// `u = u(R)` in both exponents overestimates it and gives the closed form
/// `T = c e^{−F(u_R) − εw_R} β^{n−2} e^{βR} E_{n−1}(βR)`, `β = εu(R)`. The
/// increment is therefore in `[0, min(T, crude)]`; the estimate is the top of
/// that interval and the bound is its width.
pub fn tail_u_infinity(profile: &SolutionProfile, params: &ModelParams) -> Result<(f64, f64)> {
    if profile.is_empty() || profile.r_max() < 2.0 {
        return Err(Error::Precondition(format!(
            "tail estimate needs a profile reaching r >= 2 (got {})",
            profile.r_grid.last().copied().unwrap_or(f64::NAN)
        )));
    }
    let (pre, r, beta) = tail_prefactor(profile, params);
    let t = if pre == 0.0 {
        0.0
    } else {
        let x = beta * r;
        pre * beta.powf(params.n - 2.0) * exp_integral_scaled(params.n - 1.0, x)?
    };
    let crude = crude_tail_bound(params, profile.c, r);
    let t = t.min(crude);
    Ok((profile.u[profile.len() - 1] + t, t))
}

/// `p(c) = c e^{−ε−F(1)} ∫₁² s^{1−n} ds`, a lower bound for `u(2)` whenever
/// `u ≤ 1` on `[1, 2]`.
pub fn p_of_c(params: &ModelParams, c: f64) -> f64 {
    let n = params.n;
    let int12 = if (n - 2.0).abs() < 1e-12 {
        std::f64::consts::LN_2
    } else {
        (2f64.powf(2.0 - n) - 1.0) / (2.0 - n)
    };
    c * (-params.eps - params.nonlinearity.big_f(1.0)).exp() * int12
}

/// A-priori bound on `u(∞) − u(R)`, independent of the computed profile.
///
/// Uses `w(s) ≥ (s − 2)·min(p(c), 1)` for `s ≥ 2`; for `n > 2` the algebraic
/// bound `c/((n−2)R^{n−2})` is also available and the smaller is returned.
pub fn crude_tail_bound(params: &ModelParams, c: f64, r: f64) -> f64 {
    let (n, eps) = (params.n, params.eps);
    let p = p_of_c(params, c).min(1.0);
    let exp_branch = c * r.powf(1.0 - n) * (-eps * (r - 2.0) * p).exp() / (eps * p);
    if n > 2.0 {
        exp_branch.min(c / ((n - 2.0) * r.powf(n - 2.0)))
    } else {
        exp_branch
    }
}

/// Smallest `R` with `crude_tail_bound ≤ delta/10`, capped at `cap/ε`.
pub fn choose_r_max(params: &ModelParams, c: f64, delta: f64, cap: f64) -> f64 {
    let target = 0.1 * delta;
    let hi_cap = (cap / params.eps).max(2.0);
    if crude_tail_bound(params, c, hi_cap) > target {
        return hi_cap;
    }
    let (mut lo, mut hi) = (2.0f64, hi_cap);
    if crude_tail_bound(params, c, lo) <= target {
        return lo;
    }
    while hi / lo > 1.0 + 1e-6 {
        let mid = (lo * hi).sqrt();
        if crude_tail_bound(params, c, mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Initial guess for the shooting slope from the `ε → 0` limit.
pub fn seed_slope(params: &ModelParams) -> f64 {
    let g1 = params.nonlinearity.big_g(1.0);
    if params.n > 2.0 {
        (params.n - 2.0) * g1
    } else {
        g1 / params.eps.recip().ln().max(1.0)
    }
}

/// Profile and `u(∞)` for slope `c` under the configured `r_max` policy.
pub fn shoot_once(params: &ModelParams, c: f64, cfg: &ShootingConfig) -> Result<SolutionProfile> {
    let r_max = choose_r_max(params, c, cfg.root_tol, cfg.r_max_cap);
    integrate_ivp(params, c, r_max, cfg.ivp_tol)
}

/// Find `c*` with `|u(∞; c*) − 1| ≤ root_tol`.
pub fn shoot(params: &ModelParams, cfg: &ShootingConfig) -> Result<(f64, SolutionProfile)> {
    params.validate()?;
    check_positive("root_tol", cfg.root_tol)?;
    let seed = cfg.initial_c.unwrap_or_else(|| seed_slope(params));
    check_positive("initial slope", seed)?;
    let g = |c: f64| shoot_once(params, c, cfg).map(|p| p.u_inf - 1.0);
    let bracket = expand_bracket_increasing(g, seed, cfg.expansion_factor, cfg.max_expansions)?;
    let opts = RootOptions {
        f_tol: 0.1 * cfg.root_tol,
        switch_rel: 1e-3,
        x_rel: 1e-15,
        max_iter: 200,
    };
    let (c_star, _) = solve_bracketed(g, bracket, opts)?;
    let profile = shoot_once(params, c_star, cfg)?;
    if profile.u_inf_bound > cfg.root_tol {
        return Err(Error::Resolution {
            bound: profile.u_inf_bound,
            tolerance: cfg.root_tol,
            r_max: profile.r_max(),
        });
    }
    let miss = (profile.u_inf - 1.0).abs();
    if miss > cfg.root_tol {
        return Err(Error::NonConvergence {
            iterations: opts.max_iter,
            residual: miss,
        });
    }
    Ok((c_star, profile))
}

/// Tolerance on `|u(∞) − 1|` accepted by [`extract_c`].
pub const EXTRACT_TOL: f64 = 1e-6;

/// The constant `C` of the rescaled problem,
/// `C = c·exp(ε(1 + ∫₁^∞ (1 − u) ds))`.
///
/// `∫₁^R (1 − u)` is the carried state `z(R)`; the remainder beyond `R` uses
/// the same frozen-exponent model as [`tail_u_infinity`].
pub fn extract_c(c_star: f64, profile: &SolutionProfile, params: &ModelParams) -> Result<f64> {
    if profile.is_empty() || profile.r_max() < 2.0 || (profile.u_inf - 1.0).abs() > EXTRACT_TOL {
        return Err(Error::Precondition(format!(
            "profile does not solve the boundary-value problem (u_inf = {})",
            profile.u_inf
        )));
    }
    let (pre, r, beta) = tail_prefactor(profile, params);
    let n = params.n;
    let z_tail = if pre == 0.0 {
        0.0
    } else if n >= 2.0 {
        // ∫_R^∞ (t − R) t^{1−n} e^{−β(t−R)} dt = β^{n−3} e^{x}(E_{n−2}(x) − xE_{n−1}(x)).
        pre * beta.powf(n - 3.0) * integral_of_e_scaled(n - 1.0, beta * r)?
    } else {
        pre * r.powf(1.0 - n) / (beta * beta)
    };
    let z_total = profile.z[profile.len() - 1] + z_tail;
    Ok(c_star * (params.eps * (1.0 + z_total)).exp())
}

/// Largest relative violation of `r^{n−1}u' e^{F(u)+εw} = c` over the stored
/// profile.
pub fn conservation_defect(profile: &SolutionProfile, params: &ModelParams) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..profile.len() {
        let r = profile.r_grid[i];
        let inv = r.powf(params.n - 1.0)
            * profile.du[i]
            * (params.nonlinearity.big_f(profile.u[i]) + params.eps * profile.w[i]).exp();
        worst = worst.max((inv / profile.c - 1.0).abs());
    }
    worst
}

/// Integrate the original second-order equation
/// `u'' + (n−1)u'/r + εuu' + f(u)u'² = 0` with `u(1) = 0`, `u'(1) = c` and
/// return the largest relative drift of the first integral up to `r_end`.
/// Unlike [`conservation_defect`] this does not use the reduced system.
pub fn first_integral_drift(params: &ModelParams, c: f64, r_end: f64, tol: f64) -> Result<f64> {
    params.validate()?;
    check_positive("c", c)?;
    let (n, eps) = (params.n, params.eps);
    let nl = &params.nonlinearity;
    let rhs = |r: f64, y: &[f64; 3]| {
        let (u, p) = (y[0], y[1]);
        [p, -(n - 1.0) * p / r - eps * u * p - nl.f(u) * p * p, u]
    };
    let opts = RkOptions {
        rtol: tol,
        atol: tol * 1e-12,
        h_init: 1e-3_f64.min(0.1 / eps),
        ..RkOptions::default()
    };
    let traj = integrate(rhs, 1.0, [0.0, c, 0.0], r_end, opts, |r| (0.1 * r).min(1.0 / eps))?;
    let mut worst: f64 = 0.0;
    for (r, y) in traj.x.iter().zip(&traj.y) {
        let inv = r.powf(n - 1.0) * y[1] * (nl.big_f(y[0]) + eps * y[2]).exp();
        worst = worst.max((inv / c - 1.0).abs());
    }
    Ok(worst)
}
