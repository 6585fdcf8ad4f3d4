//! Picard iteration on the rescaled integral equation
//!
//! ```text
//! g(ρ) = −K ∫_ρ^∞ τ^{1−n} e^{−τ − Y(τ)} dτ,   Y(τ) = ∫_τ^∞ (1 − u) dσ,
//! ```
//!
//! with `K = Cε^{n−2}` and `g = G(u) − G(1)` (`g = u − 1` when `k = 0`,
//! `g = e^u − e` when `k = 1`). `C` is fixed by `u(ε) = 0`.
//!
//! The grid is uniform in `t = ln ρ` on `[ε, ε + 40]`. Integrals are
//! accumulated from the right with a fourth-order four-point rule. The
//! first-order part `a₀ K E_{n−1}` of `1 − u` is integrated in closed form
//! and only the remainder is integrated numerically. Beyond the grid every
//! contribution is dropped; at `ρ = ε + 40` the first-order tail is below
//! `1e−17` relative to its value at `ε`.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{c_asym, CaseId};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::ode_shoot::seed_slope;
use crate::roots::{expand_bracket_increasing, solve_bracketed, RootOptions};
use crate::specfun::{exp_integral, integral_of_e, quad_with, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IterateKind {
    /// `v = u − 1` (`k = 0`).
    UMinusOne,
    /// `g = G(u) − G(1)`.
    ShiftedG,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledProfile {
    pub rho_grid: Vec<f64>,
    pub v: Vec<f64>,
    pub kind: IterateKind,
    #[serde(rename = "C")]
    pub big_c: f64,
    /// Right end of the grid.
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationDiagnostics {
    pub phi: f64,
    pub iterations: usize,
    pub final_residual: f64,
    pub contraction_ratios: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    pub points_per_decade: usize,
    /// The grid ends at `ρ = ε + tail_width`.
    pub tail_width: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub allow_large_phi: bool,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            points_per_decade: 160,
            tail_width: 40.0,
            tol: 1e-12,
            max_iters: 500,
            allow_large_phi: false,
        }
    }
}

/// Residuals below this are dominated by rounding and excluded from the
/// contraction ratios.
pub const RATIO_FLOOR: f64 = 1e-12;

fn kind_of(params: &ModelParams) -> IterateKind {
    match params.nonlinearity.is_constant() {
        Some(0.0) => IterateKind::UMinusOne,
        _ => IterateKind::ShiftedG,
    }
}

fn check_n(params: &ModelParams) -> Result<()> {
    params.validate()?;
    if params.n < 2.0 {
        return Err(Error::Unsupported(format!(
            "the integral-equation route needs n >= 2, got {}",
            params.n
        )));
    }
    if params.n > 11.0 {
        return Err(Error::Unsupported(format!("n = {} exceeds the supported 11", params.n)));
    }
    Ok(())
}

fn k_factor(params: &ModelParams, big_c: f64) -> f64 {
    big_c * params.eps.powf(params.n - 2.0)
}

/// First- and second-order coefficients of `u − 1 = a₀ g + a₁ g² + …`.
fn inverse_coefficients(params: &ModelParams) -> (f64, f64) {
    let f1 = params.nonlinearity.big_f(1.0);
    let a0 = (-f1).exp();
    let a1 = -0.5 * params.nonlinearity.f(1.0) * (-2.0 * f1).exp();
    (a0, a1)
}

struct Grid {
    rho: Vec<f64>,
    h: f64,
    e: Vec<f64>,
    ie: Vec<f64>,
    /// `ρ^{2−n} e^{−ρ}`.
    w: Vec<f64>,
}

impl Grid {
    fn build(params: &ModelParams, cfg: &PicardConfig) -> Result<Self> {
        if cfg.points_per_decade < 8 || !(cfg.tail_width >= 30.0) {
            return Err(Error::Accuracy {
                context: "Picard grid too coarse (need >= 8 points per decade and tail width >= 30)".into(),
                best_estimate: f64::NAN,
                error_estimate: f64::INFINITY,
            });
        }
        let t0 = params.eps.ln();
        let t1 = (params.eps + cfg.tail_width).ln();
        let m = (((t1 - t0) / std::f64::consts::LN_10) * cfg.points_per_decade as f64).ceil() as usize + 1;
        let m = m.max(8);
        let h = (t1 - t0) / (m - 1) as f64;
        let mut rho: Vec<f64> = (0..m).map(|i| (t0 + i as f64 * h).exp()).collect();
        rho[0] = params.eps;
        rho[m - 1] = params.eps + cfg.tail_width;
        Self::from_rho(params, rho, h)
    }

    fn from_profile(params: &ModelParams, rho: &[f64]) -> Result<Self> {
        let m = rho.len();
        if m < 8 || rho[0] <= 0.0 {
            return Err(Error::Domain("profile grid needs >= 8 positive points".into()));
        }
        let h = (rho[m - 1] / rho[0]).ln() / (m - 1) as f64;
        for (i, &r) in rho.iter().enumerate() {
            let expect = rho[0].ln() + i as f64 * h;
            if (r.ln() - expect).abs() > 1e-9 * (1.0 + expect.abs()) {
                return Err(Error::Domain("profile grid must be uniform in ln rho".into()));
            }
        }
        Self::from_rho(params, rho.to_vec(), h)
    }

    fn from_rho(params: &ModelParams, rho: Vec<f64>, h: f64) -> Result<Self> {
        let q = params.n - 1.0;
        let mut e = Vec::with_capacity(rho.len());
        let mut ie = Vec::with_capacity(rho.len());
        for &r in &rho {
            e.push(exp_integral(q, r)?);
            ie.push(integral_of_e(q, r)?);
        }
        let w = rho.iter().map(|&r| r.powf(2.0 - params.n) * (-r).exp()).collect();
        Ok(Self { rho, h, e, ie, w })
    }
}

/// `out[i] = ∫_{t_i}^{t_last} f dt` on a uniform grid, fourth order.
fn cumulative_from_right(h: f64, f: &[f64]) -> Vec<f64> {
    let m = f.len();
    let mut out = vec![0.0; m];
    let c = h / 24.0;
    for i in (0..m - 1).rev() {
        let cell = if i == 0 {
            c * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if i == m - 2 {
            c * (f[m - 4] - 5.0 * f[m - 3] + 19.0 * f[m - 2] + 9.0 * f[m - 1])
        } else {
            c * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2])
        };
        out[i] = out[i + 1] + cell;
    }
    out
}

fn u_of(params: &ModelParams, g: f64) -> f64 {
    // A wildly large trial C can push g below the range of G − G(1); the
    // clamp keeps the sweep finite while the root finder backs off.
    params.nonlinearity.u_from_shifted(g).max(-1e3)
}

/// `Y(ρ_i) = ∫_{ρ_i}^∞ (1 − u)` for the iterate `g`.
fn y_values(params: &ModelParams, grid: &Grid, kk: f64, g: &[f64]) -> Vec<f64> {
    let (a0, _) = inverse_coefficients(params);
    let rem: Vec<f64> = (0..g.len())
        .map(|i| (1.0 - u_of(params, g[i]) - a0 * kk * grid.e[i]) * grid.rho[i])
        .collect();
    let cr = cumulative_from_right(grid.h, &rem);
    (0..g.len()).map(|i| a0 * kk * grid.ie[i] + cr[i]).collect()
}

fn sweep(params: &ModelParams, grid: &Grid, kk: f64, g: &[f64]) -> Vec<f64> {
    if kk == 0.0 {
        return vec![0.0; g.len()];
    }
    let y = y_values(params, grid, kk, g);
    let s: Vec<f64> = (0..g.len()).map(|i| grid.w[i] * -(-y[i]).exp_m1()).collect();
    let cs = cumulative_from_right(grid.h, &s);
    (0..g.len()).map(|i| -kk * (grid.e[i] - cs[i])).collect()
}

/// One application of the integral operator to `current`.
pub fn picard_rhs(params: &ModelParams, big_c: f64, current: &RescaledProfile) -> Result<RescaledProfile> {
    check_n(params)?;
    if !(big_c >= 0.0) {
        return Err(Error::Domain(format!("C must be >= 0, got {big_c}")));
    }
    let grid = Grid::from_profile(params, &current.rho_grid)?;
    let v = sweep(params, &grid, k_factor(params, big_c), &current.v);
    Ok(RescaledProfile {
        rho_grid: current.rho_grid.clone(),
        v,
        kind: kind_of(params),
        big_c,
        p: current.p,
    })
}

/// `Φ = Cε^{n−2} ∫_ε^∞ E_{n−1}`.
pub fn phi_diagnostic(params: &ModelParams, big_c: f64) -> Result<f64> {
    check_n(params)?;
    if !(big_c >= 0.0) {
        return Err(Error::Domain(format!("C must be >= 0, got {big_c}")));
    }
    Ok(k_factor(params, big_c) * integral_of_e(params.n - 1.0, params.eps)?)
}

fn iterate(
    params: &ModelParams,
    grid: &Grid,
    big_c: f64,
    start: Vec<f64>,
    cfg: &PicardConfig,
    phi: f64,
) -> Result<(Vec<f64>, IterationDiagnostics)> {
    let kk = k_factor(params, big_c);
    let mut g = start;
    let mut ratios = Vec::new();
    let mut prev: Option<f64> = None;
    for it in 1..=cfg.max_iters {
        let next = sweep(params, grid, kk, &g);
        let res = next.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if !res.is_finite() {
            return Err(Error::NonConvergence {
                iterations: it,
                residual: res,
            });
        }
        if let Some(p) = prev {
            if p > RATIO_FLOOR && res > RATIO_FLOOR {
                ratios.push(res / p);
            }
        }
        prev = Some(res);
        g = next;
        if res <= cfg.tol {
            return Ok((
                g,
                IterationDiagnostics {
                    phi,
                    iterations: it,
                    final_residual: res,
                    contraction_ratios: ratios,
                },
            ));
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iters,
        residual: prev.unwrap_or(f64::NAN),
    })
}

/// Fixed point of [`picard_rhs`] for a given `C`, started from zero.
pub fn picard_solve(
    params: &ModelParams,
    big_c: f64,
    cfg: &PicardConfig,
) -> Result<(RescaledProfile, IterationDiagnostics)> {
    let phi = phi_diagnostic(params, big_c)?;
    if phi >= 1.0 && !cfg.allow_large_phi {
        return Err(Error::Precondition(format!(
            "Phi = {phi:.4} >= 1; Picard convergence is not guaranteed"
        )));
    }
    let grid = Grid::build(params, cfg)?;
    let start = vec![0.0; grid.rho.len()];
    let (v, diag) = iterate(params, &grid, big_c, start, cfg, phi)?;
    Ok((
        RescaledProfile {
            p: *grid.rho.last().unwrap(),
            rho_grid: grid.rho,
            v,
            kind: kind_of(params),
            big_c,
        },
        diag,
    ))
}

/// Starting value for the `C` search.
pub fn seed_c(params: &ModelParams) -> f64 {
    let covered = params
        .nonlinearity
        .is_constant()
        .and_then(|k| CaseId::from_params(params.n, k));
    match covered {
        Some(case) if params.eps < 0.2 => c_asym(case, params.eps, 3)
            .ok()
            .filter(|c| *c > 0.0)
            .unwrap_or_else(|| seed_slope(params)),
        _ => seed_slope(params),
    }
}

/// Determine `C` from `u(ε) = 0` by an outer root find over Picard solves.
pub fn solve_c(params: &ModelParams, cfg: &PicardConfig) -> Result<(f64, RescaledProfile, IterationDiagnostics)> {
    check_n(params)?;
    let grid = Grid::build(params, cfg)?;
    let target = params.nonlinearity.g_shifted(0.0);
    let inner = PicardConfig {
        allow_large_phi: true,
        ..*cfg
    };
    let mut warm = vec![0.0; grid.rho.len()];
    let mut h = |c: f64| -> Result<f64> {
        let phi = phi_diagnostic(params, c)?;
        let (g, _) = iterate(params, &grid, c, warm.clone(), &inner, phi)?;
        let val = target - g[0];
        warm = g;
        Ok(val)
    };
    let bracket = expand_bracket_increasing(&mut h, seed_c(params), 1.25, 80)?;
    let opts = RootOptions {
        f_tol: 1e-13,
        switch_rel: 1e-3,
        x_rel: 1e-15,
        max_iter: 200,
    };
    let (big_c, _) = solve_bracketed(&mut h, bracket, opts)?;
    let phi = phi_diagnostic(params, big_c)?;
    if phi >= 1.0 && !cfg.allow_large_phi {
        return Err(Error::Precondition(format!(
            "Phi = {phi:.4} >= 1 at the solved C; Picard convergence is not guaranteed"
        )));
    }
    let (v, diag) = iterate(params, &grid, big_c, vec![0.0; grid.rho.len()], cfg, phi)?;
    Ok((
        big_c,
        RescaledProfile {
            p: *grid.rho.last().unwrap(),
            rho_grid: grid.rho,
            v,
            kind: kind_of(params),
            big_c,
        },
        diag,
    ))
}

impl RescaledProfile {
    /// `u` at every grid point.
    pub fn u_values(&self, params: &ModelParams) -> Vec<f64> {
        self.v.iter().map(|&g| params.nonlinearity.u_from_shifted(g)).collect()
    }

    /// `du/dρ = Kρ^{1−n} e^{−ρ−Y(ρ)−F(u)}` at every grid point.
    pub fn du_drho(&self, params: &ModelParams) -> Result<Vec<f64>> {
        let grid = Grid::from_profile(params, &self.rho_grid)?;
        let kk = k_factor(params, self.big_c);
        let y = y_values(params, &grid, kk, &self.v);
        Ok((0..self.v.len())
            .map(|i| {
                let rho = self.rho_grid[i];
                let u = params.nonlinearity.u_from_shifted(self.v[i]);
                kk * rho.powf(1.0 - params.n) * (-rho - y[i] - params.nonlinearity.big_f(u)).exp()
            })
            .collect())
    }

    /// `Y(ε) = ε∫₁^∞ (1 − u) dr`.
    pub fn deficit_integral(&self, params: &ModelParams) -> Result<f64> {
        let grid = Grid::from_profile(params, &self.rho_grid)?;
        Ok(y_values(params, &grid, k_factor(params, self.big_c), &self.v)[0])
    }

    /// Slope `u'(1) = C e^{−ε − Y(ε)}` implied by the solution.
    pub fn implied_slope(&self, params: &ModelParams) -> Result<f64> {
        Ok(self.big_c * (-params.eps - self.deficit_integral(params)?).exp())
    }
}

/// Largest number of series terms available.
pub fn max_series_terms(params: &ModelParams) -> usize {
    match kind_of(params) {
        IterateKind::UMinusOne => 4,
        IterateKind::ShiftedG => 5,
    }
}

/// The leading `order` terms of the Picard series at `rho`.
///
/// For `k = 0` the terms are `−KE_{n−1}`, then the `K²` term, then the two
/// `K³` terms (squared first integral, then the nested one). Otherwise the
/// list is `−KE_{n−1}, F₁, F₂, F₃, F₄` with the prefactors `a₀`, `−a₁`,
/// `a₀²`, `a₀²` from `u − 1 = a₀g + a₁g² + …`.
pub fn series_terms(params: &ModelParams, big_c: f64, rho: f64, order: usize) -> Result<Vec<f64>> {
    check_n(params)?;
    let max = max_series_terms(params);
    if order == 0 || order > max {
        return Err(Error::Domain(format!("series order must be 1..={max}, got {order}")));
    }
    if !(rho >= params.eps) {
        return Err(Error::Domain(format!("series needs rho >= eps, got {rho}")));
    }
    let n = params.n;
    let q = n - 1.0;
    let kk = k_factor(params, big_c);
    let (a0, a1) = inverse_coefficients(params);
    let inner_opts = QuadOptions::relative(1e-12);
    let outer_opts = QuadOptions::relative(1e-10);

    let mut failure: Option<Error> = None;
    let mut guard = |r: Result<f64>| match r {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let f = |t: f64| t.powf(1.0 - n) * (-t).exp();
    let ie = |t: f64| integral_of_e(q, t);

    let t1 = -kk * exp_integral(q, rho)?;
    let mut terms = vec![t1];
    if order >= 2 {
        let j = quad_with(|t| f(t) * guard(ie(t)), rho, f64::INFINITY, outer_opts)?.value;
        let t2 = kk * kk * j;
        terms.push(if max == 4 { t2 } else { a0 * t2 });
    }
    let mut t3 = || -> Result<f64> {
        let v = quad_with(
            |t| {
                let i = guard(ie(t));
                f(t) * i * i
            },
            rho,
            f64::INFINITY,
            outer_opts,
        )?
        .value;
        Ok(-0.5 * kk.powi(3) * v)
    };
    let t3v = if order >= 3 { Some(t3()?) } else { None };
    let m_of = |tau: f64| -> Result<f64> {
        let mut fail = None;
        let v = quad_with(
            |s| match ie(s) {
                Ok(i) => (s - tau) * f(s) * i,
                Err(e) => {
                    fail.get_or_insert(e);
                    f64::NAN
                }
            },
            tau,
            f64::INFINITY,
            inner_opts,
        )?;
        fail.map_or(Ok(v.value), Err)
    };
    let i2_of = |tau: f64| -> Result<f64> {
        let mut fail = None;
        let v = quad_with(
            |s| match exp_integral(q, s) {
                Ok(e) => e * e,
                Err(err) => {
                    fail.get_or_insert(err);
                    f64::NAN
                }
            },
            tau,
            f64::INFINITY,
            inner_opts,
        )?;
        fail.map_or(Ok(v.value), Err)
    };
    let nested = |g: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let mut fail = None;
        let v = quad_with(
            |t| match g(t) {
                Ok(x) => f(t) * x,
                Err(e) => {
                    fail.get_or_insert(e);
                    f64::NAN
                }
            },
            rho,
            f64::INFINITY,
            outer_opts,
        )?;
        fail.map_or(Ok(v.value), Err)
    };
    if max == 4 {
        if let Some(t3) = t3v {
            terms.push(t3);
        }
        if order >= 4 {
            terms.push(-kk.powi(3) * nested(&m_of)?);
        }
    } else {
        if order >= 3 {
            terms.push(-a1 * kk.powi(3) * nested(&i2_of)?);
        }
        if order >= 4 {
            terms.push(a0 * a0 * t3v.map_or_else(&mut t3, Ok)?);
        }
        if order >= 5 {
            terms.push(-a0 * a0 * kk.powi(3) * nested(&m_of)?);
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(terms)
}
