use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{compare_profiles, Check, ErrorMetrics, Report, SampledProfile};
use crate::error::Result;
use crate::integral_eq::{solve_c, PicardConfig};
use crate::model::ModelParams;
use crate::ode_shoot::{extract_c, first_integral_drift, shoot, shoot_once, ShootingConfig, SolutionProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSolverResult {
    pub c_star: f64,
    /// `C` recovered from the shooting profile.
    pub c_from_shooting: f64,
    /// `C` from the integral equation.
    pub c_from_picard: f64,
    /// `u'(1)` implied by the integral-equation solution.
    pub implied_slope: f64,
    pub metrics: ErrorMetrics,
}

/// Solve by shooting and by Picard iteration and compare `u(r)` on
/// `[1, r_hi]`.
pub fn cross_solver(
    params: &ModelParams,
    shoot_cfg: &ShootingConfig,
    picard_cfg: &PicardConfig,
    r_hi: f64,
) -> Result<CrossSolverResult> {
    let (c_star, prof) = shoot(params, shoot_cfg)?;
    let c_from_shooting = extract_c(c_star, &prof, params)?;
    let (c_from_picard, rescaled, _) = solve_c(params, picard_cfg)?;
    let a = SampledProfile::from_shooting(&prof);
    let b = SampledProfile::from_rescaled(&rescaled, params)?;
    let metrics = compare_profiles(&a, &b, (1.0, r_hi))?;
    Ok(CrossSolverResult {
        c_star,
        c_from_shooting,
        c_from_picard,
        implied_slope: rescaled.implied_slope(params)?,
        metrics,
    })
}

fn label(p: &ModelParams) -> String {
    match p.nonlinearity.is_constant() {
        Some(k) => format!("n={} k={} eps={}", p.n, k, p.eps),
        None => format!("n={} f=table eps={}", p.n, p.eps),
    }
}

/// Range of `σ = εr` used for the pairwise comparison in ε.
pub const SIGMA_WINDOW: (f64, f64) = (0.1, 10.0);

/// The first integral is checked on `r ∈ [1, DRIFT_WINDOW/ε]`; further out
/// `u'` falls below the integrator's absolute tolerance.
pub const DRIFT_WINDOW: f64 = 10.0;

/// Relative offsets of the `c`-grid around `c*`.
pub const C_GRID: [f64; 5] = [0.9, 0.95, 1.0, 1.05, 1.1];

fn single(params: &ModelParams, cfg: &ShootingConfig, prof: &SolutionProfile, c: f64) -> Vec<Check> {
    let name = label(params);
    let mut out = Vec::new();
    let decreasing = prof.u.windows(2).filter(|w| w[1] < w[0]).count();
    out.push(Check::within(
        format!("{name}: u nondecreasing (violations)"),
        decreasing as f64,
        0.0,
        0.0,
    ));
    let min_du = prof.du.iter().copied().fold(f64::INFINITY, f64::min);
    out.push(Check::exceeds(format!("{name}: min u' > 0"), min_du, 0.0));
    let bound = (2.0 * c / params.eps).sqrt();
    let max_u = prof.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    out.push(Check::at_most(format!("{name}: u <= sqrt(2c/eps)"), max_u, bound));
    let r_end = prof.r_max().min(DRIFT_WINDOW / params.eps);
    match first_integral_drift(params, c, r_end, cfg.ivp_tol) {
        Ok(d) => out.push(Check::at_most(
            format!("{name}: first-integral drift <= 10 tol"),
            d,
            10.0 * cfg.ivp_tol,
        )),
        Err(_) => out.push(Check::failed(format!("{name}: first-integral drift"))),
    }
    let u_inf: Result<Vec<f64>> = C_GRID
        .iter()
        .map(|s| shoot_once(params, s * c, cfg).map(|p| p.u_inf))
        .collect();
    match u_inf {
        Ok(v) => {
            let gap = v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            out.push(Check::exceeds(
                format!("{name}: u_inf increasing in c (min gap)"),
                gap,
                0.0,
            ));
        }
        Err(_) => out.push(Check::failed(format!("{name}: u_inf increasing in c"))),
    }
    out
}

fn pairwise(small: (&ModelParams, &SolutionProfile), large: (&ModelParams, &SolutionProfile)) -> Check {
    let name = format!(
        "u(sigma; eps={}) > u(sigma; eps={}) on sigma in [{}, {}]",
        small.0.eps, large.0.eps, SIGMA_WINDOW.0, SIGMA_WINDOW.1
    );
    let a = SampledProfile::shooting_in_rho(small.1, small.0.eps);
    let b = SampledProfile::shooting_in_rho(large.1, large.0.eps);
    let lo = SIGMA_WINDOW.0.max(large.0.eps).max(small.0.eps);
    let hi = SIGMA_WINDOW.1.min(a.domain().1).min(b.domain().1);
    let (ia, ib) = match (a.interpolant(), b.interpolant()) {
        (Ok(ia), Ok(ib)) if lo < hi => (ia, ib),
        _ => return Check::failed(name),
    };
    let mut xs = vec![lo];
    xs.extend(a.x.iter().copied().filter(|&x| x > lo && x < hi));
    xs.extend(b.x.iter().copied().filter(|&x| x > lo && x < hi));
    xs.push(hi);
    let gap = xs
        .iter()
        .map(|&s| ia.eval(s) - ib.eval(s))
        .fold(f64::INFINITY, f64::min);
    Check::exceeds(name, gap, 0.0)
}

/// Qualitative properties of each solution (monotonicity, the a-priori
/// bound, conservation of the first integral, monotone dependence on `c`)
/// and the pairwise comparison in ε for parameter sets that differ only in
/// ε.
pub fn monotonicity_suite(params_list: &[ModelParams], cfg: &ShootingConfig) -> Report {
    let mut report = Report::new(
        serde_json::to_value(params_list).unwrap_or_default(),
        serde_json::to_value(cfg).unwrap_or_default(),
    );
    let solved: Vec<Result<(f64, SolutionProfile)>> = params_list.par_iter().map(|p| shoot(p, cfg)).collect();
    let singles: Vec<Vec<Check>> = params_list
        .par_iter()
        .zip(&solved)
        .map(|(p, s)| match s {
            Ok((c, prof)) => single(p, cfg, prof, *c),
            Err(_) => vec![Check::failed(format!("{}: shooting", label(p)))],
        })
        .collect();
    for checks in singles {
        for c in checks {
            report.push(c);
        }
    }
    for i in 0..params_list.len() {
        for j in 0..params_list.len() {
            let (pi, pj) = (&params_list[i], &params_list[j]);
            if pi.n != pj.n || pi.nonlinearity != pj.nonlinearity || !(pi.eps < pj.eps) {
                continue;
            }
            if let (Ok((_, a)), Ok((_, b))) = (&solved[i], &solved[j]) {
                report.push(pairwise((pi, a), (pj, b)));
            }
        }
    }
    report
}
