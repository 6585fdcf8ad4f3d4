use std::f64::consts::E;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::SampledProfile;
use crate::asymptotics::{coefficients, outer_u21_with_kappa, Basis, CaseId, OuterCorrection};
use crate::error::{Error, Result};
use crate::integral_eq::{solve_c, PicardConfig};
use crate::model::ModelParams;
use crate::specfun::exp_integral;

/// Column-scaled condition numbers above this are rejected.
pub const MAX_CONDITION: f64 = 1e10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFit {
    pub case: CaseId,
    pub basis: Basis,
    pub coefficients: [f64; 3],
    /// Published values, for comparison.
    pub expected: [f64; 3],
    /// Condition number of the column-scaled design matrix.
    pub condition: f64,
    pub residual_norm: f64,
}

/// Least-squares fit of the case's three-function `C(ε)` basis to numerical
/// values of `C`.
pub fn coefficient_fit(case: CaseId, eps_list: &[f64], c_numeric: &[f64]) -> Result<CoefficientFit> {
    if eps_list.len() != c_numeric.len() {
        return Err(Error::Fit("eps and C lists differ in length".into()));
    }
    if eps_list.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 eps values, got {}",
            eps_list.len()
        )));
    }
    if eps_list.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::Fit("eps values must lie in (0, 1)".into()));
    }
    let lo = eps_list.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eps_list.iter().copied().fold(0.0, f64::max);
    if hi / lo < 10.0 - 1e-9 {
        return Err(Error::Fit(format!("eps values span less than a decade ({lo}..{hi})")));
    }
    let expected = coefficients(case);
    let basis = expected.basis;
    let m = eps_list.len();
    let mut a = DMatrix::zeros(m, 3);
    for (i, &e) in eps_list.iter().enumerate() {
        let row = basis.functions(e);
        for j in 0..3 {
            a[(i, j)] = row[j];
        }
    }
    let scales: Vec<f64> = (0..3).map(|j| a.column(j).norm()).collect();
    let mut scaled = a.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    let b = DVector::from_column_slice(c_numeric);
    let svd = scaled.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Fit(format!(
            "ill-conditioned fit (condition number {condition:.3e})"
        )));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Fit(format!("least-squares solve failed: {e}")))?;
    let coefficients = [x[0] / scales[0], x[1] / scales[1], x[2] / scales[2]];
    let residual_norm = (&scaled * &x - &b).norm();
    Ok(CoefficientFit {
        case,
        basis,
        coefficients,
        expected: expected.coefficients,
        condition,
        residual_norm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionAdjudication {
    pub eps: Vec<f64>,
    /// Sup-norm error of the corrected outer expansion, per ε.
    pub sup_corrected: Vec<f64>,
    /// Sup-norm error of the variant with the slip, per ε.
    pub sup_alternate: Vec<f64>,
    /// Least-squares estimate of the correction coefficient from all ε.
    pub fitted_kappa: f64,
    pub kappa_std_error: f64,
    pub kappa_corrected: f64,
    pub kappa_alternate: f64,
}

impl CorrectionAdjudication {
    /// `sup_alternate / sup_corrected` per ε.
    pub fn ratios(&self) -> Vec<f64> {
        self.sup_alternate
            .iter()
            .zip(&self.sup_corrected)
            .map(|(h, c)| h / c)
            .collect()
    }

    /// True when the fitted coefficient is closer to the corrected value by
    /// more than its standard error.
    pub fn fit_selects_corrected(&self) -> bool {
        (self.fitted_kappa - self.kappa_alternate).abs() - (self.fitted_kappa - self.kappa_corrected).abs()
            > self.kappa_std_error
    }
}

/// Compare both variants of the `(2, 1)` outer expansion against the
/// integral-equation solution on `ρ ∈ window`, and fit the correction
/// coefficient directly.
pub fn correction_adjudication(
    eps_list: &[f64],
    window: (f64, f64),
    cfg: &PicardConfig,
) -> Result<CorrectionAdjudication> {
    let kc = OuterCorrection::Corrected.kappa();
    let kh = OuterCorrection::Alternate.kappa();
    let mut sup_c = Vec::new();
    let mut sup_h = Vec::new();
    let (mut num, mut den) = (0.0, 0.0);
    let mut samples = Vec::new();
    for &eps in eps_list {
        let params = ModelParams::constant_k(2.0, 1.0, eps)?;
        let (_, prof, _) = solve_c(&params, cfg)?;
        let u = prof.u_values(&params);
        let p = SampledProfile {
            x: prof.rho_grid.clone(),
            y: u,
            dy: Some(prof.du_drho(&params)?),
        };
        let interp = p.interpolant()?;
        let mut rhos = vec![window.0];
        rhos.extend(prof.rho_grid.iter().copied().filter(|&r| r > window.0 && r < window.1));
        rhos.push(window.1);
        let l = -eps.ln();
        let (mut sc, mut sh) = (0.0f64, 0.0f64);
        for &rho in &rhos {
            let un = interp.eval(rho);
            sc = sc.max((un - outer_u21_with_kappa(eps, rho, kc)?).abs());
            sh = sh.max((un - outer_u21_with_kappa(eps, rho, kh)?).abs());
            // u = base − α κ with α = (e−1)/e · E₁(ρ)/l².
            let alpha = (E - 1.0) / E * exp_integral(1.0, rho)? / (l * l);
            let resid = outer_u21_with_kappa(eps, rho, 0.0)? - un;
            num += alpha * resid;
            den += alpha * alpha;
            samples.push((alpha, resid));
        }
        sup_c.push(sc);
        sup_h.push(sh);
    }
    let kappa = num / den;
    let rss: f64 = samples.iter().map(|(a, r)| (r - a * kappa).powi(2)).sum();
    let dof = (samples.len() as f64 - 1.0).max(1.0);
    let se = (rss / dof / den).sqrt();
    Ok(CorrectionAdjudication {
        eps: eps_list.to_vec(),
        sup_corrected: sup_c,
        sup_alternate: sup_h,
        fitted_kappa: kappa,
        kappa_std_error: se,
        kappa_corrected: kc,
        kappa_alternate: kh,
    })
}
