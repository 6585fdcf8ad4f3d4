//! Closed-form expansions for the three covered cases: `C(ε)`, the inner
//! expansion in `r` and the outer expansion in `ρ = εr`.
//!
//! Orders above the displayed depth of each expansion are accepted and capped
//! rather than extrapolated.

use std::collections::HashMap;
use std::f64::consts::{E, LN_2};
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{exp_integral, quad_with, QuadOptions, EULER_GAMMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    /// `n = 2`, `k = 0`.
    N2K0,
    /// `n = 3`, `k = 0`.
    N3K0,
    /// `n = 2`, `k = 1`.
    N2K1,
}

impl CaseId {
    pub const ALL: [CaseId; 3] = [CaseId::N2K0, CaseId::N3K0, CaseId::N2K1];

    pub fn from_nk(n: u32, k: u32) -> Result<Self> {
        match (n, k) {
            (2, 0) => Ok(CaseId::N2K0),
            (3, 0) => Ok(CaseId::N3K0),
            (2, 1) => Ok(CaseId::N2K1),
            _ => Err(Error::Unsupported(format!(
                "no closed-form expansion for (n, k) = ({n}, {k})"
            ))),
        }
    }

    /// Match real-valued parameters against the covered cases.
    pub fn from_params(n: f64, k: f64) -> Option<Self> {
        if n.fract() != 0.0 || k.fract() != 0.0 || !(1.0..=3.0).contains(&n) || !(0.0..=1.0).contains(&k) {
            return None;
        }
        Self::from_nk(n as u32, k as u32).ok()
    }

    pub fn n(self) -> u32 {
        match self {
            CaseId::N3K0 => 3,
            _ => 2,
        }
    }

    pub fn k(self) -> u32 {
        match self {
            CaseId::N2K1 => 1,
            _ => 0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CaseId::N2K0 => "2,0",
            CaseId::N3K0 => "3,0",
            CaseId::N2K1 => "2,1",
        }
    }
}

impl std::str::FromStr for CaseId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::Domain(format!("case must be written n,k; got {s:?}")));
        }
        let parse = |p: &str| {
            p.parse::<u32>()
                .map_err(|_| Error::Domain(format!("case must be written n,k; got {s:?}")))
        };
        CaseId::from_nk(parse(parts[0])?, parse(parts[1])?)
    }
}

impl std::fmt::Display for CaseId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// `1/λ, 1/λ², 1/λ³` with `λ = ln(1/ε)`.
    InverseLog,
    /// `1, ε ln ε, ε`.
    EpsilonLog,
}

impl Basis {
    pub fn functions(self, eps: f64) -> [f64; 3] {
        match self {
            Basis::InverseLog => {
                let lam = -eps.ln();
                [1.0 / lam, 1.0 / (lam * lam), 1.0 / (lam * lam * lam)]
            }
            Basis::EpsilonLog => [1.0, eps * eps.ln(), eps],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoefficients {
    pub basis: Basis,
    pub coefficients: [f64; 3],
}

impl ExpansionCoefficients {
    /// Coefficient of the second basis function (`A` for the `n = 2` cases).
    pub fn a(&self) -> f64 {
        self.coefficients[1]
    }

    /// Coefficient of the third basis function (`B` for the `n = 2` cases).
    pub fn b(&self) -> f64 {
        self.coefficients[2]
    }
}

/// `A` for `(2, 1)`: `(e − 1)(γe + e − 1)/e`.
pub fn a21() -> f64 {
    (E - 1.0) * (EULER_GAMMA * E + E - 1.0) / E
}

/// Left side of the linear relation defining `B` for `(2, 1)`; zero at the
/// true `B`.
pub fn b21_relation(b: f64) -> f64 {
    let a = a21();
    let em1 = E - 1.0;
    b - a * EULER_GAMMA + em1 * em1 / E * (EULER_GAMMA + 2.0 * LN_2) - 2.0 * a * em1 / E
        + em1.powi(3) / (2.0 * E * E) * (3.0 - 4.0 * LN_2)
}

pub fn coefficients(case: CaseId) -> ExpansionCoefficients {
    let g = EULER_GAMMA;
    match case {
        CaseId::N2K0 => ExpansionCoefficients {
            basis: Basis::InverseLog,
            coefficients: [1.0, g + 1.0, g * g + 2.0 * g + 0.5 - LN_2],
        },
        CaseId::N3K0 => ExpansionCoefficients {
            basis: Basis::EpsilonLog,
            coefficients: [1.0, -2.0, -(2.0 * g + 1.0)],
        },
        CaseId::N2K1 => {
            let b = -b21_relation(0.0);
            ExpansionCoefficients {
                basis: Basis::InverseLog,
                coefficients: [E - 1.0, a21(), b],
            }
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.2 {
        Ok(())
    } else {
        Err(Error::Domain(format!("eps must lie in (0, 0.2), got {eps}")))
    }
}

fn check_order(order: usize) -> Result<()> {
    if order >= 1 {
        Ok(())
    } else {
        Err(Error::Domain("expansion order must be >= 1".into()))
    }
}

/// Truncated `C(ε)` series with `order ∈ 1..=3` terms.
pub fn c_asym(case: CaseId, eps: f64, order: usize) -> Result<f64> {
    check_eps(eps)?;
    if !(1..=3).contains(&order) {
        return Err(Error::Domain(format!("C-series order must be 1..=3, got {order}")));
    }
    let co = coefficients(case);
    let basis = co.basis.functions(eps);
    Ok((0..order).map(|j| co.coefficients[j] * basis[j]).sum())
}

/// Deepest order displayed for the inner expansion of each case.
pub fn inner_depth(case: CaseId) -> usize {
    match case {
        CaseId::N3K0 => 3,
        _ => 2,
    }
}

/// Inner expansion (fixed `r`).
pub fn inner_u(case: CaseId, eps: f64, r: f64, order: usize) -> Result<f64> {
    check_eps(eps)?;
    check_order(order)?;
    if !(r >= 1.0) {
        return Err(Error::Domain(format!("inner expansion needs r >= 1, got {r}")));
    }
    let order = order.min(inner_depth(case));
    let lam = -eps.ln();
    let lr = r.ln();
    Ok(match case {
        CaseId::N2K0 => {
            let mut u = lr / lam;
            if order >= 2 {
                u += EULER_GAMMA * lr / (lam * lam);
            }
            u
        }
        CaseId::N3K0 => {
            let base = 1.0 - 1.0 / r;
            let mut u = base;
            if order >= 2 {
                u -= eps * eps.ln() * base;
            }
            if order >= 3 {
                u += -eps * (lr + lr / r) + eps * (1.0 - EULER_GAMMA) * base;
            }
            u
        }
        CaseId::N2K1 => {
            let mut arg = 1.0 + (E - 1.0) * lr / lam;
            if order >= 2 {
                arg += EULER_GAMMA * (E - 1.0) * lr / (lam * lam);
            }
            arg.ln()
        }
    })
}

/// `∫_ρ^∞ E₂(τ)² dτ`, computed by quadrature and memoised per `ρ`.
pub fn integral_e2_squared(rho: f64) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&rho.to_bits()) {
        return Ok(*v);
    }
    let mut failure = None;
    let r = quad_with(
        |t| match exp_integral(2.0, t) {
            Ok(e) => e * e,
            Err(err) => {
                failure.get_or_insert(err);
                f64::NAN
            }
        },
        rho,
        f64::INFINITY,
        QuadOptions::relative(1e-12),
    );
    if let Some(err) = failure {
        return Err(err);
    }
    let v = r?.value;
    cache.lock().unwrap().insert(rho.to_bits(), v);
    Ok(v)
}

/// Coefficient of the `1/l` correction in the leading bracket of the
/// `(2, 1)` outer expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OuterCorrection {
    /// `γ + 1 − 1/e`.
    Corrected,
    /// `γ − 1 + 1/e`, the variant with the algebraic slip.
    Alternate,
}

impl OuterCorrection {
    pub fn kappa(self) -> f64 {
        match self {
            OuterCorrection::Corrected => EULER_GAMMA + 1.0 - 1.0 / E,
            OuterCorrection::Alternate => EULER_GAMMA - 1.0 + 1.0 / E,
        }
    }
}

/// Two-term `(2, 1)` outer expansion with an arbitrary correction
/// coefficient `kappa` in the leading bracket.
pub fn outer_u21_with_kappa(eps: f64, rho: f64, kappa: f64) -> Result<f64> {
    check_eps(eps)?;
    let l = -eps.ln();
    let e1 = exp_integral(1.0, rho)?;
    let e1_2 = exp_integral(1.0, 2.0 * rho)?;
    let em1 = E - 1.0;
    Ok(
        1.0 - em1 / E * (1.0 + kappa / l) * e1 / l + em1 * em1 / (E * E) * (2.0 * e1_2 - (-rho).exp() * e1) / (l * l)
            - em1 * em1 / (2.0 * E * E) * e1 * e1 / (l * l),
    )
}

pub fn outer_depth(_case: CaseId) -> usize {
    2
}

/// Outer expansion (fixed `ρ`).
pub fn outer_u(case: CaseId, eps: f64, rho: f64, order: usize) -> Result<f64> {
    check_eps(eps)?;
    check_order(order)?;
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("outer expansion needs rho > 0, got {rho}")));
    }
    let order = order.min(outer_depth(case));
    let lam = -eps.ln();
    match case {
        CaseId::N2K0 => {
            let e1 = exp_integral(1.0, rho)?;
            if order == 1 {
                return Ok(1.0 - e1 / lam);
            }
            let e1_2 = exp_integral(1.0, 2.0 * rho)?;
            Ok(1.0 - e1 * (1.0 / lam + (EULER_GAMMA + 1.0) / (lam * lam))
                + (2.0 * e1_2 - (-rho).exp() * e1) / (lam * lam))
        }
        CaseId::N3K0 => {
            let e2 = exp_integral(2.0, rho)?;
            if order == 1 {
                return Ok(1.0 - eps * e2);
            }
            let e1 = exp_integral(1.0, rho)?;
            let c = c_asym(case, eps, 3)?;
            let bracket = e1 * e2 - rho * e2 * e2 - integral_e2_squared(rho)?;
            Ok(1.0 - eps * c * e2 + eps * eps * bracket)
        }
        CaseId::N2K1 => {
            if order == 1 {
                Ok(1.0 - (E - 1.0) / E * exp_integral(1.0, rho)? / lam)
            } else {
                outer_u21_with_kappa(eps, rho, OuterCorrection::Corrected.kappa())
            }
        }
    }
}
