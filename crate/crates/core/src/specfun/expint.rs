//! Exponential integrals in the normalization `E_q(ρ) = ∫_ρ^∞ τ^{−q} e^{−τ} dτ`
//! (so `E_q(ρ) = Γ(1 − q, ρ)`), together with the incomplete gamma function
//! they reduce to for non-integer `q`.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_431;

/// Constant in the remainder contract of [`small_rho_expansion`]:
/// `|expansion − E_q(ρ)| ≤ K ρ² |ln ρ|` for `0 < ρ ≤ 0.1`.
pub const SMALL_RHO_REMAINDER_K: f64 = 1.0;

/// Seam between the power series and the continued fraction.
const SERIES_SEAM: f64 = 1.0;

const MAX_Q: f64 = 10.0;
const MAX_ABS_A: f64 = 10.0;

pub fn euler_gamma() -> f64 {
    EULER_GAMMA
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "argument must be positive and finite, got {rho}"
        )))
    }
}

fn check_q(q: f64) -> Result<()> {
    if (0.0..=MAX_Q).contains(&q) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("order q = {q} outside [0, {MAX_Q}]")))
    }
}

/// `E_q(ρ) = ∫_ρ^∞ τ^{−q} e^{−τ} dτ` for `q ∈ [0, 10]`, `ρ > 0`.
pub fn exp_integral(q: f64, rho: f64) -> Result<f64> {
    check_q(q)?;
    check_rho(rho)?;
    if q == 0.0 {
        return Ok((-rho).exp());
    }
    if q.fract() == 0.0 {
        let n = q as u32;
        if rho <= SERIES_SEAM {
            Ok(integer_order_upward(n, rho))
        } else {
            Ok((-rho).exp() * gamma_cf_scaled(1.0 - q, rho))
        }
    } else {
        upper_incomplete_gamma(1.0 - q, rho)
    }
}

/// `e^ρ E_q(ρ)`; stays finite where `E_q` itself underflows.
pub fn exp_integral_scaled(q: f64, rho: f64) -> Result<f64> {
    check_q(q)?;
    check_rho(rho)?;
    if rho > SERIES_SEAM {
        if q == 0.0 {
            Ok(1.0)
        } else {
            Ok(gamma_cf_scaled(1.0 - q, rho))
        }
    } else {
        Ok(rho.exp() * exp_integral(q, rho)?)
    }
}

/// E₁ by its convergent power series; intended for `ρ ≤ 1`.
fn e1_series(rho: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -rho / kf;
        let contrib = -term / kf;
        sum += contrib;
        if contrib.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - rho.ln() + sum
}

/// Upward recurrence `E_{k+1} = (ρ^{−k} e^{−ρ} − E_k)/k` from E₁.
/// Stable for `ρ ≤ 1`, where the first term dominates.
fn integer_order_upward(n: u32, rho: f64) -> f64 {
    let mut e = e1_series(rho);
    let decay = (-rho).exp();
    for k in 1..n {
        let kf = k as f64;
        e = (decay * rho.powi(-(k as i32)) - e) / kf;
    }
    e
}

/// Continued fraction for `e^x Γ(a, x)` (modified Lentz); converges for
/// `x ≥ 1` and `a ≤ 1`, which is the only regime it is called in.
fn gamma_cf_scaled(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..5000 {
        let fi = i as f64;
        let an = -fi * (fi - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    x.powf(a) * h
}

/// `∫_x^1 t^{a−1} e^{−t} dt` for `0 < x < 1` by termwise integration of the
/// exponential series. Each term `(1 − x^s)/s` is evaluated with `expm1`, so
/// `s` near zero costs no precision.
fn lower_strip(a: f64, x: f64) -> f64 {
    let lx = x.ln();
    let mut fact = 1.0;
    let mut sum = 0.0;
    for k in 0..400 {
        if k > 0 {
            fact *= -1.0 / k as f64;
        }
        let s = a + k as f64;
        let strip = if s == 0.0 { -lx } else { -(s * lx).exp_m1() / s };
        let term = fact * strip;
        sum += term;
        if s > 0.0 && term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Upper incomplete gamma `Γ(a, x) = ∫_x^∞ t^{a−1} e^{−t} dt`, `|a| ≤ 10`, `x > 0`.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    check_rho(x)?;
    if !(a.abs() <= MAX_ABS_A) {
        return Err(Error::Unsupported(format!(
            "incomplete gamma parameter a = {a} outside [-{MAX_ABS_A}, {MAX_ABS_A}]"
        )));
    }
    Ok((-x).exp() * incomplete_gamma_scaled(a, x))
}

/// `e^x Γ(a, x)`.
pub(crate) fn incomplete_gamma_scaled(a: f64, x: f64) -> f64 {
    if a > 1.0 {
        // Γ(a+1, x) = a Γ(a, x) + x^a e^{−x}: all terms positive.
        let steps = (a - 1.0).ceil() as u32;
        let mut s = a - steps as f64;
        let mut value = incomplete_gamma_scaled(s, x);
        for _ in 0..steps {
            value = s * value + x.powf(s);
            s += 1.0;
        }
        return value;
    }
    if x >= SERIES_SEAM {
        gamma_cf_scaled(a, x)
    } else {
        x.exp() * ((-1.0f64).exp() * gamma_cf_scaled(a, 1.0) + lower_strip(a, x))
    }
}

/// Truncated small-ρ expansions: `q = 1` gives `−ln ρ − γ + ρ`;
/// `q = 2` gives `1/ρ + ln ρ + (γ − 1) − ρ/2`.
pub fn small_rho_expansion(q: u32, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= 0.1) {
        return Err(Error::Domain(format!(
            "small-argument expansion needs 0 < rho <= 0.1, got {rho}"
        )));
    }
    match q {
        1 => Ok(-rho.ln() - EULER_GAMMA + rho),
        2 => Ok(1.0 / rho + rho.ln() + (EULER_GAMMA - 1.0) - 0.5 * rho),
        _ => Err(Error::Unsupported(format!(
            "small-argument expansion only for q in {{1, 2}}, got {q}"
        ))),
    }
}

/// `∫_ρ^∞ E_q(τ) dτ = E_{q−1}(ρ) − ρ E_q(ρ)` for `q ≥ 1`.
pub fn integral_of_e(q: f64, rho: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Unsupported(format!("integral of E_q needs q >= 1, got {q}")));
    }
    Ok(exp_integral(q - 1.0, rho)? - rho * exp_integral(q, rho)?)
}

/// `e^ρ ∫_ρ^∞ E_q(τ) dτ`; stays finite where the unscaled value underflows.
pub fn integral_of_e_scaled(q: f64, rho: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Unsupported(format!("integral of E_q needs q >= 1, got {q}")));
    }
    Ok(exp_integral_scaled(q - 1.0, rho)? - rho * exp_integral_scaled(q, rho)?)
}

/// Envelope `min(ρ^{1−q}, ρ^{−q} e^{−ρ})` such that `E_q(ρ) ≤ K · envelope`
/// for `q > 1` with a `q`-dependent constant `K`.
pub fn exp_integral_envelope(q: f64, rho: f64) -> f64 {
    rho.powf(1.0 - q).min(rho.powf(-q) * (-rho).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::quad::{quad_with, QuadOptions};

    fn oracle(q: f64, rho: f64) -> f64 {
        quad_with(
            |t: f64| t.powf(-q) * (-t).exp(),
            rho,
            f64::INFINITY,
            QuadOptions::relative(1e-14),
        )
        .unwrap()
        .value
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn q0_is_exponential() {
        assert!(rel(exp_integral(0.0, 1.5).unwrap(), 0.223_130_160_148_429_83) < 1e-15);
    }

    #[test]
    fn reference_values() {
        // Values from an independent 30-digit evaluation of Γ(1−q, ρ).
        assert!(rel(exp_integral(1.0, 1.0).unwrap(), 0.219_383_934_395_520_27) < 1e-14);
        assert!(rel(exp_integral(2.0, 1.0).unwrap(), 0.148_495_506_775_922_05) < 1e-14);
        assert!(rel(exp_integral(3.0, 5.0).unwrap(), 3.511_203_571_082_553e-5) < 1e-13);
        assert!(rel(exp_integral(2.5, 1e-6).unwrap(), 666_664_669.028_938_5) < 1e-13);
        assert!(rel(exp_integral(1.0, 20.0).unwrap(), 9.835_525_290_649_882e-11) < 1e-13);
    }

    #[test]
    fn matches_quadrature_oracle_across_seam() {
        for &q in &[1.0, 2.0, 3.0, 2.5, 0.5, 7.0, 9.75] {
            for &rho in &[1e-3, 0.3, 0.999_999, 1.0, 1.000_001, 2.0, 10.0, 45.0] {
                let v = exp_integral(q, rho).unwrap();
                let o = oracle(q, rho);
                assert!(rel(v, o) < 1e-11, "q={q} rho={rho}: {v} vs {o}");
            }
        }
    }

    #[test]
    fn e2_closed_form_at_one() {
        let e1 = exp_integral(1.0, 1.0).unwrap();
        assert!(rel(exp_integral(2.0, 1.0).unwrap(), (-1.0f64).exp() - e1) < 1e-14);
    }

    #[test]
    fn incomplete_gamma_values() {
        assert!(rel(upper_incomplete_gamma(1.0, 2.0).unwrap(), (-2.0f64).exp()) < 1e-15);
        assert!(rel(upper_incomplete_gamma(0.5, 1.0).unwrap(), 0.278_805_585_280_661_98) < 1e-14);
        assert!(rel(upper_incomplete_gamma(-0.5, 1.0).unwrap(), 0.178_147_711_781_560_7) < 1e-14);
        // Γ(a+1,x) = aΓ(a,x) + x^a e^{-x}
        let g = upper_incomplete_gamma(-0.5, 1.0).unwrap();
        let up = -0.5 * g + (-1.0f64).exp();
        assert!(rel(up, upper_incomplete_gamma(0.5, 1.0).unwrap()) < 1e-14);
        // a = 10 and x < 1 exercises the upward recurrence.
        let big = upper_incomplete_gamma(10.0, 0.5).unwrap();
        let o = quad_with(
            |t: f64| t.powi(9) * (-t).exp(),
            0.5,
            f64::INFINITY,
            QuadOptions::relative(1e-14),
        )
        .unwrap()
        .value;
        assert!(rel(big, o) < 1e-12);
    }

    #[test]
    fn near_integer_order_keeps_precision() {
        let q = 1.0 + 1e-9;
        let a = exp_integral(q, 0.2).unwrap();
        let b = exp_integral(1.0, 0.2).unwrap();
        // dE_q/dq = -∫ ln τ τ^{-q} e^{-τ}, which is O(1) here.
        assert!((a - b).abs() < 1e-8, "{a} {b}");
        assert!(rel(a, oracle(q, 0.2)) < 1e-11);
    }

    #[test]
    fn small_rho_expansion_values_and_remainder() {
        let v = small_rho_expansion(1, 1e-6).unwrap();
        assert!((v - 13.238_295_893_062_74).abs() < 1e-12);
        let v = small_rho_expansion(2, 0.01).unwrap();
        assert!((v - 94.967_045_478_913_44).abs() < 1e-10);
        for q in [1u32, 2] {
            for &rho in &[1e-6, 1e-4, 0.01, 0.05, 0.1] {
                let exact = exp_integral(q as f64, rho).unwrap();
                let approx = small_rho_expansion(q, rho).unwrap();
                assert!(
                    (exact - approx).abs() <= SMALL_RHO_REMAINDER_K * rho * rho * rho.ln().abs(),
                    "q={q} rho={rho}"
                );
            }
        }
    }

    #[test]
    fn small_rho_expansion_rejects_bad_input() {
        assert!(matches!(small_rho_expansion(1, 0.2), Err(Error::Domain(_))));
        assert!(matches!(small_rho_expansion(1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(small_rho_expansion(3, 0.01), Err(Error::Unsupported(_))));
    }

    #[test]
    fn domain_and_range_errors() {
        assert!(matches!(exp_integral(1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(exp_integral(1.0, -2.0), Err(Error::Domain(_))));
        assert!(matches!(exp_integral(10.5, 1.0), Err(Error::Unsupported(_))));
        assert!(matches!(exp_integral(-0.5, 1.0), Err(Error::Unsupported(_))));
        assert!(matches!(upper_incomplete_gamma(0.5, 0.0), Err(Error::Domain(_))));
        assert!(matches!(upper_incomplete_gamma(11.0, 1.0), Err(Error::Unsupported(_))));
        assert!(matches!(integral_of_e(0.5, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn integral_of_e_values() {
        let e1 = exp_integral(1.0, 1.0).unwrap();
        assert!(rel(integral_of_e(1.0, 1.0).unwrap(), (-1.0f64).exp() - e1) < 1e-14);
        assert!((integral_of_e(1.0, 1e-12).unwrap() - 1.0).abs() < 1e-10);
        let v = integral_of_e(2.0, 0.5).unwrap();
        assert!(rel(v, 0.233_129_732_451_607_79) < 1e-13);
    }

    #[test]
    fn scaled_matches_unscaled() {
        for &q in &[0.0, 1.0, 2.0, 2.5] {
            for &rho in &[0.01, 1.0, 3.0, 30.0] {
                let s = exp_integral_scaled(q, rho).unwrap();
                let e = exp_integral(q, rho).unwrap();
                assert!(rel(s * (-rho).exp(), e) < 1e-13);
            }
        }
        // Finite even where E_q underflows.
        assert!(exp_integral_scaled(1.0, 800.0).unwrap() > 0.0);
    }

    #[test]
    fn euler_gamma_against_defining_integral() {
        let v = quad_with(
            |t: f64| (-t).exp() * t.ln(),
            0.0,
            f64::INFINITY,
            QuadOptions {
                abs_tol: 1e-15,
                rel_tol: 1e-15,
                max_panels: 10_000,
            },
        )
        .unwrap()
        .value;
        assert!((euler_gamma() + v).abs() < 1e-14, "{}", euler_gamma() + v);
    }

    #[test]
    fn euler_gamma_consistency_with_e1() {
        let rho = 1e-8;
        let r = exp_integral(1.0, rho).unwrap() + rho.ln() + euler_gamma();
        assert!(r.abs() <= 1e-7);
    }

    #[test]
    fn envelope_bound_has_moderate_constant() {
        // K = sup E_q / envelope on a wide log grid; the small-ρ limit is 1/(q−1).
        for &q in &[2.0, 3.0, 2.5] {
            let mut k_fit: f64 = 0.0;
            for i in 0..=200 {
                let rho = 10f64.powf(-6.0 + 8.0 * i as f64 / 200.0);
                let ratio = exp_integral(q, rho).unwrap() / exp_integral_envelope(q, rho);
                k_fit = k_fit.max(ratio);
            }
            assert!(k_fit <= 2.0 / (q - 1.0) + 1.0, "q={q} K={k_fit}");
        }
    }
}
