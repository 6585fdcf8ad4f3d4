use std::f64::consts::LN_2;

use super::{Check, Report};
use crate::error::{Error, Result};
use crate::specfun::{exp_integral, integral_of_e, quad_with, QuadOptions, EULER_GAMMA};

fn quad(f: impl FnMut(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    Ok(quad_with(f, a, b, QuadOptions::relative(1e-13))?.value)
}

/// Quadrature of an integrand that may fail; the first failure wins.
fn quad_fallible(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let mut failure: Option<Error> = None;
    let v = quad(
        |t| match f(t) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
    );
    match failure {
        Some(e) => Err(e),
        None => v,
    }
}

fn scaled(tol: f64, reference: f64) -> f64 {
    tol * reference.abs().max(1.0)
}

fn push(report: &mut Report, name: String, measured: Result<f64>, reference: Result<f64>, tol: f64) {
    match (measured, reference) {
        (Ok(m), Ok(r)) => report.push(Check::within(name, m, r, scaled(tol, r))),
        _ => report.push(Check::failed(name)),
    }
}

/// Closed-form identities of the exponential-integral family, each checked
/// against independent quadrature.
pub fn identity_suite(tol: f64) -> Report {
    let mut report = Report::new(serde_json::Value::Null, serde_json::json!({ "tol": tol }));
    if !(tol > 0.0) {
        report.push(Check::failed(format!("tolerance must be positive, got {tol}")));
        return report;
    }
    for &q in &[1.0, 2.0, 2.5] {
        for &rho in &[0.01, 0.1, 1.0, 3.0, 10.0] {
            push(
                &mut report,
                format!("int_E{q}(rho={rho}) = E{}(rho) - rho*E{q}(rho)", q - 1.0),
                integral_of_e(q, rho),
                quad_fallible(|t| exp_integral(q, t), rho, f64::INFINITY),
                tol,
            );
        }
    }
    for &rho in &[0.01, 0.1, 1.0, 3.0, 10.0] {
        push(
            &mut report,
            format!("E2(rho={rho}) = exp(-rho)/rho - E1(rho)"),
            exp_integral(1.0, rho).map(|e1| (-rho).exp() / rho - e1),
            quad(|t| (-t).exp() / (t * t), rho, f64::INFINITY),
            tol,
        );
    }
    for &rho in &[0.05, 0.5, 2.0] {
        // Both levels by quadrature so the check does not lean on the
        // closed form of the inner integral.
        let inner = |t: f64| quad_fallible(|s| exp_integral(1.0, s), t, f64::INFINITY);
        let nested = quad_fallible(|t| Ok((-t).exp() / t * inner(t)?), rho, f64::INFINITY);
        push(
            &mut report,
            format!("second Picard term n=2 (rho={rho}) = 2E1(2rho) - exp(-rho)E1(rho)"),
            nested,
            exp_integral(1.0, 2.0 * rho).and_then(|a| Ok(2.0 * a - (-rho).exp() * exp_integral(1.0, rho)?)),
            tol,
        );
    }
    push(
        &mut report,
        "int_0^inf exp(-s)E1(s) = ln 2".into(),
        quad_fallible(|s| Ok((-s).exp() * exp_integral(1.0, s)?), 0.0, f64::INFINITY),
        Ok(LN_2),
        tol,
    );
    push(
        &mut report,
        "int_0^inf E1(2s) = 1/2".into(),
        quad_fallible(|s| exp_integral(1.0, 2.0 * s), 0.0, f64::INFINITY),
        Ok(0.5),
        tol,
    );
    push(
        &mut report,
        "int_0^inf E1(s)^2 = 2 ln 2".into(),
        quad_fallible(|s| exp_integral(1.0, s).map(|e| e * e), 0.0, f64::INFINITY),
        Ok(2.0 * LN_2),
        tol,
    );
    push(
        &mut report,
        "-int_0^inf exp(-t) ln t = gamma".into(),
        quad(|t| -(-t).exp() * t.ln(), 0.0, f64::INFINITY),
        Ok(EULER_GAMMA),
        tol,
    );
    report
}
