//! Cross-validation harness: named checks collected into reports, profile
//! comparison, empirical orders, and coefficient fits.

mod fit;
mod identities;
mod suites;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integral_eq::RescaledProfile;
use crate::interp::MonotoneCubic;
use crate::model::ModelParams;
use crate::ode_shoot::SolutionProfile;

pub use fit::{coefficient_fit, correction_adjudication, CoefficientFit, CorrectionAdjudication};
pub use identities::identity_suite;
pub use suites::{cross_solver, monotonicity_suite, CrossSolverResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|measured − reference| ≤ tolerance`.
    Within,
    /// `measured ≤ reference + tolerance`.
    AtMost,
    /// `measured > reference`.
    Exceeds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, reference: f64, tolerance: f64, relation: Relation) -> Self {
        let passed = match relation {
            Relation::Within => (measured - reference).abs() <= tolerance,
            Relation::AtMost => measured <= reference + tolerance,
            Relation::Exceeds => measured > reference,
        };
        Self {
            name: name.into(),
            measured,
            reference,
            tolerance,
            relation,
            passed,
        }
    }

    pub fn within(name: impl Into<String>, measured: f64, reference: f64, tolerance: f64) -> Self {
        Self::new(name, measured, reference, tolerance, Relation::Within)
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, bound, 0.0, Relation::AtMost)
    }

    pub fn exceeds(name: impl Into<String>, measured: f64, reference: f64) -> Self {
        Self::new(name, measured, reference, 0.0, Relation::Exceeds)
    }

    /// A check that could not be evaluated.
    pub fn failed(name: impl Into<String>) -> Self {
        Self::within(name, f64::NAN, 0.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metadata {
    pub params: serde_json::Value,
    pub config: serde_json::Value,
    /// Taken from `SOURCE_DATE_EPOCH` when set, so reports stay reproducible.
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
    pub metadata: Metadata,
}

impl Report {
    pub fn new(params: serde_json::Value, config: serde_json::Value) -> Self {
        Self {
            checks: Vec::new(),
            metadata: Metadata {
                params,
                config,
                timestamp: std::env::var("SOURCE_DATE_EPOCH").ok(),
            },
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["name", "measured", "reference", "tolerance", "relation", "passed"])?;
        for c in &self.checks {
            let relation = match c.relation {
                Relation::Within => "within",
                Relation::AtMost => "at_most",
                Relation::Exceeds => "exceeds",
            };
            out.write_record([
                c.name.clone(),
                format!("{:.16e}", c.measured),
                format!("{:.16e}", c.reference),
                format!("{:.16e}", c.tolerance),
                relation.to_string(),
                c.passed.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub sup_norm: f64,
    pub l2_norm: f64,
    pub location_of_max: f64,
}

/// A monotone profile sampled on an increasing grid, with optional exact
/// slopes for Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dy: Option<Vec<f64>>,
}

impl SampledProfile {
    pub fn from_shooting(p: &SolutionProfile) -> Self {
        Self {
            x: p.r_grid.clone(),
            y: p.u.clone(),
            dy: Some(p.du.clone()),
        }
    }

    /// The profile `u(r)`, `r = ρ/ε`.
    pub fn from_rescaled(p: &RescaledProfile, params: &ModelParams) -> Result<Self> {
        let eps = params.eps;
        let du = p.du_drho(params)?;
        Ok(Self {
            x: p.rho_grid.iter().map(|&r| r / eps).collect(),
            y: p.u_values(params),
            dy: Some(du.iter().map(|d| d * eps).collect()),
        })
    }

    /// The shooting profile as a function of `ρ = εr`.
    pub fn shooting_in_rho(p: &SolutionProfile, eps: f64) -> Self {
        Self {
            x: p.r_grid.iter().map(|&r| r * eps).collect(),
            y: p.u.clone(),
            dy: Some(p.du.iter().map(|d| d / eps).collect()),
        }
    }

    pub fn interpolant(&self) -> Result<MonotoneCubic> {
        MonotoneCubic::new(&self.x, &self.y, self.dy.as_deref())
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }
}

fn covers(p: &SampledProfile, lo: f64, hi: f64) -> bool {
    let (a, b) = p.domain();
    let slack = 1e-12 * hi.abs().max(1.0);
    a <= lo + slack && b >= hi - slack
}

/// Difference norms of `a − b` over `[lo, hi]`, evaluated at `a`'s grid
/// points (and the interval ends) with `b` interpolated.
pub fn compare_profiles(a: &SampledProfile, b: &SampledProfile, domain: (f64, f64)) -> Result<ErrorMetrics> {
    let (lo, hi) = domain;
    if !(lo < hi) || !covers(a, lo, hi) || !covers(b, lo, hi) {
        return Err(Error::Domain(format!(
            "profiles do not both cover [{lo}, {hi}] (a on {:?}, b on {:?})",
            a.domain(),
            b.domain()
        )));
    }
    let ia = a.interpolant()?;
    let ib = b.interpolant()?;
    let mut xs = vec![lo];
    xs.extend(a.x.iter().copied().filter(|&x| x > lo && x < hi));
    xs.push(hi);
    let diffs: Vec<f64> = xs.iter().map(|&x| ia.eval(x) - ib.eval(x)).collect();
    let mut sup = 0.0;
    let mut loc = lo;
    for (&x, &d) in xs.iter().zip(&diffs) {
        if d.abs() > sup {
            sup = d.abs();
            loc = x;
        }
    }
    let mut l2 = 0.0;
    for i in 1..xs.len() {
        l2 += 0.5 * (xs[i] - xs[i - 1]) * (diffs[i] * diffs[i] + diffs[i - 1] * diffs[i - 1]);
    }
    Ok(ErrorMetrics {
        sup_norm: sup,
        l2_norm: l2.sqrt(),
        location_of_max: loc,
    })
}

/// Least-squares slope of `ln err` against `ln h`.
pub fn order_estimate(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 samples, got {}", samples.len())));
    }
    if samples.windows(2).any(|w| !(w[1].0 < w[0].0)) {
        return Err(Error::Fit("h must be strictly decreasing".into()));
    }
    if samples
        .iter()
        .any(|&(h, e)| !(h > 0.0 && e > 0.0 && h.is_finite() && e.is_finite()))
    {
        return Err(Error::Fit("h and err must be positive and finite".into()));
    }
    let m = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(a: f64, b: f64) -> SampledProfile {
        let x: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        SampledProfile {
            y: x.iter().map(|t| a * t + b).collect(),
            dy: Some(vec![a; x.len()]),
            x,
        }
    }

    #[test]
    fn check_relations() {
        assert!(Check::within("a", 1.0, 1.0 + 1e-9, 1e-8).passed);
        assert!(!Check::within("a", f64::NAN, 0.0, 1.0).passed);
        assert!(Check::at_most("b", 1.0, 1.0).passed);
        assert!(!Check::exceeds("c", 1.0, 1.0).passed);
        assert!(Check::exceeds("c", 1.0 + 1e-15, 1.0).passed);
    }

    #[test]
    fn self_comparison_is_zero() {
        let p = line(0.1, 0.0);
        let m = compare_profiles(&p, &p, (0.0, 10.0)).unwrap();
        assert_eq!(m.sup_norm, 0.0);
        assert_eq!(m.l2_norm, 0.0);
    }

    #[test]
    fn shifted_profiles() {
        let m = compare_profiles(&line(0.1, 0.5), &line(0.1, 0.0), (1.0, 5.0)).unwrap();
        assert!((m.sup_norm - 0.5).abs() < 1e-15);
        assert!((m.l2_norm - 0.5 * 2.0).abs() < 1e-12);
        assert!(m.l2_norm <= m.sup_norm * 4.0f64.sqrt() + 1e-15);
        assert!(compare_profiles(&line(0.1, 0.0), &line(0.1, 0.0), (1.0, 20.0)).is_err());
    }

    #[test]
    fn order_of_quadratic() {
        let s = order_estimate(&[(1.0, 1.0), (0.5, 0.25), (0.25, 0.0625)]).unwrap();
        assert!((s - 2.0).abs() < 1e-14);
        assert!(order_estimate(&[(1.0, 1.0), (0.5, 0.25)]).is_err());
        assert!(order_estimate(&[(1.0, 1.0), (1.0, 0.25), (0.5, 0.1)]).is_err());
    }

    #[test]
    fn report_serialisation_is_stable() {
        let mut r = Report::new(serde_json::json!({"n": 3}), serde_json::Value::Null);
        r.push(Check::within("x", 0.1, 0.1, 1e-12));
        let mut a = Vec::new();
        let mut b = Vec::new();
        r.write_csv(&mut a).unwrap();
        r.write_csv(&mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("name,measured,reference,tolerance,relation,passed\n"));
        assert!(text.contains("1.0000000000000001e-1"));
        let mut j = Vec::new();
        r.write_json(&mut j).unwrap();
        let back: Report = serde_json::from_slice(&j).unwrap();
        assert_eq!(back, r);
    }
}
