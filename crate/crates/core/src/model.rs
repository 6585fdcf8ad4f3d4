//! Problem instances: the exponent `n`, the perturbation `ε` and the
//! nonlinearity `f`, together with its primitives
//! `F(u) = ∫₀^u f` and `G(u) = ∫₀^u e^{F}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tabulated positive nonlinearity on `[0, 1]`, piecewise linear between
/// samples and extended by its end values outside the interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FTable", into = "FTable")]
pub struct GeneralF {
    u: Vec<f64>,
    f: Vec<f64>,
    big_f: Vec<f64>,
    big_g: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FTable {
    u: Vec<f64>,
    f: Vec<f64>,
}

impl TryFrom<FTable> for GeneralF {
    type Error = Error;
    fn try_from(t: FTable) -> Result<Self> {
        GeneralF::from_samples(&t.u, &t.f)
    }
}

impl From<GeneralF> for FTable {
    fn from(g: GeneralF) -> Self {
        FTable { u: g.u, f: g.f }
    }
}

impl GeneralF {
    /// Build from samples `(u_i, f(u_i))` with `u` strictly increasing from 0
    /// to 1 and every `f` positive.
    pub fn from_samples(u: &[f64], f: &[f64]) -> Result<Self> {
        if u.len() < 2 || u.len() != f.len() {
            return Err(Error::Domain("f table needs at least two (u, f) rows".into()));
        }
        if u[0] != 0.0 || *u.last().unwrap() != 1.0 {
            return Err(Error::Domain("f table must span u = 0 to u = 1 exactly".into()));
        }
        if u.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("f table abscissae must be strictly increasing".into()));
        }
        if let Some(bad) = f.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Domain(format!("f must be positive on [0, 1], found {bad}")));
        }
        let mut g = Self {
            u: u.to_vec(),
            f: f.to_vec(),
            big_f: Vec::new(),
            big_g: Vec::new(),
        };
        g.tabulate();
        Ok(g)
    }

    /// Sample a closure on a uniform grid of `samples` points.
    pub fn from_fn(f: impl Fn(f64) -> f64, samples: usize) -> Result<Self> {
        let m = samples.max(2);
        let u: Vec<f64> = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();
        let fv: Vec<f64> = u.iter().map(|&x| f(x)).collect();
        Self::from_samples(&u, &fv)
    }

    fn tabulate(&mut self) {
        let m = self.u.len();
        self.big_f = vec![0.0; m];
        self.big_g = vec![0.0; m];
        for i in 1..m {
            let h = self.u[i] - self.u[i - 1];
            self.big_f[i] = self.big_f[i - 1] + 0.5 * h * (self.f[i] + self.f[i - 1]);
        }
        for i in 1..m {
            let (a, b) = (self.u[i - 1], self.u[i]);
            self.big_g[i] = self.big_g[i - 1] + gl_cell(|s| self.big_f_unchecked(s).exp(), a, b);
        }
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.u, &self.f)
    }

    fn cell(&self, u: f64) -> usize {
        let m = self.u.len();
        (self.u.partition_point(|&v| v <= u).max(1) - 1).min(m - 2)
    }

    pub fn f(&self, u: f64) -> f64 {
        let m = self.u.len();
        if u <= 0.0 {
            return self.f[0];
        }
        if u >= 1.0 {
            return self.f[m - 1];
        }
        let i = self.cell(u);
        let t = (u - self.u[i]) / (self.u[i + 1] - self.u[i]);
        self.f[i] + t * (self.f[i + 1] - self.f[i])
    }

    fn big_f_unchecked(&self, u: f64) -> f64 {
        let m = self.u.len();
        if u <= 0.0 {
            return self.f[0] * u;
        }
        if u >= 1.0 {
            return self.big_f[m - 1] + self.f[m - 1] * (u - 1.0);
        }
        let i = self.cell(u);
        let d = u - self.u[i];
        let slope = (self.f[i + 1] - self.f[i]) / (self.u[i + 1] - self.u[i]);
        self.big_f[i] + d * (self.f[i] + 0.5 * slope * d)
    }

    pub fn big_f(&self, u: f64) -> f64 {
        self.big_f_unchecked(u)
    }

    pub fn big_g(&self, u: f64) -> f64 {
        let m = self.u.len();
        let (i, base) = if u <= 0.0 {
            return (self.f[0] * u).exp_m1() / self.f[0];
        } else if u >= 1.0 {
            let f1 = self.f[m - 1];
            let e1 = self.big_f[m - 1].exp();
            return self.big_g[m - 1] + e1 * (f1 * (u - 1.0)).exp_m1() / f1;
        } else {
            let i = self.cell(u);
            (i, self.big_g[i])
        };
        base + gl_cell(|s| self.big_f_unchecked(s).exp(), self.u[i], u)
    }
}

/// Fixed 8-point Gauss–Legendre on a single cell; `e^{F}` is smooth within a
/// table cell, so this is accurate to rounding.
fn gl_cell(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    let mut s = 0.0;
    for (x, w) in X.iter().zip(W.iter()) {
        s += w * (f(m - h * x) + f(m + h * x));
    }
    s * h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    ConstantK { k: f64 },
    GeneralF(GeneralF),
}

impl Nonlinearity {
    pub fn f(&self, u: f64) -> f64 {
        match self {
            Nonlinearity::ConstantK { k } => *k,
            Nonlinearity::GeneralF(g) => g.f(u),
        }
    }

    /// `F(u) = ∫₀^u f`.
    pub fn big_f(&self, u: f64) -> f64 {
        match self {
            Nonlinearity::ConstantK { k } => k * u,
            Nonlinearity::GeneralF(g) => g.big_f(u),
        }
    }

    /// `G(u) = ∫₀^u e^{F}`.
    pub fn big_g(&self, u: f64) -> f64 {
        match self {
            Nonlinearity::ConstantK { k } if *k == 0.0 => u,
            Nonlinearity::ConstantK { k } => (k * u).exp_m1() / k,
            Nonlinearity::GeneralF(g) => g.big_g(u),
        }
    }

    /// `G(u) − G(1)` computed without cancellation for constant `k`.
    pub fn g_shifted(&self, u: f64) -> f64 {
        match self {
            Nonlinearity::ConstantK { k } if *k == 0.0 => u - 1.0,
            Nonlinearity::ConstantK { k } => k.exp() * (k * (u - 1.0)).exp_m1() / k,
            Nonlinearity::GeneralF(g) => g.big_g(u) - g.big_g(1.0),
        }
    }

    /// Inverse of [`Self::g_shifted`].
    pub fn u_from_shifted(&self, y: f64) -> f64 {
        match self {
            Nonlinearity::ConstantK { k } if *k == 0.0 => 1.0 + y,
            Nonlinearity::ConstantK { k } => 1.0 + (k * y * (-k).exp()).ln_1p() / k,
            Nonlinearity::GeneralF(_) => {
                // Newton; G is strictly increasing with G' = e^F.
                let mut u = 1.0 + y * (-self.big_f(1.0)).exp();
                for _ in 0..60 {
                    let r = self.g_shifted(u) - y;
                    let step = r / self.big_f(u).exp();
                    u -= step;
                    if step.abs() <= 1e-15 * (1.0 + u.abs()) {
                        break;
                    }
                }
                u
            }
        }
    }

    pub fn is_constant(&self) -> Option<f64> {
        match self {
            Nonlinearity::ConstantK { k } => Some(*k),
            Nonlinearity::GeneralF(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: f64,
    pub eps: f64,
    pub nonlinearity: Nonlinearity,
}

impl ModelParams {
    pub fn new(n: f64, eps: f64, nonlinearity: Nonlinearity) -> Result<Self> {
        let p = Self { n, eps, nonlinearity };
        p.validate()?;
        Ok(p)
    }

    pub fn constant_k(n: f64, k: f64, eps: f64) -> Result<Self> {
        Self::new(n, eps, Nonlinearity::ConstantK { k })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n.is_finite() && self.n >= 1.0) {
            return Err(Error::Domain(format!("n must be >= 1, got {}", self.n)));
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::Domain(format!("eps must be > 0, got {}", self.eps)));
        }
        match &self.nonlinearity {
            Nonlinearity::ConstantK { k } if !(k.is_finite() && *k >= 0.0) => {
                Err(Error::Domain(format!("k must be >= 0, got {k}")))
            }
            Nonlinearity::GeneralF(g) => {
                for i in 0..=256 {
                    let v = g.f(i as f64 / 256.0);
                    if !(v > 0.0) {
                        return Err(Error::Domain(format!("f must be positive on [0, 1], got {v}")));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::quad_adaptive;

    #[test]
    fn constant_k_primitives() {
        let nl = Nonlinearity::ConstantK { k: 1.0 };
        let e = std::f64::consts::E;
        assert!((nl.big_g(1.0) - (e - 1.0)).abs() < 1e-15);
        assert!((nl.g_shifted(0.0) - (1.0 - e)).abs() < 1e-15);
        for &u in &[0.0, 0.3, 0.9, 1.0, 1.1] {
            assert!((nl.u_from_shifted(nl.g_shifted(u)) - u).abs() < 1e-14);
        }
        let zero = Nonlinearity::ConstantK { k: 0.0 };
        assert_eq!(zero.g_shifted(0.25), -0.75);
        assert_eq!(zero.u_from_shifted(-0.75), 0.25);
    }

    #[test]
    fn general_f_matches_constant_one() {
        let g = GeneralF::from_fn(|_| 1.0, 11).unwrap();
        let nl = Nonlinearity::GeneralF(g);
        let k1 = Nonlinearity::ConstantK { k: 1.0 };
        for &u in &[0.0, 0.05, 0.5, 0.77, 1.0, 1.2] {
            assert!((nl.big_f(u) - k1.big_f(u)).abs() < 1e-14);
            assert!((nl.big_g(u) - k1.big_g(u)).abs() < 1e-13, "{u}");
            assert!((nl.u_from_shifted(nl.g_shifted(u)) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn general_f_linear_table_is_exact() {
        // f(u) = 1 + u is linear, so F(u) = u + u²/2 exactly.
        let g = GeneralF::from_fn(|u| 1.0 + u, 5).unwrap();
        for &u in &[0.1, 0.4, 0.95] {
            assert!((g.big_f(u) - (u + 0.5 * u * u)).abs() < 1e-15);
            let oracle = quad_adaptive(|s: f64| (s + 0.5 * s * s).exp(), 0.0, u, 1e-14).unwrap();
            assert!((g.big_g(u) - oracle.value).abs() < 1e-13);
        }
    }

    #[test]
    fn general_f_serde_round_trip() {
        let g = GeneralF::from_fn(|u| 2.0 - u, 9).unwrap();
        let p = ModelParams::new(2.0, 0.1, Nonlinearity::GeneralF(g)).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let back: ModelParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn invalid_params() {
        assert!(ModelParams::constant_k(0.5, 0.0, 0.1).is_err());
        assert!(ModelParams::constant_k(2.0, 0.0, 0.0).is_err());
        assert!(ModelParams::constant_k(2.0, -1.0, 0.1).is_err());
        assert!(GeneralF::from_samples(&[0.0, 1.0], &[1.0, -0.1]).is_err());
        assert!(GeneralF::from_samples(&[0.0, 0.9], &[1.0, 1.0]).is_err());
    }
}
