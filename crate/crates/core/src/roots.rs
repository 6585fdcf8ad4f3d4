//! Bracketing scalar root finder: bisection while the bracket is wide,
//! Illinois-style secant once it is narrow.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Stop once `|f(x)| <= f_tol`.
    pub f_tol: f64,
    /// Switch from bisection to secant when `width < switch_rel * |x|`.
    pub switch_rel: f64,
    /// Stop when the bracket width falls below `x_rel * |x|`.
    pub x_rel: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            f_tol: 1e-12,
            switch_rel: 1e-3,
            x_rel: 4.0 * f64::EPSILON,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub lo: f64,
    pub f_lo: f64,
    pub hi: f64,
    pub f_hi: f64,
}

/// Expand a bracket geometrically around `x0 > 0` for an increasing
/// function `f`: `lo` is divided and `hi` multiplied by `factor` until the
/// sign changes.
pub fn expand_bracket_increasing<F>(mut f: F, x0: f64, factor: f64, max_expansions: usize) -> Result<Bracket>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f0 = f(x0)?;
    if f0 == 0.0 {
        return Ok(Bracket {
            lo: x0,
            f_lo: f0,
            hi: x0,
            f_hi: f0,
        });
    }
    let (mut lo, mut f_lo, mut hi, mut f_hi) = (x0, f0, x0, f0);
    for _ in 0..max_expansions {
        if f_lo < 0.0 && f_hi > 0.0 {
            return Ok(Bracket { lo, f_lo, hi, f_hi });
        }
        if f_lo >= 0.0 {
            hi = lo;
            f_hi = f_lo;
            lo /= factor;
            f_lo = f(lo)?;
        } else {
            lo = hi;
            f_lo = f_hi;
            hi *= factor;
            f_hi = f(hi)?;
        }
        if f_lo == 0.0 {
            return Ok(Bracket {
                lo,
                f_lo,
                hi: lo,
                f_hi: f_lo,
            });
        }
        if f_hi == 0.0 {
            return Ok(Bracket {
                lo: hi,
                f_lo: f_hi,
                hi,
                f_hi,
            });
        }
    }
    if f_lo < 0.0 && f_hi > 0.0 {
        return Ok(Bracket { lo, f_lo, hi, f_hi });
    }
    Err(Error::Bracket(format!(
        "no sign change found in [{lo:e}, {hi:e}] after {max_expansions} expansions"
    )))
}

/// Solve `f(x) = 0` on a bracket with `f(lo) <= 0 <= f(hi)` or the reverse.
/// An exact zero at a probe is accepted immediately.
pub fn solve_bracketed<F>(mut f: F, bracket: Bracket, opts: RootOptions) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let Bracket {
        mut lo,
        mut f_lo,
        mut hi,
        mut f_hi,
    } = bracket;
    if f_lo == 0.0 {
        return Ok((lo, f_lo));
    }
    if f_hi == 0.0 {
        return Ok((hi, f_hi));
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket(format!(
            "f has the same sign at both ends of [{lo:e}, {hi:e}]"
        )));
    }
    // Illinois bookkeeping: which side was retained last.
    let mut side = 0i8;
    let mut best = if f_lo.abs() < f_hi.abs() {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    };
    for _ in 0..opts.max_iter {
        let width = (hi - lo).abs();
        let scale = lo.abs().max(hi.abs());
        if width <= opts.x_rel * scale {
            return Ok(best);
        }
        let x = if width > opts.switch_rel * scale {
            0.5 * (lo + hi)
        } else {
            let s = hi - f_hi * (hi - lo) / (f_hi - f_lo);
            if s > lo.min(hi) && s < lo.max(hi) {
                s
            } else {
                0.5 * (lo + hi)
            }
        };
        let fx = f(x)?;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 || fx.abs() <= opts.f_tol {
            return Ok((x, fx));
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual: best.1.abs(),
    })
}
