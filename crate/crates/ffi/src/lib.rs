//! C ABI over the `lagerstrom` solvers.
//!
//! Every fallible function returns an [`LgStatus`]. On failure the message is
//! kept in thread-local storage and can be read with [`lg_last_error_message`].
//! Objects crossing the boundary are opaque handles that must be released with
//! the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lagerstrom::asymptotics::{c_asym, CaseId};
use lagerstrom::integral_eq::{solve_c, PicardConfig, RescaledProfile};
use lagerstrom::model::GeneralF;
use lagerstrom::ode_shoot::{extract_c, shoot, ShootingConfig, SolutionProfile};
use lagerstrom::specfun::{exp_integral, integral_of_e};
use lagerstrom::{Error, ModelParams, Nonlinearity};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LgStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Unsupported = 3,
    Accuracy = 4,
    Integration = 5,
    Bracket = 6,
    Resolution = 7,
    NonConvergence = 8,
    Precondition = 9,
    Fit = 10,
    Io = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

/// Columns of a shooting profile.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LgShootColumn {
    R = 0,
    U = 1,
    DuDr = 2,
    W = 3,
}

/// Columns of an integral-equation profile.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LgRescaledColumn {
    Rho = 0,
    U = 1,
    /// The raw iterate (`u − 1` or `G(u) − G(1)`).
    Iterate = 2,
}

pub struct LgModel {
    params: ModelParams,
}

pub struct LgShootProfile {
    params: ModelParams,
    c_star: f64,
    inner: SolutionProfile,
}

pub struct LgRescaledProfile {
    u: Vec<f64>,
    inner: RescaledProfile,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LgStatus {
    match e {
        Error::Domain(_) => LgStatus::Domain,
        Error::Unsupported(_) => LgStatus::Unsupported,
        Error::Accuracy { .. } => LgStatus::Accuracy,
        Error::Integration(_) => LgStatus::Integration,
        Error::Bracket(_) => LgStatus::Bracket,
        Error::Resolution { .. } => LgStatus::Resolution,
        Error::NonConvergence { .. } => LgStatus::NonConvergence,
        Error::Precondition(_) => LgStatus::Precondition,
        Error::Fit(_) => LgStatus::Fit,
        Error::Io(_) => LgStatus::Io,
    }
}

enum Failure {
    Status(LgStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null(name: &str) -> Failure {
    Failure::Status(LgStatus::NullPointer, format!("{name} is null"))
}

/// Run `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> LgStatus {
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let (status, msg) = match outcome {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            return LgStatus::Ok;
        }
        Ok(Err(Failure::Core(e))) => (status_of(&e), e.to_string()),
        Ok(Err(Failure::Status(s, m))) => (s, m),
        Err(_) => (LgStatus::Panic, "internal panic".to_string()),
    };
    set_last_error(msg);
    status
}

unsafe fn write_out<T>(out: *mut T, name: &str, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn copy_into(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < src.len() {
        return Err(Failure::Status(
            LgStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Message for the last failed call on this thread, or null if it succeeded.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn lg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `E_q(ρ) = ∫_ρ^∞ τ^{−q} e^{−τ} dτ`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_exp_integral(q: f64, rho: f64, out: *mut f64) -> LgStatus {
    guard(|| write_out(out, "out", exp_integral(q, rho)?))
}

/// `∫_ρ^∞ E_q(τ) dτ`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_integral_of_e(q: f64, rho: f64, out: *mut f64) -> LgStatus {
    guard(|| write_out(out, "out", integral_of_e(q, rho)?))
}

/// Truncated small-ε series for C in one of the cases (2,0), (3,0), (2,1).
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_c_asym(n: u32, k: u32, eps: f64, order: usize, out: *mut f64) -> LgStatus {
    guard(|| write_out(out, "out", c_asym(CaseId::from_nk(n, k)?, eps, order)?))
}

/// Model with `f(u) = k`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_model_new_constant_k(n: f64, k: f64, eps: f64, out: *mut *mut LgModel) -> LgStatus {
    guard(|| {
        let params = ModelParams::constant_k(n, k, eps)?;
        write_out(out, "out", Box::into_raw(Box::new(LgModel { params })))
    })
}

/// Model with `f` tabulated at `len` increasing points `u` spanning `[0, 1]`.
///
/// # Safety
/// `u` and `f` must each point to `len` readable values; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_model_new_table(
    n: f64,
    eps: f64,
    u: *const f64,
    f: *const f64,
    len: usize,
    out: *mut *mut LgModel,
) -> LgStatus {
    guard(|| {
        if u.is_null() || f.is_null() {
            return Err(null("table"));
        }
        let table = GeneralF::from_samples(std::slice::from_raw_parts(u, len), std::slice::from_raw_parts(f, len))?;
        let params = ModelParams::new(n, eps, Nonlinearity::GeneralF(table))?;
        write_out(out, "out", Box::into_raw(Box::new(LgModel { params })))
    })
}

/// # Safety
/// `model` must be null or a handle from `lg_model_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lg_model_free(model: *mut LgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Shoot for `c*` with `|u(∞) − 1| ≤ tol` and return the profile.
///
/// # Safety
/// `model` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_shoot(model: *const LgModel, tol: f64, out: *mut *mut LgShootProfile) -> LgStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let cfg = ShootingConfig {
            root_tol: tol,
            ivp_tol: (tol * 1e-2).min(1e-10),
            ..ShootingConfig::default()
        };
        let (c_star, inner) = shoot(&model.params, &cfg)?;
        let handle = LgShootProfile {
            params: model.params.clone(),
            c_star,
            inner,
        };
        write_out(out, "out", Box::into_raw(Box::new(handle)))
    })
}

/// # Safety
/// `profile` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_shoot_c_star(profile: *const LgShootProfile, out: *mut f64) -> LgStatus {
    guard(|| {
        let p = profile.as_ref().ok_or_else(|| null("profile"))?;
        write_out(out, "out", p.c_star)
    })
}

/// Rescaled constant C implied by the shooting solution.
///
/// # Safety
/// `profile` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_shoot_big_c(profile: *const LgShootProfile, out: *mut f64) -> LgStatus {
    guard(|| {
        let p = profile.as_ref().ok_or_else(|| null("profile"))?;
        write_out(out, "out", extract_c(p.c_star, &p.inner, &p.params)?)
    })
}

/// Number of samples in the profile; 0 for a null handle.
///
/// # Safety
/// `profile` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lg_shoot_len(profile: *const LgShootProfile) -> usize {
    profile.as_ref().map_or(0, |p| p.inner.len())
}

/// Copy one column into `buf`, which must hold at least `lg_shoot_len` values.
///
/// # Safety
/// `profile` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn lg_shoot_column(
    profile: *const LgShootProfile,
    column: LgShootColumn,
    buf: *mut f64,
    len: usize,
) -> LgStatus {
    guard(|| {
        let p = profile.as_ref().ok_or_else(|| null("profile"))?;
        let src = match column {
            LgShootColumn::R => &p.inner.r_grid,
            LgShootColumn::U => &p.inner.u,
            LgShootColumn::DuDr => &p.inner.du,
            LgShootColumn::W => &p.inner.w,
        };
        copy_into(src, buf, len)
    })
}

/// # Safety
/// `profile` must be null or a live handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lg_shoot_free(profile: *mut LgShootProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Solve the integral equation for C (n ≥ 2). `out_profile` may be null.
///
/// # Safety
/// `model` must be a live handle; `out_c` must be valid for writes;
/// `out_profile` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lg_solve_c(
    model: *const LgModel,
    out_c: *mut f64,
    out_profile: *mut *mut LgRescaledProfile,
) -> LgStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if out_c.is_null() {
            return Err(null("out_c"));
        }
        let (big_c, inner, _) = solve_c(&model.params, &PicardConfig::default())?;
        out_c.write(big_c);
        if !out_profile.is_null() {
            let u = inner.u_values(&model.params);
            out_profile.write(Box::into_raw(Box::new(LgRescaledProfile { u, inner })));
        }
        Ok(())
    })
}

/// Number of grid points; 0 for a null handle.
///
/// # Safety
/// `profile` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lg_rescaled_len(profile: *const LgRescaledProfile) -> usize {
    profile.as_ref().map_or(0, |p| p.inner.rho_grid.len())
}

/// # Safety
/// `profile` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn lg_rescaled_column(
    profile: *const LgRescaledProfile,
    column: LgRescaledColumn,
    buf: *mut f64,
    len: usize,
) -> LgStatus {
    guard(|| {
        let p = profile.as_ref().ok_or_else(|| null("profile"))?;
        let src = match column {
            LgRescaledColumn::Rho => &p.inner.rho_grid,
            LgRescaledColumn::U => &p.u,
            LgRescaledColumn::Iterate => &p.inner.v,
        };
        copy_into(src, buf, len)
    })
}

/// # Safety
/// `profile` must be null or a live handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lg_rescaled_free(profile: *mut LgRescaledProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}
