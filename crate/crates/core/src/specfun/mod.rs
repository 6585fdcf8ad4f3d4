//! Exponential-integral family, incomplete gamma, γ, and the adaptive
//! quadrature used as an independent oracle throughout the crate.

mod expint;
pub mod quad;

pub use expint::{
    euler_gamma, exp_integral, exp_integral_envelope, exp_integral_scaled, integral_of_e, integral_of_e_scaled,
    small_rho_expansion, upper_incomplete_gamma, EULER_GAMMA, SMALL_RHO_REMAINDER_K,
};
pub use quad::{quad_adaptive, quad_with, QuadOptions, QuadratureResult};
