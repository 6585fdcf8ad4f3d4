#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod integral_eq;
pub mod interp;
pub mod model;
pub mod ode_shoot;
pub mod rk;
pub mod roots;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
pub use model::{GeneralF, ModelParams, Nonlinearity};
