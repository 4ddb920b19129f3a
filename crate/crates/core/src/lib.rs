// `!(x > y)` is used on purpose throughout so that NaN fails the guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod expansion;
pub mod field;
pub mod gl;
pub mod grid;
pub mod hamilton;
pub mod io;
pub mod linalg;
pub mod ode;
pub mod oracle;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
