//! Numerical toolkit for weighted composition operators `W = T_ψ C_φ` on the
//! Hardy space H².

// NaN must fail every `!(x > 0.0)` style guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod hardy;
pub mod linalg;
pub mod normality;
pub mod quadrature;
pub mod reproduce;
pub mod spectra;
pub mod symbol;

pub use error::{Error, Result};
pub use symbol::{MobiusMap, Symbol};
