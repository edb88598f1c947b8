//! Radial solver and numerical checks for closed-shell extended Kohn-Sham
//! models with LDA and GGA exchange-correlation functionals.

// `!(x > 0.0)` is how range checks here also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod hypothesis;
pub mod pair;
pub mod radial;
pub mod scf;
pub mod xc;

pub use error::{Error, Result};

/// Crate version, embedded in output documents.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
