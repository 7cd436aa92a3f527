#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bump;
pub mod convergence;
pub mod error;
pub mod field2d;
pub mod identities;
pub mod multiplicity;
pub mod radial;
pub mod stationarity;

pub use error::{Error, Result};
