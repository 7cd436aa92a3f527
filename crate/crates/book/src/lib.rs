//! The chapters of `book/` compiled as doc tests, so `cargo test` keeps
//! every snippet in the guide honest.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/radial.md")]
pub mod radial {}
#[doc = include_str!("../../../book/src/fields.md")]
pub mod fields {}
#[doc = include_str!("../../../book/src/stationarity.md")]
pub mod stationarity {}
#[doc = include_str!("../../../book/src/multiplicity.md")]
pub mod multiplicity {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
