// `!(x > y)` is used on purpose so NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod error;
pub mod genint;
pub mod linop;
pub mod pertdet;
pub mod quad;
pub mod random;
pub mod rational;
pub mod repr;
pub mod traceform;

pub use error::{Error, Result};
