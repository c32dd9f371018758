// `!(x > 0.0)` style checks are there to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decomp;
pub mod error;
pub mod graph;
pub mod lower;
pub mod metric;
pub mod numerics;
pub mod seed;
pub mod stable;

pub use error::{Error, Result};
