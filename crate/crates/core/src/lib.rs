#![no_std]
// `!(x > 0.0)` style checks are written to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod array;
pub mod error;
pub mod experiments;
pub mod gsc;
pub mod linalg;
pub mod metrics;
pub mod polyideal;
pub mod restriction;
pub mod sdp;
pub mod subspace;

pub use error::{Error, Result};
