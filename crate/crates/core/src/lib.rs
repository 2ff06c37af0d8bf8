//! Diffusion adaptation over networks whose agents observe one of two
//! models, with neighbor classification and quorum-response agreement.

// `!(x > 0.0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classification;
pub mod decision;
pub mod diffusion;
mod error;
pub mod harness;
pub mod linalg;
pub mod markov;
pub mod mobility;
pub mod network;

pub use error::{Error, Result};
