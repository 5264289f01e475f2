//! Outage, precoding and coded-error simulation for finite-alphabet MIMO
//! block-fading channels.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corrupt;
pub mod detection;
pub mod error;
pub mod harness;
pub mod information;
pub mod ldpc;
pub mod linalg;
pub mod modulation;
pub mod precoding;
pub mod randmat;
pub mod rng;
pub mod stats;
pub mod toy;

pub use error::{Error, Result};
