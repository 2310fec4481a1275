//! Exact bit-reversal conjugate of the Collatz `3x+1` map on the unit
//! interval, its `qx+1` cousins, and the tools used to examine them.

pub mod analysis;
pub mod cli;
pub mod coding;
pub mod collatz;
pub mod conjugate;
pub mod dyadic;
pub mod error;
pub mod intervals;

pub use coding::{decode_h, encode_h};
pub use dyadic::{exact_quotient, Dyadic, ExactRatio};
pub use error::{Error, Result};
