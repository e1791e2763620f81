//! Exact enumeration of geometric equivalence classes of excellent Morse
//! functions on the two-sphere.
//!
//! The count `g(n)` of classes with `2n + 2` critical points is produced by a
//! two-parameter rational recurrence ([`recurrence`]), cross-checked against a
//! brute-force enumeration of Morse trees ([`trees`]), and fed into the
//! generating-function and asymptotic checks in [`series`] and [`analysis`].

pub mod analysis;
pub mod cli;
pub mod error;
pub mod exactmath;
pub mod recurrence;
pub mod series;
pub mod trees;

pub use error::{Error, Result};
pub use exactmath::{BigInt, BigRational, HighPrecisionReal};
pub use recurrence::HTable;
