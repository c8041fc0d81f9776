//! Probabilistic value-deviation-bounded (VDB) code tables.
//!
//! A VDB code bounds the integer deviation `|u(x) - u(x')|` between a
//! transmitted word and what arrives, rather than the number of flipped
//! bits. This crate computes which error placements can produce each
//! deviation, how many word pairs realize it, the largest per-bit error
//! probabilities a channel may have while keeping the deviation
//! distribution under an application-supplied bound, and checks the
//! result by exact enumeration and seeded Monte Carlo simulation.

pub mod channel;
pub mod codegen;
pub mod combinatorics;
pub mod error;
pub mod setgen;
pub mod word;

pub use error::{Result, VdbError};
