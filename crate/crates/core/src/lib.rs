//! Placement delivery arrays (PDAs), combinational PDAs for `(h, r)`
//! combination networks, and a bit-exact simulator of the resulting
//! coded caching schemes.
//!
//! The crate is organized bottom-up:
//!
//! * [`pda`] holds the array types, the PDA / C-PDA checkers and column deletion.
//! * [`resolvable`] enumerates user labels and builds parallel-class partitions.
//! * [`constructions`] builds the MAN PDA, the two grid PDAs and the array `B`.
//! * [`transform`] lifts a small PDA to a C-PDA and balances relay loads.
//! * [`simulator`] runs placement, XOR delivery and decoding on real bytes.
//! * [`analysis`] evaluates closed-form rates and the cut-set bound exactly.
//! * [`json`] is the interchange format used by the CLI.

pub mod analysis;
pub mod combinatorics;
pub mod constructions;
mod error;
pub mod json;
pub mod pda;
pub mod resolvable;
pub mod simulator;
pub mod transform;

pub use error::{Error, Result};

/// Exact rational used for memory ratios, rates and bounds.
pub type Rational = num_rational::Ratio<i64>;
