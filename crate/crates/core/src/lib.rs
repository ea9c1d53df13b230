//! Three-stage piecewise power-law arrival process for bid times in
//! fixed-deadline auctions.
//!
//! In reverse time `x = 1 - s/T` the intensity is a power of `x` on each of
//! the stages `[0, d1)`, `[d1, T - d2)` and `[T - d2, T]`, joined
//! continuously at the changepoints. The crate covers exact evaluation and
//! sampling, quick-and-crude, grid and genetic-algorithm estimation,
//! likelihood-ratio model selection across the nested one-, two- and
//! three-stage families, goodness-of-fit diagnostics, and bidder-level
//! simulators whose pooled bids follow the one- and two-stage models.

// Negated comparisons are how NaN is rejected; index loops mirror matrix
// notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod error;
pub mod estimate;
mod params;
mod process;
pub mod rng;
mod sample;
pub mod select;
pub mod simulate;

pub use error::{Error, Result};
pub use params::{BaristaParams, FamilyKind, ModelFamily};
pub use rng::Seed;
pub use sample::BidSample;
