//! Exact-arithmetic toolkit for embedding trees on arrangements of lines.
//!
//! The crate is organized bottom-up: [`scalar`] and [`geometry`] hold the exact
//! kernel, [`lineset`] validates line collections and builds the region
//! partition, [`ramsey`] extracts monotone and doubling subsets, [`unstretch`]
//! checks the six-line configuration, [`embed`] verifies and searches for
//! embeddings, and [`io`] covers file formats and SVG output.

#![allow(clippy::needless_range_loop)]

pub mod embed;
pub mod geometry;
pub mod hp;
pub mod io;
pub mod lineset;
pub mod ramsey;
pub mod scalar;
pub mod unstretch;

pub use geometry::{Line, Point, Ray, Segment};
pub use lineset::LineSet;
pub use scalar::Scalar;
