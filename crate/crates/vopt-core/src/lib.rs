//! Checks second-order sufficient optimality conditions at candidate points of
//! constrained vector optimization problems with C¹ data, and cross-validates
//! every verdict against brute-force efficiency oracles and generalized-convexity
//! falsifiers.
//!
//! The crate is `no_std` (with `alloc`); all floating-point transcendentals go
//! through `libm` so results are bit-identical across platforms. IO, file
//! formats and the command-line frontend live in the companion `vopt-cli` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod linalg;
#[cfg(test)]
pub(crate) mod test_fixtures;

pub mod certify;
pub mod cones;
pub mod deriv;
pub mod expr;
pub mod gencvx;
pub mod lp;
pub mod oracle;
pub mod problem;
pub mod rng;

pub use problem::{Point, Problem};
