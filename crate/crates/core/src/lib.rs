//! Factor counting for canonical correlation models of asset-return panels.
//!
//! The crate is `no_std` and only needs an allocator. It covers:
//!
//! * [`ingest`]: price tables, returns and the augmented Dickey-Fuller check.
//! * [`symbolic`]: ordinal symbolization, permutation entropy and symbolic
//!   transfer entropy with chi-squared or surrogate significance.
//! * [`graph`]: net information flow graph and the degree-based
//!   predictor/response split.
//! * [`cca`]: canonical correlations and the reduced-rank regression they induce.
//! * [`rmt`]: Painleve II, Tracy-Widom laws, Marchenko-Pastur and greatest-root
//!   tests used to count significant canonical factors.
//!
//! IO, HTTP, CLI and file formats live in the `rmtfactor` companion crate.
#![no_std]
// NaN has to fail the negated range checks; reference constants keep all their digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cca;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod linalg;
pub mod ode;
pub mod quadrature;
pub mod rmt;
pub mod special;
pub mod symbolic;

pub use crate::error::{Error, Result};
