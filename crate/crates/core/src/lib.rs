//! Diachronic word similarity matrices.
//!
//! The crate turns a time-sliced, pre-tokenized corpus into period-aligned
//! word embeddings and then into per-word `T x T` similarity matrices:
//!
//! 1. [`corpus`] holds the corpus, subsampling and vocabulary selection.
//! 2. [`cooc`] counts windowed co-occurrences and builds PPMI matrices.
//! 3. [`embed`] stacks all periods and factorizes them with one randomized
//!    truncated SVD, so every period shares a single coordinate basis.
//! 4. [`simmat`] builds similarity matrices and serializes them into features.
//! 5. [`cluster`] clusters the features and scores clusterings.
//! 6. [`explain`] ranks context words by PPMI difference between two periods.
//! 7. [`pseudo`] generates pseudoword shift benchmarks and evaluates the grid
//!    of similarity, feature, clustering and standardization choices.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is off.
//! File formats, the CLI and other IO live in the companion `diachron` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod cluster;
pub mod cooc;
pub mod corpus;
pub mod embed;
mod error;
pub mod explain;
pub mod linalg;
mod par;
pub mod pseudo;
pub mod rng;
pub mod simmat;
pub mod sparse;
pub mod synth;

pub use error::{Error, Result};
