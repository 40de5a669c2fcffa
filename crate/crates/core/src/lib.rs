//! Contextual text queries over HAL (Hyperspace Analog to Language)
//! co-occurrence vectors, plus quantum-likeness analytics: interference terms
//! for concept combination and Bell/CHSH parameters for poll and HAL scores.
//!
//! The pipeline is `corpus` (normalize, tokenize, fold plurals, vocabulary)
//! → `hal` (per-document symmetric co-occurrence matrix, context vectors)
//! → `query` (AND / WITHOUT scoring and ranking). `bell` is independent of
//! the text pipeline and works on score tables. `cli` wires all of it into
//! the `halq` binary.

pub mod bell;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod hal;
pub mod index;
pub mod query;

pub use error::{Error, Result};
