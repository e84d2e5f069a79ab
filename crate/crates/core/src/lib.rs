//! Measuring how game-related interview questions are.
//!
//! Questions are scored by their perplexity under a bigram model trained on
//! play-by-play commentary, classified as typical or atypical by mean IDF,
//! and compared across groups of players with rank-based tests.

pub mod analysis;
pub mod corpus;
mod error;
pub mod ngram_lm;
pub mod pipeline;
pub mod stats;
pub mod synth;
pub mod typicality;

pub use error::{Error, ErrorKind, Result};
