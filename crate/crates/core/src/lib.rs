//! Black-box adversarial attack engine for text spam classifiers.
//!
//! The pipeline: load or generate a labeled email corpus, clean and encode
//! it, train a native target classifier (or connect a remote one), score
//! token importance through a query-counted oracle, perturb the test set at
//! the character, word or sentence level, and measure the damage.

pub mod attacks;
pub mod corpus;
pub mod error;
pub mod harness;
pub mod lexicon;
pub mod models;
pub mod rng;
pub mod scoring;

pub use error::{Error, Result};
