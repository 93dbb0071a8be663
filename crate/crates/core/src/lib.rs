//! Confirmatory aspect-based opinion mining over review corpora.
//!
//! Reviews are split into clauses, compressed into (object, evaluation)
//! bi-terms, filtered by frequency, manually labeled into topic bags,
//! extended by similarity to those bags, and scored into a per-review topic
//! matrix.

pub mod bagger;
pub mod corpus;
pub mod error;
pub mod fixtures;
pub mod lists;
pub mod parse;
pub mod pipeline;
pub mod score;
pub mod segment;
pub mod service;
pub mod stem;
pub mod strain;
pub mod summarize;
pub mod upcycle;

pub use error::{Error, Result};
