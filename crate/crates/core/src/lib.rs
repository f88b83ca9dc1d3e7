//! Comparison-prior toolkit for radiology report corpora.
//!
//! * [`corpus`] reads report corpora and normalizes Findings text.
//! * [`labeler`] flags reports that refer to a previous exam.
//! * [`metrics`] scores candidate reports with BLEU, ROUGE-L and CIDEr.
//! * [`analysis`] stratifies scores and lengths by prior label.
//! * [`infusion`] is a small seeded encoder-decoder that adds the prior label
//!   to its visual embedding and latent representation.
//! * [`cli`] wires the above into the `priorlab` command.

pub mod analysis;
pub mod cli;
pub mod corpus;
pub mod infusion;
pub mod error;
pub mod labeler;
pub mod metrics;
pub mod numeric;
pub mod output;

pub use error::{Error, Result};
