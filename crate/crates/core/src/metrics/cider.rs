use std::collections::BTreeMap;

use super::ngram::{ngram_counts, NGram, NGramIndex, MAX_ORDER};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

pub const CIDER_SCALE: f64 = 10.0;

pub type TfIdfVector = BTreeMap<NGram, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct CiderScores {
    pub per_report: Vec<f64>,
    pub mean: f64,
}

/// TF-IDF weights of a document's order-`n` n-grams. Raw counts serve as the
/// term frequency; normalizing them would only rescale the vector.
pub fn tfidf_vector<S: AsRef<str>>(tokens: &[S], n: usize, index: &NGramIndex) -> TfIdfVector {
    ngram_counts(tokens, n)
        .into_iter()
        .map(|(gram, count)| {
            let weight = f64::from(count) * index.idf(&gram);
            (gram, weight)
        })
        .collect()
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(a: &TfIdfVector, b: &TfIdfVector) -> f64 {
    let dot = compensated_sum(
        a.iter()
            .filter_map(|(gram, wa)| b.get(gram).map(|wb| wa * wb)),
    );
    let norm_a = compensated_sum(a.values().map(|w| w * w)).sqrt();
    let norm_b = compensated_sum(b.values().map(|w| w * w)).sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        0.0
    } else {
        dot / (norm_a * norm_b)
    }
}

/// CIDEr of one pair against an index built over all references.
pub fn cider_pair<S: AsRef<str>>(candidate: &[S], reference: &[S], index: &NGramIndex) -> f64 {
    let sims = (1..=MAX_ORDER).map(|n| {
        cosine(
            &tfidf_vector(candidate, n, index),
            &tfidf_vector(reference, n, index),
        )
    });
    CIDER_SCALE * compensated_sum(sims) / MAX_ORDER as f64
}

/// Per-pair CIDEr scores and their mean; IDF comes from `references`.
pub fn cider<S: AsRef<str>>(
    candidates: &[Vec<S>],
    references: &[Vec<S>],
) -> Result<CiderScores> {
    if candidates.is_empty() {
        return Err(Error::InvalidInput("CIDEr needs at least one pair".into()));
    }
    if candidates.len() != references.len() {
        return Err(Error::InvalidInput(format!(
            "{} candidates but {} references",
            candidates.len(),
            references.len()
        )));
    }
    let index = NGramIndex::build(references);
    let per_report: Vec<f64> = candidates
        .iter()
        .zip(references)
        .map(|(c, r)| cider_pair(c, r, &index))
        .collect();
    let mean = compensated_sum(per_report.iter().copied()) / per_report.len() as f64;
    Ok(CiderScores { per_report, mean })
}
