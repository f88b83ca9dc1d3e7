use std::collections::{BTreeMap, BTreeSet};

pub const MAX_ORDER: usize = 4;

pub type NGram = Vec<String>;
pub type NGramCounts = BTreeMap<NGram, u32>;

/// Counts of every contiguous `n`-token window.
pub fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> NGramCounts {
    let mut counts = NGramCounts::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for window in tokens.windows(n) {
        let gram: NGram = window.iter().map(|t| t.as_ref().to_string()).collect();
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Per-document n-gram counts for orders 1..=4 plus document frequencies
/// over the indexed (reference) documents.
#[derive(Debug, Clone, Default)]
pub struct NGramIndex {
    pub docs: Vec<[NGramCounts; MAX_ORDER]>,
    pub doc_freq: BTreeMap<NGram, u32>,
}

impl NGramIndex {
    pub fn build<D: AsRef<[S]>, S: AsRef<str>>(documents: &[D]) -> Self {
        let mut index = NGramIndex::default();
        for doc in documents {
            let doc = doc.as_ref();
            let counts: [NGramCounts; MAX_ORDER] =
                std::array::from_fn(|i| ngram_counts(doc, i + 1));
            let distinct: BTreeSet<&NGram> = counts.iter().flat_map(|c| c.keys()).collect();
            for gram in distinct {
                *index.doc_freq.entry(gram.clone()).or_insert(0) += 1;
            }
            index.docs.push(counts);
        }
        index
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn doc_freq(&self, gram: &[String]) -> u32 {
        self.doc_freq.get(gram).copied().unwrap_or(0)
    }

    /// `ln(N) - ln(max(1, df))`: zero for n-grams in every document and for
    /// any n-gram of a single-document corpus.
    pub fn idf(&self, gram: &[String]) -> f64 {
        let n = self.len() as f64;
        let df = f64::from(self.doc_freq(gram).max(1));
        n.ln() - df.ln()
    }
}
