//! Report-level text metrics: BLEU-1..4, ROUGE-L and CIDEr.
//!
//! Candidates and references are tokenized with [`crate::corpus::tokenize`]
//! (through [`Report`]), single reference per candidate. Corpus BLEU is
//! computed from summed n-gram counts; per-report BLEU uses the smoothed
//! variant so that every report gets a finite, nonzero-capable score.

pub mod bleu;
pub mod cider;
pub mod ngram;
pub mod rouge;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bleu::{bleu, BleuStats};
pub use cider::{cider, cider_pair, cosine, tfidf_vector, CiderScores};
pub use ngram::{ngram_counts, NGramIndex, MAX_ORDER};
pub use rouge::{lcs_len, rouge_l, ROUGE_BETA};

use crate::corpus::{CorpusRecord, Report};
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, sig17};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportScores {
    pub id: String,
    pub bleu: [f64; MAX_ORDER],
    pub rouge_l: f64,
    pub cider: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusScores {
    pub bleu: [f64; MAX_ORDER],
    pub rouge_l: f64,
    pub cider: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub per_report: Vec<ReportScores>,
    pub corpus: CorpusScores,
}

/// One tokenized candidate/reference pair.
#[derive(Debug, Clone)]
pub struct ScoredPair {
    pub id: String,
    pub candidate: Vec<String>,
    pub reference: Vec<String>,
}

impl ScoredPair {
    pub fn from_texts(id: impl Into<String>, candidate: &str, reference: &str) -> Self {
        ScoredPair {
            id: id.into(),
            candidate: Report::new("", candidate).flat_tokens(),
            reference: Report::new("", reference).flat_tokens(),
        }
    }

    pub fn from_record(record: &CorpusRecord) -> Result<Self> {
        let missing = |field| Error::MissingField {
            id: record.id().to_string(),
            field,
        };
        let candidate = record.candidate.as_deref().ok_or_else(|| missing("candidate"))?;
        let reference = record.reference.as_deref().ok_or_else(|| missing("reference"))?;
        Ok(Self::from_texts(record.id(), candidate, reference))
    }
}

/// Score every record's candidate against its reference.
pub fn evaluate_corpus(records: &[CorpusRecord]) -> Result<MetricReport> {
    let pairs = records
        .iter()
        .map(ScoredPair::from_record)
        .collect::<Result<Vec<_>>>()?;
    evaluate_pairs(&pairs)
}

pub fn evaluate_pairs(pairs: &[ScoredPair]) -> Result<MetricReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no records to evaluate".into()));
    }
    // Pass 1: reference index for CIDEr IDF.
    let references: Vec<&[String]> = pairs.iter().map(|p| p.reference.as_slice()).collect();
    let index = NGramIndex::build(&references);

    // Pass 2: independent per-pair scoring.
    let scored: Vec<(BleuStats, ReportScores)> = pairs
        .par_iter()
        .map(|pair| {
            let stats = BleuStats::from_pair(&pair.candidate, &pair.reference);
            let scores = ReportScores {
                id: pair.id.clone(),
                bleu: std::array::from_fn(|i| stats.smoothed_score(i + 1)),
                rouge_l: rouge_l(&pair.candidate, &pair.reference),
                cider: cider_pair(&pair.candidate, &pair.reference, &index),
                label: None,
            };
            (stats, scores)
        })
        .collect();

    let mut totals = BleuStats::default();
    for (stats, _) in &scored {
        totals.add(stats);
    }
    let n = scored.len() as f64;
    let corpus = CorpusScores {
        bleu: std::array::from_fn(|i| totals.score(i + 1)),
        rouge_l: compensated_sum(scored.iter().map(|(_, s)| s.rouge_l)) / n,
        cider: compensated_sum(scored.iter().map(|(_, s)| s.cider)) / n,
    };
    Ok(MetricReport {
        per_report: scored.into_iter().map(|(_, s)| s).collect(),
        corpus,
    })
}

impl MetricReport {
    /// Per-report rows as `id,b1,b2,b3,b4,rouge_l,cider,label`.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(["id", "b1", "b2", "b3", "b4", "rouge_l", "cider", "label"])?;
        for row in &self.per_report {
            let mut fields = vec![row.id.clone()];
            fields.extend(row.bleu.iter().map(|&b| sig17(b)));
            fields.push(sig17(row.rouge_l));
            fields.push(sig17(row.cider));
            fields.push(row.label.map(|l| l.to_string()).unwrap_or_default());
            writer.write_record(&fields)?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_record_is_maximal() {
        let text = "There are low lung volumes. The lungs are otherwise clear.";
        let records = vec![CorpusRecord::new("3", text)
            .with_candidate(text)
            .with_reference(text)];
        let report = evaluate_corpus(&records).unwrap();
        let row = &report.per_report[0];
        assert_eq!(row.bleu, [1.0; 4]);
        assert_eq!(row.rouge_l, 1.0);
        // Single reference document: every IDF is zero.
        assert_eq!(row.cider, 0.0);
        assert_eq!(report.corpus.bleu, [1.0; 4]);
    }

    #[test]
    fn missing_candidate_names_record() {
        let records = vec![CorpusRecord::new("abc", "x").with_reference("x")];
        let err = evaluate_corpus(&records).unwrap_err();
        assert!(err.to_string().contains("abc"), "{err}");
        assert!(evaluate_corpus(&[]).is_err());
    }

    #[test]
    fn csv_rows() {
        let pairs = vec![ScoredPair::from_texts("p", "a b c d", "a b c d")];
        let mut report = evaluate_pairs(&pairs).unwrap();
        report.per_report[0].label = Some(1);
        let csv = report.to_csv().unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "id,b1,b2,b3,b4,rouge_l,cider,label");
        assert!(lines[1].starts_with("p,1.0000000000000000e0,"));
        assert!(lines[1].ends_with(",1"));
    }
}
