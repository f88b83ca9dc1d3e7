//! Label-stratified summaries of per-report scores and lengths.
//!
//! Means and variances are accumulated with compensated summation in input
//! order, so results do not depend on how upstream work was parallelized.
//! Standard deviations are population (divide by `n`) deviations.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::corpus::CorpusRecord;
use crate::error::{Error, Result};
use crate::labeler::{LabelCounts, PriorLabel};
use crate::numeric::{
    compensated_sum, serialize_opt_sig17, serialize_sig17, serialize_vec_sig17, sig17,
};
use crate::output::write_atomic;

pub const DEFAULT_BINS: usize = 20;

/// Label counts reported for the IU X-ray corpus.
pub const IU_XRAY_COUNTS: LabelCounts = LabelCounts {
    negative: 3426,
    positive: 529,
    total: 3955,
};

/// Label counts reported for the MIMIC-CXR corpus.
pub const MIMIC_CXR_COUNTS: LabelCounts = LabelCounts {
    negative: 106_628,
    positive: 99_935,
    total: 206_563,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredReport {
    pub id: String,
    pub score: f64,
    pub label: u8,
    /// Unknown when scores were read back without their reports.
    pub token_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    #[serde(serialize_with = "serialize_vec_sig17")]
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        let edges = (0..=bins)
            .map(|i| lo + (hi - lo) * i as f64 / bins as f64)
            .collect();
        Histogram {
            edges,
            counts: vec![0; bins],
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Values outside the range land in the first or last bin; the upper
    /// edge belongs to the last bin.
    pub fn add(&mut self, x: f64) {
        let lo = self.edges[0];
        let hi = self.edges[self.bins()];
        let scaled = ((x - lo) / (hi - lo) * self.bins() as f64).floor();
        let idx = if scaled.is_nan() || scaled < 0.0 {
            0
        } else {
            (scaled as usize).min(self.bins() - 1)
        };
        self.counts[idx] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumStats {
    pub count: usize,
    #[serde(serialize_with = "serialize_sig17")]
    pub mean: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub std: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub min: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub max: f64,
    /// `None` unless every member has a token count.
    #[serde(serialize_with = "serialize_opt_sig17")]
    pub mean_tokens: Option<f64>,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StratifyOptions {
    pub bins: usize,
    pub range: (f64, f64),
}

impl Default for StratifyOptions {
    fn default() -> Self {
        StratifyOptions {
            bins: DEFAULT_BINS,
            range: (0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratifiedSummary {
    pub std_kind: &'static str,
    pub bins: usize,
    #[serde(serialize_with = "serialize_vec_sig17")]
    pub range: Vec<f64>,
    pub negative: Option<StratumStats>,
    pub positive: Option<StratumStats>,
}

impl StratifiedSummary {
    pub fn stratum(&self, label: u8) -> Option<&StratumStats> {
        match label {
            0 => self.negative.as_ref(),
            _ => self.positive.as_ref(),
        }
    }

    pub fn total_count(&self) -> usize {
        self.negative.as_ref().map_or(0, |s| s.count) + self.positive.as_ref().map_or(0, |s| s.count)
    }

    /// Mean over both strata recovered from the per-stratum means.
    pub fn merged_mean(&self) -> Option<f64> {
        let total = self.total_count();
        if total == 0 {
            return None;
        }
        let parts = [&self.negative, &self.positive]
            .into_iter()
            .flatten()
            .map(|s| s.count as f64 * s.mean);
        Some(compensated_sum(parts) / total as f64)
    }

    /// Whether positive-label reports score lower on average; `None` unless
    /// both strata are present.
    pub fn positive_below_negative(&self) -> Option<bool> {
        match (&self.negative, &self.positive) {
            (Some(n), Some(p)) => Some(p.mean < n.mean),
            _ => None,
        }
    }

    /// Histogram rows `label,bin_lo,bin_hi,count` for every present stratum.
    pub fn histogram_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(["label", "bin_lo", "bin_hi", "count"])?;
        for (label, stratum) in [(0u8, &self.negative), (1u8, &self.positive)] {
            let Some(stratum) = stratum else { continue };
            let h = &stratum.histogram;
            for (i, count) in h.counts.iter().enumerate() {
                writer.write_record([
                    label.to_string(),
                    sig17(h.edges[i]),
                    sig17(h.edges[i + 1]),
                    count.to_string(),
                ])?;
            }
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }
}

pub fn stratify(scores: &[ScoredReport], options: StratifyOptions) -> Result<StratifiedSummary> {
    if options.bins == 0 {
        return Err(Error::InvalidInput("histogram needs at least one bin".into()));
    }
    let (lo, hi) = options.range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidInput(format!("bad histogram range [{lo}, {hi}]")));
    }
    for s in scores {
        if s.label > 1 {
            return Err(Error::InvalidInput(format!(
                "record {}: label must be 0 or 1, got {}",
                s.id, s.label
            )));
        }
        if !s.score.is_finite() {
            return Err(Error::InvalidInput(format!("record {}: non-finite score", s.id)));
        }
    }
    let stratum = |label: u8| {
        let members: Vec<&ScoredReport> = scores.iter().filter(|s| s.label == label).collect();
        stratum_stats(&members, options)
    };
    Ok(StratifiedSummary {
        std_kind: "population",
        bins: options.bins,
        range: vec![lo, hi],
        negative: stratum(0),
        positive: stratum(1),
    })
}

fn stratum_stats(members: &[&ScoredReport], options: StratifyOptions) -> Option<StratumStats> {
    if members.is_empty() {
        return None;
    }
    let n = members.len() as f64;
    let values: Vec<f64> = members.iter().map(|s| s.score).collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = (compensated_sum(values.iter().copied()) / n).clamp(min, max);
    let variance = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / n;
    let mean_tokens = members
        .iter()
        .map(|s| s.token_count.map(|t| t as f64))
        .collect::<Option<Vec<f64>>>()
        .map(|counts| compensated_sum(counts) / n);
    let mut histogram = Histogram::new(options.range.0, options.range.1, options.bins);
    for &v in &values {
        histogram.add(v);
    }
    Some(StratumStats {
        count: members.len(),
        mean,
        std: variance.sqrt(),
        min,
        max,
        mean_tokens,
        histogram,
    })
}

pub fn count_labels(labels: &[PriorLabel]) -> LabelCounts {
    LabelCounts::from_values(labels.iter().map(|l| l.value))
}

/// Observed counts set against a published reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountComparison {
    pub reference: LabelCounts,
    pub observed: LabelCounts,
    pub total_matches: bool,
    /// `(observed - reference) / reference` for the positive class.
    #[serde(serialize_with = "serialize_sig17")]
    pub positive_relative_diff: f64,
}

impl CountComparison {
    pub fn new(observed: LabelCounts, reference: LabelCounts) -> Self {
        let positive_relative_diff = (observed.positive as f64 - reference.positive as f64)
            / reference.positive.max(1) as f64;
        CountComparison {
            reference,
            observed,
            total_matches: observed.total == reference.total,
            positive_relative_diff,
        }
    }

    pub fn within(&self, tolerance: f64) -> bool {
        self.total_matches && self.positive_relative_diff.abs() <= tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthStratum {
    pub count: usize,
    #[serde(serialize_with = "serialize_sig17")]
    pub mean: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthStats {
    pub negative: Option<LengthStratum>,
    pub positive: Option<LengthStratum>,
}

/// Token-count mean and median per label. Lengths are the Findings token
/// counts of each record's report.
pub fn length_stats(records: &[CorpusRecord], labels: &[PriorLabel]) -> Result<LengthStats> {
    if records.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} records but {} labels",
            records.len(),
            labels.len()
        )));
    }
    let pairs: Vec<(usize, u8)> = records
        .iter()
        .zip(labels)
        .map(|(r, l)| (r.report.token_count(), l.value))
        .collect();
    Ok(length_stats_from_counts(&pairs))
}

pub fn length_stats_from_counts(pairs: &[(usize, u8)]) -> LengthStats {
    let stratum = |label: u8| {
        let mut lengths: Vec<usize> = pairs
            .iter()
            .filter(|(_, l)| *l == label)
            .map(|(n, _)| *n)
            .collect();
        if lengths.is_empty() {
            return None;
        }
        lengths.sort_unstable();
        let k = lengths.len();
        let median = if k % 2 == 1 {
            lengths[k / 2] as f64
        } else {
            (lengths[k / 2 - 1] + lengths[k / 2]) as f64 / 2.0
        };
        Some(LengthStratum {
            count: k,
            mean: compensated_sum(lengths.iter().map(|&n| n as f64)) / k as f64,
            median,
        })
    };
    LengthStats {
        negative: stratum(0),
        positive: stratum(1),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Write histogram rows to `path` (CSV) and the summary statistics to a
/// sibling `.stats.json` file.
pub fn emit_plot_data(summary: &StratifiedSummary, path: impl AsRef<Path>) -> Result<PlotFiles> {
    let csv_path = path.as_ref().to_path_buf();
    let json_path = csv_path.with_extension("stats.json");
    write_atomic(&csv_path, summary.histogram_csv()?.as_bytes())?;
    let mut json = serde_json::to_string_pretty(summary)?;
    json.push('\n');
    write_atomic(&json_path, json.as_bytes())?;
    Ok(PlotFiles {
        csv: csv_path,
        json: json_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scored(score: f64, label: u8) -> ScoredReport {
        ScoredReport {
            id: format!("{score}-{label}"),
            score,
            label,
            token_count: None,
        }
    }

    #[test]
    fn two_point_means() {
        let scores = [scored(0.2, 0), scored(0.4, 0), scored(0.1, 1)];
        let s = stratify(&scores, StratifyOptions::default()).unwrap();
        assert!((s.negative.as_ref().unwrap().mean - 0.3).abs() < 1e-15);
        assert_eq!(s.positive.as_ref().unwrap().mean, 0.1);
        assert_eq!(s.positive.as_ref().unwrap().std, 0.0);
        assert_eq!(s.total_count(), 3);
        assert_eq!(s.positive_below_negative(), Some(true));
    }

    #[test]
    fn absent_stratum() {
        let s = stratify(&[scored(0.5, 0)], StratifyOptions::default()).unwrap();
        assert!(s.positive.is_none());
        assert_eq!(s.positive_below_negative(), None);
        let empty = stratify(&[], StratifyOptions::default()).unwrap();
        assert!(empty.negative.is_none() && empty.merged_mean().is_none());
    }

    #[test]
    fn invalid_inputs() {
        assert!(stratify(&[scored(0.5, 2)], StratifyOptions::default()).is_err());
        assert!(stratify(&[scored(f64::NAN, 0)], StratifyOptions::default()).is_err());
        let zero_bins = StratifyOptions {
            bins: 0,
            ..Default::default()
        };
        assert!(stratify(&[], zero_bins).is_err());
    }

    #[test]
    fn histogram_edges_and_clamping() {
        let mut h = Histogram::new(0.0, 1.0, 20);
        for x in [0.0, 0.05, 0.999, 1.0, -0.5, 3.0] {
            h.add(x);
        }
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.counts[1], 1);
        assert_eq!(h.counts[19], 3);
        assert_eq!(h.total(), 6);
        assert_eq!(h.edges.len(), 21);
        assert_eq!(h.edges[20], 1.0);
    }

    #[test]
    fn length_medians() {
        let stats = length_stats_from_counts(&[(5, 0), (9, 1)]);
        assert_eq!(stats.negative.as_ref().unwrap().mean, 5.0);
        assert_eq!(stats.positive.as_ref().unwrap().mean, 9.0);
        let stats = length_stats_from_counts(&[(4, 1), (1, 1), (10, 1), (3, 1)]);
        assert_eq!(stats.positive.as_ref().unwrap().median, 3.5);
        assert!(stats.negative.is_none());
    }

    #[test]
    fn count_comparison() {
        let observed = LabelCounts {
            negative: 3400,
            positive: 555,
            total: 3955,
        };
        let cmp = CountComparison::new(observed, IU_XRAY_COUNTS);
        assert!(cmp.total_matches);
        assert!(cmp.within(0.10));
        assert!(!cmp.within(0.01));
    }
}
