use super::ngram::{ngram_counts, MAX_ORDER};
use crate::error::{Error, Result};

/// Clipped n-gram matches and candidate n-gram totals for orders 1..=4,
/// plus candidate and reference lengths. Adding stats of several pairs gives
/// corpus-level counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [u64; MAX_ORDER],
    pub totals: [u64; MAX_ORDER],
    pub candidate_len: u64,
    pub reference_len: u64,
}

impl BleuStats {
    pub fn from_pair<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> Self {
        let mut stats = BleuStats {
            candidate_len: candidate.len() as u64,
            reference_len: reference.len() as u64,
            ..Default::default()
        };
        for order in 1..=MAX_ORDER {
            let cand = ngram_counts(candidate, order);
            let refs = ngram_counts(reference, order);
            stats.totals[order - 1] = cand.values().map(|&c| u64::from(c)).sum();
            stats.matches[order - 1] = cand
                .iter()
                .map(|(gram, &c)| u64::from(c.min(refs.get(gram).copied().unwrap_or(0))))
                .sum();
        }
        stats
    }

    pub fn add(&mut self, other: &BleuStats) {
        for i in 0..MAX_ORDER {
            self.matches[i] += other.matches[i];
            self.totals[i] += other.totals[i];
        }
        self.candidate_len += other.candidate_len;
        self.reference_len += other.reference_len;
    }

    /// Modified precision of order `n` (1-based); `None` when the candidate
    /// has no n-grams of that order.
    pub fn precision(&self, n: usize) -> Option<f64> {
        let total = self.totals[n - 1];
        (total > 0).then(|| self.matches[n - 1] as f64 / total as f64)
    }

    pub fn brevity_penalty(&self) -> f64 {
        let (c, r) = (self.candidate_len as f64, self.reference_len as f64);
        if self.candidate_len == 0 {
            0.0
        } else if c < r {
            (1.0 - r / c).exp()
        } else {
            1.0
        }
    }

    /// Unsmoothed BLEU-n: zero whenever any order up to `n` has no match.
    pub fn score(&self, n: usize) -> f64 {
        let mut log_sum = 0.0;
        for order in 1..=n {
            match self.precision(order) {
                Some(p) if p > 0.0 => log_sum += p.ln(),
                _ => return 0.0,
            }
        }
        self.brevity_penalty() * (log_sum / n as f64).exp()
    }

    /// BLEU-n where each order with no match uses `1 / (2 * candidate_len)`
    /// in place of its zero precision.
    pub fn smoothed_score(&self, n: usize) -> f64 {
        if self.candidate_len == 0 {
            return 0.0;
        }
        let floor = 1.0 / (2.0 * self.candidate_len as f64);
        let log_sum: f64 = (1..=n)
            .map(|order| {
                if self.matches[order - 1] > 0 {
                    self.precision(order).expect("matches imply totals").ln()
                } else {
                    floor.ln()
                }
            })
            .sum();
        self.brevity_penalty() * (log_sum / n as f64).exp()
    }
}

/// Corpus-level BLEU-n over aligned candidate/reference token lists.
pub fn bleu<S: AsRef<str>>(candidates: &[Vec<S>], references: &[Vec<S>], n: usize) -> Result<f64> {
    Ok(corpus_stats(candidates, references, n)?.score(n))
}

pub(crate) fn corpus_stats<S: AsRef<str>>(
    candidates: &[Vec<S>],
    references: &[Vec<S>],
    n: usize,
) -> Result<BleuStats> {
    if !(1..=MAX_ORDER).contains(&n) {
        return Err(Error::InvalidInput(format!("BLEU order must be 1..=4, got {n}")));
    }
    if candidates.is_empty() {
        return Err(Error::InvalidInput("BLEU needs at least one candidate".into()));
    }
    if candidates.len() != references.len() {
        return Err(Error::InvalidInput(format!(
            "{} candidates but {} references",
            candidates.len(),
            references.len()
        )));
    }
    let mut stats = BleuStats::default();
    for (c, r) in candidates.iter().zip(references) {
        stats.add(&BleuStats::from_pair(c, r));
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn identity_is_one() {
        let c = vec![toks("the cat is on the mat"), toks("a b c d e")];
        for n in 1..=4 {
            assert_eq!(bleu(&c, &c, n).unwrap(), 1.0);
        }
    }

    #[test]
    fn clipped_unigram_precision() {
        let stats = BleuStats::from_pair(&toks("the the the the the the the"), &toks("the cat is on the mat"));
        assert_eq!(stats.precision(1), Some(2.0 / 7.0));
    }

    #[test]
    fn brevity_penalty_three_vs_four() {
        let c = vec![toks("a b c")];
        let r = vec![toks("a b c d")];
        let expected = (1.0f64 - 4.0 / 3.0).exp();
        assert!((bleu(&c, &r, 1).unwrap() - expected).abs() < 1e-15);
        assert!((bleu(&c, &r, 3).unwrap() - expected).abs() < 1e-15);
        // No 4-gram in a 3-token candidate.
        assert_eq!(bleu(&c, &r, 4).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        let empty: Vec<Vec<&str>> = vec![];
        assert!(bleu(&empty, &empty, 1).is_err());
        let c = vec![toks("a")];
        assert!(bleu(&c, &c, 0).is_err());
        assert!(bleu(&c, &c, 5).is_err());
        assert!(bleu(&c, &[], 1).is_err());
    }

    #[test]
    fn smoothing_replaces_zero_orders() {
        let stats = BleuStats::from_pair(&toks("a b c d e"), &toks("v w x y z"));
        assert_eq!(stats.score(4), 0.0);
        assert!((stats.smoothed_score(4) - 0.1).abs() < 1e-15);
        assert_eq!(BleuStats::default().smoothed_score(4), 0.0);
    }
}
