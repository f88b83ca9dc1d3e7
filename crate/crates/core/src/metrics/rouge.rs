/// Weight of recall relative to precision in the ROUGE-L F-measure.
pub const ROUGE_BETA: f64 = 1.2;

/// Length of the longest common subsequence, two-row dynamic programme.
pub fn lcs_len<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> f64 {
    let lcs = lcs_len(candidate, reference);
    if lcs == 0 {
        return 0.0;
    }
    let precision = lcs as f64 / candidate.len() as f64;
    let recall = lcs as f64 / reference.len() as f64;
    let beta2 = ROUGE_BETA * ROUGE_BETA;
    (1.0 + beta2) * precision * recall / (recall + beta2 * precision)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let abcd = ["a", "b", "c", "d"];
        assert_eq!(rouge_l(&abcd, &abcd), 1.0);
        let acbd = ["a", "c", "b", "d"];
        assert_eq!(lcs_len(&abcd, &acbd), 3);
        assert!((rouge_l(&abcd, &acbd) - 0.75).abs() < 1e-15);
        assert!((rouge_l(&acbd, &abcd) - 0.75).abs() < 1e-15);
        let empty: [&str; 0] = [];
        assert_eq!(rouge_l(&empty, &abcd), 0.0);
        assert_eq!(rouge_l(&abcd, &empty), 0.0);
    }

    #[test]
    fn asymmetric_for_unequal_lengths() {
        let c = ["a", "b"];
        let r = ["a", "b", "c", "d"];
        // P = 1, R = 1/2.
        let beta2 = ROUGE_BETA * ROUGE_BETA;
        let expected = (1.0 + beta2) * 0.5 / (0.5 + beta2);
        assert!((rouge_l(&c, &r) - expected).abs() < 1e-15);
        assert!((rouge_l(&c, &r) - rouge_l(&r, &c)).abs() > 1e-3);
    }
}
