// Split scores by prior label, then write histogram data for plotting.

use priorlab::analysis::{
    emit_plot_data, length_stats_from_counts, stratify, ScoredReport, StratifyOptions,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scores: Vec<ScoredReport> = [
        (0.42, 0, 9),
        (0.35, 0, 11),
        (0.51, 0, 8),
        (0.18, 1, 17),
        (0.22, 1, 21),
    ]
    .iter()
    .enumerate()
    .map(|(i, &(score, label, token_count))| ScoredReport {
        id: format!("r{i}"),
        score,
        label,
        token_count: Some(token_count),
    })
    .collect();

    let summary = stratify(&scores, StratifyOptions { bins: 10, range: (0.0, 1.0) })?;
    for label in [0, 1] {
        let s = summary.stratum(label).expect("both labels present");
        println!(
            "label {label}: n={} mean={:.4} std={:.4} tokens={:.1?}",
            s.count, s.mean, s.std, s.mean_tokens
        );
    }
    println!("positive below negative: {:?}", summary.positive_below_negative());

    let pairs: Vec<(usize, u8)> = scores.iter().map(|s| (s.token_count.unwrap_or(0), s.label)).collect();
    println!("{:?}", length_stats_from_counts(&pairs));

    let dir = tempfile::tempdir()?;
    let files = emit_plot_data(&summary, dir.path().join("bleu4.csv"))?;
    print!("{}", std::fs::read_to_string(&files.csv)?);
    Ok(())
}
