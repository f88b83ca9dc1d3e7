// Label a corpus and set its counts against a published breakdown. Point
// `IU_XRAY_CORPUS` at a JSONL/CSV export of the IU X-ray Findings to check
// the real thing; otherwise the bundled synthetic corpus is used.

use priorlab::analysis::{length_stats, CountComparison, IU_XRAY_COUNTS};
use priorlab::corpus::{load_corpus, CorpusFormat};
use priorlab::labeler::{label_records, LabelTarget, RuleSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::var("IU_XRAY_CORPUS")
        .unwrap_or_else(|_| concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_50.jsonl").into());
    let path = std::path::Path::new(&path);
    let records = load_corpus(path, CorpusFormat::from_path(path))?;
    let labels = label_records(&records, &RuleSet::default_rules(), LabelTarget::Text)?;
    let comparison = CountComparison::new(labels.counts, IU_XRAY_COUNTS);
    println!("{}", serde_json::to_string_pretty(&comparison)?);
    println!("within 10%: {}", comparison.within(0.10));

    let prior_labels: Vec<_> = labels.records.into_iter().map(|(_, l)| l).collect();
    println!("{:?}", length_stats(&records, &prior_labels)?);
    Ok(())
}
