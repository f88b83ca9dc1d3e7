// Label the four sample reports and show which phrase fired.

use priorlab::corpus::{load_corpus, CorpusFormat};
use priorlab::labeler::{label_corpus, RuleSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/prior_phrases.jsonl");
    let records = load_corpus(path, CorpusFormat::Jsonl)?;
    let labels = label_corpus(&records, &RuleSet::default_rules());
    for record in labels.label_records() {
        let evidence: Vec<String> = record
            .evidence
            .iter()
            .map(|e| format!("{:?} via {}", e.text, e.rule))
            .collect();
        println!("{} -> {}  {}", record.id, record.label, evidence.join("; "));
    }
    println!("{:?}", labels.counts);
    Ok(())
}
