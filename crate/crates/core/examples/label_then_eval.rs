// Label generated reports, score them, and compare the two label groups.

use priorlab::cli::{pipeline_label_then_eval, PipelineOptions};
use priorlab::corpus::{load_corpus, CorpusFormat};
use priorlab::labeler::RuleSet;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/pipeline_six.jsonl");
    let records = load_corpus(path, CorpusFormat::Jsonl)?;
    let report = pipeline_label_then_eval(&records, &RuleSet::default_rules(), PipelineOptions::default())?;
    for row in &report.metrics.per_report {
        println!("{} label={:?} bleu4={:.4}", row.id, row.label, row.bleu[3]);
    }
    for (name, stratum) in [("negative", &report.summary.negative), ("positive", &report.summary.positive)] {
        if let Some(s) = stratum {
            println!("{name}: n={} mean={:.4} std={:.4}", s.count, s.mean, s.std);
        }
    }
    println!("positive below negative: {:?}", report.positive_below_negative);
    Ok(())
}
