// Load a corpus and look at how a report is normalized.

use priorlab::corpus::{extract_findings, parse_corpus, split_sentences, tokenize, CorpusFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let raw = "FINDINGS: Heart size is normal. Dr. Smith noted opacity at the left base, xxxx. \
               IMPRESSION: No acute disease.";
    let findings = extract_findings(raw);
    println!("findings: {findings}");
    for sentence in split_sentences(findings) {
        println!("  {:?}", tokenize(&sentence));
    }

    let csv = "id,text,reference,candidate,label\n\
               a,\"Lungs are clear, heart normal.\",,,0\n\
               b,Opacity again noted.,Opacity again noted.,Opacity noted.,1\n";
    let records = parse_corpus(csv, CorpusFormat::Csv)?;
    for r in &records {
        println!(
            "{}: {} tokens, candidate={:?}, gold={:?}",
            r.id(),
            r.report.token_count(),
            r.candidate,
            r.gold_label
        );
    }

    let bad = "{\"id\": \"x\", \"text\": \"ok\"}\n{\"id\": \"y\"}\n";
    if let Err(e) = parse_corpus(bad, CorpusFormat::Jsonl) {
        println!("rejected: {e}");
    }
    Ok(())
}
