// BLEU, ROUGE-L and CIDEr on a few candidate/reference pairs.

use priorlab::metrics::{bleu, evaluate_pairs, rouge_l, ScoredPair};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pairs = vec![
        ScoredPair::from_texts("1", "heart size is normal", "heart size is normal"),
        ScoredPair::from_texts("2", "lungs are clear", "the lungs are clear"),
        ScoredPair::from_texts("3", "no pleural effusion", "no effusion or pneumothorax"),
    ];
    let report = evaluate_pairs(&pairs)?;
    for row in &report.per_report {
        println!(
            "{}: bleu {:.4?} rouge-l {:.4} cider {:.4}",
            row.id, row.bleu, row.rouge_l, row.cider
        );
    }
    println!("corpus: {:?}", report.corpus);

    let cands: Vec<Vec<String>> = pairs.iter().map(|p| p.candidate.clone()).collect();
    let refs: Vec<Vec<String>> = pairs.iter().map(|p| p.reference.clone()).collect();
    println!("corpus BLEU-2 alone: {:.6}", bleu(&cands, &refs, 2)?);
    println!("ROUGE-L of pair 3: {:.6}", rouge_l(&cands[2], &refs[2]));
    print!("{}", report.to_csv()?);
    Ok(())
}
