// Rules are plain text; stages can also be run one at a time.

use priorlab::corpus::Report;
use priorlab::labeler::{aggregate, classify_mentions, extract_mentions, RuleSet};

const RULES: &str = "
[keywords]
prior
comparison
increase stem

[negations]
no-comparison: no ..1 {m} studies|study

[priors]
compared-to: compared|similar to ..2 {m}
made-with: {m} is made with
change-since: {m} ..4 since

[change_verbs]
increase
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rules = RuleSet::parse(RULES)?;
    for text in [
        "There are no comparison studies.",
        "Comparison is made with the study from xxxx.",
        "Effusion has increased since xxxx.",
        "Increased interstitial markings.",
    ] {
        let report = Report::new("demo", text);
        let mentions = extract_mentions(&report, &rules);
        let classified = classify_mentions(&report, &mentions, &rules);
        for c in &classified {
            println!(
                "  {:<12} {:?} {:?}",
                c.mention.surface, c.verdict, c.fired_rule
            );
        }
        println!("{text:?} -> {}", aggregate(classified).value);
    }

    if let Err(e) = RuleSet::parse("[priors]\nbroken: compared to prior\n") {
        println!("rejected: {e}");
    }
    Ok(())
}
