//! Rule-based comparison-prior labeler.
//!
//! Labeling runs in three stages over the sentences of a report's Findings
//! section:
//!
//! 1. [`extract_mentions`] marks every token that matches a keyword,
//! 2. [`classify_mentions`] decides, per mention and within its sentence,
//!    whether a negation rule vetoes it, a prior rule confirms it, or neither,
//! 3. [`aggregate`] reduces the verdicts to a binary label: 1 when any
//!    mention was confirmed as a prior expression.

pub mod rules;
pub mod template;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusRecord, Report};
use crate::error::{Error, Result};
pub use rules::{Keyword, MatchMode, Rule, RuleSet};
pub use template::Template;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    pub keyword: Keyword,
    pub sentence_index: usize,
    /// Half-open token range within the sentence.
    pub token_span: (usize, usize),
    pub surface: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    PriorExpression,
    Negated,
    Irrelevant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedMention {
    pub mention: Mention,
    pub verdict: Verdict,
    /// Id of the rule that decided the verdict; `None` for irrelevant mentions.
    pub fired_rule: Option<String>,
    /// Token span covered by the fired rule's template.
    pub match_span: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorLabel {
    pub value: u8,
    pub evidence: Vec<ClassifiedMention>,
}

impl PriorLabel {
    pub fn is_positive(&self) -> bool {
        self.value == 1
    }
}

/// One evidence entry as written to label output files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceRecord {
    pub sentence_index: usize,
    pub span: [usize; 2],
    pub rule: String,
    pub text: String,
}

/// A labeled record as written to label output files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub id: String,
    pub label: u8,
    pub evidence: Vec<EvidenceRecord>,
}

impl LabelRecord {
    pub fn new(report: &Report, label: &PriorLabel) -> Self {
        let evidence = label
            .evidence
            .iter()
            .map(|c| {
                let (start, end) = c.match_span.unwrap_or(c.mention.token_span);
                let tokens = &report.tokens[c.mention.sentence_index][start..end];
                EvidenceRecord {
                    sentence_index: c.mention.sentence_index,
                    span: [start, end],
                    rule: c.fired_rule.clone().unwrap_or_default(),
                    text: tokens.join(" "),
                }
            })
            .collect();
        LabelRecord {
            id: report.id.clone(),
            label: label.value,
            evidence,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub negative: usize,
    pub positive: usize,
    pub total: usize,
}

impl LabelCounts {
    pub fn from_values(values: impl IntoIterator<Item = u8>) -> Self {
        let mut counts = LabelCounts::default();
        for v in values {
            if v == 1 {
                counts.positive += 1;
            } else {
                counts.negative += 1;
            }
            counts.total += 1;
        }
        counts
    }
}

pub fn extract_mentions(report: &Report, rules: &RuleSet) -> Vec<Mention> {
    let mut mentions = Vec::new();
    for (sentence_index, tokens) in report.tokens.iter().enumerate() {
        for (pos, token) in tokens.iter().enumerate() {
            if let Some(k) = rules.keyword_for(token) {
                mentions.push(Mention {
                    keyword: rules.keywords[k].clone(),
                    sentence_index,
                    token_span: (pos, pos + 1),
                    surface: token.clone(),
                });
            }
        }
    }
    mentions
}

pub fn classify_mentions(
    report: &Report,
    mentions: &[Mention],
    rules: &RuleSet,
) -> Vec<ClassifiedMention> {
    mentions
        .iter()
        .map(|mention| classify_one(report, mention, rules))
        .collect()
}

fn classify_one(report: &Report, mention: &Mention, rules: &RuleSet) -> ClassifiedMention {
    let tokens = &report.tokens[mention.sentence_index];
    let decide = |verdict, rule: &Rule, span| ClassifiedMention {
        mention: mention.clone(),
        verdict,
        fired_rule: Some(rule.id.clone()),
        match_span: Some(span),
    };
    for rule in &rules.negations {
        if let Some(span) = rule.template.match_at(tokens, mention.token_span) {
            return decide(Verdict::Negated, rule, span);
        }
    }
    let change_verb = rules.is_change_verb(&mention.keyword);
    for rule in rules.priors.iter().filter(|r| r.is_change_rule() == change_verb) {
        if let Some(span) = rule.template.match_at(tokens, mention.token_span) {
            return decide(Verdict::PriorExpression, rule, span);
        }
    }
    ClassifiedMention {
        mention: mention.clone(),
        verdict: Verdict::Irrelevant,
        fired_rule: None,
        match_span: None,
    }
}

pub fn aggregate(classified: Vec<ClassifiedMention>) -> PriorLabel {
    let evidence: Vec<_> = classified
        .into_iter()
        .filter(|c| c.verdict == Verdict::PriorExpression)
        .collect();
    PriorLabel {
        value: u8::from(!evidence.is_empty()),
        evidence,
    }
}

pub fn label_report(report: &Report, rules: &RuleSet) -> PriorLabel {
    let mentions = extract_mentions(report, rules);
    aggregate(classify_mentions(report, &mentions, rules))
}

/// Label arbitrary text, e.g. a generated candidate report.
pub fn label_text(text: &str, rules: &RuleSet) -> PriorLabel {
    label_report(&Report::new("", text), rules)
}

/// Which text of a record the labeler reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum LabelTarget {
    #[default]
    Text,
    Reference,
    Candidate,
}

impl LabelTarget {
    pub fn report_for(self, record: &CorpusRecord) -> Result<Report> {
        let field = match self {
            LabelTarget::Text => return Ok(record.report.clone()),
            LabelTarget::Reference => ("reference", &record.reference),
            LabelTarget::Candidate => ("candidate", &record.candidate),
        };
        match field.1 {
            Some(text) => Ok(Report::new(record.id(), text.as_str())),
            None => Err(Error::MissingField {
                id: record.id().to_string(),
                field: field.0,
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusLabels {
    /// One entry per input record, in input order.
    pub records: Vec<(Report, PriorLabel)>,
    pub counts: LabelCounts,
}

impl CorpusLabels {
    pub fn label_records(&self) -> Vec<LabelRecord> {
        self.records
            .iter()
            .map(|(report, label)| LabelRecord::new(report, label))
            .collect()
    }

    pub fn values(&self) -> Vec<u8> {
        self.records.iter().map(|(_, l)| l.value).collect()
    }
}

pub fn label_corpus(records: &[CorpusRecord], rules: &RuleSet) -> CorpusLabels {
    label_records(records, rules, LabelTarget::Text).expect("record text is always present")
}

/// Label every record's `target` text in parallel; output keeps input order.
pub fn label_records(
    records: &[CorpusRecord],
    rules: &RuleSet,
    target: LabelTarget,
) -> Result<CorpusLabels> {
    let reports = records
        .iter()
        .map(|r| target.report_for(r))
        .collect::<Result<Vec<_>>>()?;
    let labeled: Vec<(Report, PriorLabel)> = reports
        .into_par_iter()
        .map(|report| {
            let label = label_report(&report, rules);
            (report, label)
        })
        .collect();
    let counts = LabelCounts::from_values(labeled.iter().map(|(_, l)| l.value));
    Ok(CorpusLabels {
        records: labeled,
        counts,
    })
}
