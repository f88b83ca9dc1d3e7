use priorlab::analysis::{count_labels, stratify, ScoredReport, StratifyOptions};
use priorlab::corpus::{corpus_to_string, parse_corpus, split_sentences, tokenize, CorpusFormat, CorpusRecord, Report};
use priorlab::labeler::rules::DEFAULT_RULES;
use priorlab::labeler::{label_report, label_text, RuleSet, Verdict};
use priorlab::metrics::{cosine, evaluate_pairs, lcs_len, rouge_l, tfidf_vector, NGramIndex, ScoredPair};
use priorlab::numeric::compensated_sum;
use proptest::prelude::*;

const WORDS: &[&str] = &[
    "heart", "size", "is", "normal", "compared", "to", "prior", "previous", "again", "noted",
    "seen", "in", "the", "interval", "no", "comparison", "studies", "with", "made", "increased",
    "since", "unchanged", "from", "exam", "lungs", "clear", "opacity", "stable", "available",
    "not", "as", "previously", "change", "xxxx", "ill-defined", "during", "preceding",
];

fn word() -> impl Strategy<Value = &'static str> {
    prop::sample::select(WORDS)
}

/// One sentence that ends in a period and contains no internal break.
fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 1..9).prop_map(|ws| {
        let mut s = ws.join(" ");
        s[..1].make_ascii_uppercase();
        s.push('.');
        s
    })
}

fn report_text() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(sentence(), 1..6)
}

fn tokens() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(&["a", "b", "c", "d", "e"][..]), 0..12)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

fn free_text() -> impl Strategy<Value = String> {
    "[A-Za-z0-9 ,.;:\"'!?()/-]{1,40}"
}

fn rules_with(section: &str, line: &str) -> RuleSet {
    let header = format!("[{section}]\n");
    let text = DEFAULT_RULES.replacen(&header, &format!("{header}{line}\n"), 1);
    RuleSet::parse(&text).unwrap()
}

fn extra_template() -> impl Strategy<Value = String> {
    (word(), word(), prop::option::of(0usize..4), any::<bool>()).prop_map(|(a, b, gap, mention_first)| {
        let gap = gap.map(|g| format!("..{g} ")).unwrap_or_default();
        if mention_first {
            format!("{{m}} {gap}{a}")
        } else {
            format!("{a} {gap}{b} {{m}}")
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tokenize_idempotent(s in free_text()) {
        let once = tokenize(&s);
        prop_assert_eq!(tokenize(&once.join(" ")), once);
    }

    #[test]
    fn two_sentences_split_cleanly(a in sentence(), b in sentence()) {
        prop_assert_eq!(split_sentences(&format!("{a} {b}")), vec![a, b]);
    }

    #[test]
    fn corpus_round_trip(
        rows in prop::collection::vec(
            (free_text(), prop::option::of(free_text()), prop::option::of(free_text()), prop::option::of(0u8..2)),
            0..6,
        ),
        csv in any::<bool>(),
    ) {
        let records: Vec<CorpusRecord> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (text, reference, candidate, label))| {
                let mut r = CorpusRecord::new(format!("id-{i}"), text);
                if let Some(x) = reference { r = r.with_reference(x); }
                if let Some(x) = candidate { r = r.with_candidate(x); }
                if let Some(l) = label { r = r.with_gold_label(l); }
                r
            })
            .collect();
        let format = if csv { CorpusFormat::Csv } else { CorpusFormat::Jsonl };
        let first = corpus_to_string(&records, format).unwrap();
        let parsed = parse_corpus(&first, format).unwrap();
        prop_assert_eq!(&parsed, &records);
        prop_assert_eq!(corpus_to_string(&parsed, format).unwrap(), first);
    }

    #[test]
    fn labeling_is_deterministic(s in report_text()) {
        let rules = RuleSet::default_rules();
        let text = s.join(" ");
        prop_assert_eq!(label_text(&text, &rules), label_text(&text, &rules));
    }

    #[test]
    fn extra_prior_rule_never_unlabels(s in report_text(), t in extra_template()) {
        let text = s.join(" ");
        let base = label_text(&text, &RuleSet::default_rules()).value;
        let more = label_text(&text, &rules_with("priors", &format!("extra-prior: {t}"))).value;
        prop_assert!(more >= base);
    }

    #[test]
    fn extra_negation_never_labels(s in report_text(), t in extra_template()) {
        let text = s.join(" ");
        let base = label_text(&text, &RuleSet::default_rules()).value;
        let more = label_text(&text, &rules_with("negations", &format!("extra-neg: {t}"))).value;
        prop_assert!(more <= base);
    }

    #[test]
    fn dropping_unused_sentence_keeps_label(s in report_text(), pick in any::<prop::sample::Index>()) {
        let rules = RuleSet::default_rules();
        let label = label_text(&s.join(" "), &rules);
        let drop = pick.index(s.len());
        prop_assume!(label.evidence.iter().all(|e| e.mention.sentence_index != drop));
        let mut rest = s.clone();
        rest.remove(drop);
        prop_assert_eq!(label_text(&rest.join(" "), &rules).value, label.value);
    }

    #[test]
    fn concatenation_is_disjunction(a in report_text(), b in report_text()) {
        let rules = RuleSet::default_rules();
        let la = label_text(&a.join(" "), &rules).value;
        let lb = label_text(&b.join(" "), &rules).value;
        let lab = label_text(&format!("{} {}", a.join(" "), b.join(" ")), &rules).value;
        prop_assert_eq!(lab, la | lb);
    }

    #[test]
    fn evidence_is_sound(s in report_text()) {
        let rules = RuleSet::default_rules();
        let report = Report::new("p", s.join(" "));
        let label = label_report(&report, &rules);
        prop_assert_eq!(label.value == 1, !label.evidence.is_empty());
        for e in &label.evidence {
            prop_assert_eq!(e.verdict, Verdict::PriorExpression);
            let tokens = &report.tokens[e.mention.sentence_index];
            let (ms, me) = e.mention.token_span;
            prop_assert!(e.mention.keyword.matches(&tokens[ms]));
            prop_assert_eq!(me, ms + 1);
            let rule = rules.rule(e.fired_rule.as_deref().unwrap()).unwrap();
            let span = rule.template.match_at(tokens, e.mention.token_span);
            prop_assert_eq!(span, e.match_span);
            let (ss, se) = span.unwrap();
            prop_assert!(ss <= ms && me <= se && se <= tokens.len());
        }
    }

    #[test]
    fn corpus_metrics_ignore_order(
        pairs in prop::collection::vec((tokens(), tokens()), 1..8)
            .prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle())),
    ) {
        let build = |v: &[(Vec<String>, Vec<String>)]| -> Vec<ScoredPair> {
            v.iter()
                .enumerate()
                .map(|(i, (c, r))| ScoredPair { id: i.to_string(), candidate: c.clone(), reference: r.clone() })
                .collect()
        };
        let a = evaluate_pairs(&build(&pairs.0)).unwrap().corpus;
        let b = evaluate_pairs(&build(&pairs.1)).unwrap().corpus;
        prop_assert_eq!(a.bleu, b.bleu);
        prop_assert!((a.rouge_l - b.rouge_l).abs() <= 1e-12);
        prop_assert!((a.cider - b.cider).abs() <= 1e-12);
    }

    #[test]
    fn lcs_grows_with_shared_suffix(a in tokens(), b in tokens(), t in "[a-f]") {
        let before = lcs_len(&a, &b);
        let (mut a2, mut b2) = (a.clone(), b.clone());
        a2.push(t.clone());
        b2.push(t);
        prop_assert!(lcs_len(&a2, &b2) >= before);
        prop_assert!(before <= a.len().min(b.len()));
    }

    #[test]
    fn rouge_symmetric_for_equal_lengths(pair in (1usize..10).prop_flat_map(|n| {
        let v = || prop::collection::vec(prop::sample::select(&["a", "b", "c"][..]), n);
        (v(), v())
    })) {
        prop_assert_eq!(rouge_l(&pair.0, &pair.1), rouge_l(&pair.1, &pair.0));
    }

    #[test]
    fn cider_cosines_scale_free(c in tokens(), r in tokens(), others in prop::collection::vec(tokens(), 0..4), k in 0.01f64..100.0, n in 1usize..5) {
        let mut refs = others;
        refs.push(r.clone());
        let index = NGramIndex::build(&refs);
        let (vc, vr) = (tfidf_vector(&c, n, &index), tfidf_vector(&r, n, &index));
        let scale = |v: &priorlab::metrics::cider::TfIdfVector| v.iter().map(|(g, w)| (g.clone(), w * k)).collect();
        let scaled = cosine(&scale(&vc), &scale(&vr));
        prop_assert!((scaled - cosine(&vc, &vr)).abs() <= 1e-12);
    }

    #[test]
    fn strata_merge_to_overall_mean(
        rows in prop::collection::vec((0.0f64..1.0, 0u8..2), 1..60),
    ) {
        let scores: Vec<ScoredReport> = rows
            .iter()
            .enumerate()
            .map(|(i, &(score, label))| ScoredReport { id: i.to_string(), score, label, token_count: Some(i) })
            .collect();
        let summary = stratify(&scores, StratifyOptions::default()).unwrap();
        let overall = compensated_sum(rows.iter().map(|r| r.0)) / rows.len() as f64;
        prop_assert!((summary.merged_mean().unwrap() - overall).abs() <= 1e-12);
        prop_assert_eq!(summary.total_count(), rows.len());
        for s in [&summary.negative, &summary.positive].into_iter().flatten() {
            prop_assert_eq!(s.histogram.total(), s.count as u64);
            prop_assert!(s.std >= 0.0 && s.min <= s.mean && s.mean <= s.max);
        }
    }

    #[test]
    fn counts_ignore_order(
        texts in prop::collection::vec(report_text(), 0..8)
            .prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle())),
    ) {
        let rules = RuleSet::default_rules();
        let label = |v: &[Vec<String>]| v.iter().map(|s| label_text(&s.join(" "), &rules)).collect::<Vec<_>>();
        let a = count_labels(&label(&texts.0));
        let b = count_labels(&label(&texts.1));
        prop_assert_eq!(a, b);
        prop_assert_eq!(a.total, a.negative + a.positive);
    }
}
