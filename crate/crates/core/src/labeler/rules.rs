//! Rules-file loading.
//!
//! ```text
//! # comment
//! [keywords]
//! prior
//! increase stem
//! [negations]
//! no-comparison-study: no|without ..1 {m} study|studies
//! [priors]
//! again-noted: {m} ..2 seen|noted
//! change-since: {m} ..4 since
//! [change_verbs]
//! increase
//! ```
//!
//! Prior rules whose id starts with [`CHANGE_RULE_PREFIX`] carry a comparative
//! marker and are the only rules consulted for change-verb mentions. All
//! other prior rules apply to the remaining keywords.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use super::template::Template;
use crate::error::{Error, Result};

pub const DEFAULT_RULES: &str = include_str!("../../data/default.rules");
pub const DEFAULT_RULES_VERSION: &str = "1.0";
pub const CHANGE_RULE_PREFIX: &str = "change-";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    Exact,
    StemPrefix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keyword {
    pub surface: String,
    pub mode: MatchMode,
}

impl Keyword {
    pub fn matches(&self, token: &str) -> bool {
        match self.mode {
            MatchMode::Exact => token == self.surface,
            MatchMode::StemPrefix => token.starts_with(&self.surface),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub template: Template,
}

impl Rule {
    pub fn new(id: impl Into<String>, template: &str) -> Result<Self> {
        Ok(Rule {
            id: id.into(),
            template: Template::parse(template)?,
        })
    }

    pub fn is_change_rule(&self) -> bool {
        self.id.starts_with(CHANGE_RULE_PREFIX)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleSet {
    pub keywords: Vec<Keyword>,
    pub negations: Vec<Rule>,
    pub priors: Vec<Rule>,
    /// Surfaces of keywords that only count with a comparative marker.
    pub change_verbs: Vec<String>,
}

#[derive(Clone, Copy)]
enum Section {
    Keywords,
    Negations,
    Priors,
    ChangeVerbs,
}

impl RuleSet {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// The bundled rule set.
    pub fn default_rules() -> Self {
        Self::parse(DEFAULT_RULES).expect("bundled rules file is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rules = RuleSet::default();
        let mut section = None;
        let mut ids = HashSet::new();
        let mut change_lines = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let syntax = |message: String| Error::RulesSyntax {
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = Some(match name.trim() {
                    "keywords" => Section::Keywords,
                    "negations" => Section::Negations,
                    "priors" => Section::Priors,
                    "change_verbs" => Section::ChangeVerbs,
                    other => return Err(syntax(format!("unknown section [{other}]"))),
                });
                continue;
            }
            match section {
                None => return Err(syntax("entry before any section header".into())),
                Some(Section::Keywords) => {
                    let mut parts = line.split_whitespace();
                    let surface = parts.next().unwrap_or_default().to_lowercase();
                    let mode = match parts.next() {
                        None => MatchMode::Exact,
                        Some("stem") => MatchMode::StemPrefix,
                        Some(other) => {
                            return Err(syntax(format!("unknown match mode {other:?}")))
                        }
                    };
                    if parts.next().is_some() {
                        return Err(syntax("keyword lines take `surface [stem]`".into()));
                    }
                    if rules.keywords.iter().any(|k| k.surface == surface) {
                        return Err(syntax(format!("duplicate keyword {surface:?}")));
                    }
                    rules.keywords.push(Keyword { surface, mode });
                }
                Some(kind @ (Section::Negations | Section::Priors)) => {
                    let (id, template) = line
                        .split_once(':')
                        .ok_or_else(|| syntax("expected `rule-id: template`".into()))?;
                    let id = id.trim();
                    if id.is_empty() || id.contains(char::is_whitespace) {
                        return Err(syntax(format!("bad rule id {id:?}")));
                    }
                    if !ids.insert(id.to_string()) {
                        return Err(syntax(format!("duplicate rule id {id:?}")));
                    }
                    let rule = Rule::new(id, template.trim())?;
                    match kind {
                        Section::Negations => rules.negations.push(rule),
                        _ => rules.priors.push(rule),
                    }
                }
                Some(Section::ChangeVerbs) => {
                    if line.contains(char::is_whitespace) {
                        return Err(syntax("change_verbs lines hold one keyword".into()));
                    }
                    change_lines.push((line_no, line.to_lowercase()));
                }
            }
        }

        for (line, surface) in change_lines {
            if !rules.keywords.iter().any(|k| k.surface == surface) {
                return Err(Error::RulesSyntax {
                    line,
                    message: format!("change verb {surface:?} is not a keyword"),
                });
            }
            if !rules.change_verbs.contains(&surface) {
                rules.change_verbs.push(surface);
            }
        }
        Ok(rules)
    }

    pub fn is_change_verb(&self, keyword: &Keyword) -> bool {
        self.change_verbs.contains(&keyword.surface)
    }

    /// Index of the keyword entry a token matches: longest surface wins,
    /// ties go to the entry listed first.
    pub fn keyword_for(&self, token: &str) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (idx, keyword) in self.keywords.iter().enumerate() {
            if !keyword.matches(token) {
                continue;
            }
            match best {
                Some(b) if self.keywords[b].surface.len() >= keyword.surface.len() => {}
                _ => best = Some(idx),
            }
        }
        best
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.negations
            .iter()
            .chain(&self.priors)
            .find(|r| r.id == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_rules_cover_listed_keywords() {
        let rules = RuleSet::default_rules();
        for kw in [
            "previous",
            "prior",
            "preceding",
            "previously",
            "again",
            "comparison",
            "interval",
            "increase",
            "decrease",
            "enlarge",
        ] {
            assert!(
                rules.keywords.iter().any(|k| k.surface == kw),
                "missing keyword {kw}"
            );
        }
        for verb in &rules.change_verbs {
            assert!(rules.keywords.iter().any(|k| &k.surface == verb));
        }
        assert!(DEFAULT_RULES.contains(&format!("rules-version: {DEFAULT_RULES_VERSION}")));
    }

    #[test]
    fn empty_keywords_section() {
        let rules = RuleSet::parse("[keywords]\n[priors]\n").unwrap();
        assert!(rules.keywords.is_empty());
    }

    #[test]
    fn template_without_placeholder_is_rejected() {
        let err = RuleSet::parse("[priors]\nbad: compared to\n").unwrap_err();
        assert!(err.to_string().contains("compared to"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let cases = [
            ("prior\n", 1),
            ("[keywords]\nprior fuzzy\n", 2),
            ("[bogus]\n", 1),
            ("[priors]\n\n# c\nno colon here\n", 4),
            ("[priors]\na: {m} x\na: {m} y\n", 3),
            ("[keywords]\nprior\n[change_verbs]\nincrease\n", 4),
        ];
        for (text, line) in cases {
            match RuleSet::parse(text) {
                Err(Error::RulesSyntax { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn keyword_tie_breaking() {
        let rules = RuleSet::parse("[keywords]\nprev stem\nprevious stem\nprevi stem\n").unwrap();
        assert_eq!(rules.keyword_for("previously"), Some(1));
        assert_eq!(rules.keyword_for("prevx"), Some(0));
        assert_eq!(rules.keyword_for("other"), None);

        let tied = RuleSet::parse("[keywords]\nabc stem\nabc\n");
        assert!(tied.is_err(), "duplicate surfaces are rejected");
    }

    #[test]
    fn stem_and_exact_modes() {
        let stem = Keyword {
            surface: "increase".into(),
            mode: MatchMode::StemPrefix,
        };
        assert!(stem.matches("increased"));
        assert!(stem.matches("increases"));
        assert!(!stem.matches("increasing"));
        let exact = Keyword {
            surface: "prior".into(),
            mode: MatchMode::Exact,
        };
        assert!(exact.matches("prior"));
        assert!(!exact.matches("priors"));
    }
}
