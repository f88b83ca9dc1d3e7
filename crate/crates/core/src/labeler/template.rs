//! Token templates used by negation and confirmation rules.
//!
//! A template is a space-separated list of atoms:
//!
//! * `word` matches one token exactly,
//! * `a|b|c` matches one token equal to any alternative,
//! * `..N` skips between 0 and N tokens (`..` alone skips up to 3),
//! * `{m}` binds the mention being classified. Exactly one per template.
//!
//! Matching is anchored on the mention: atoms left of `{m}` are matched
//! backwards from the token before the mention, atoms right of it forwards
//! from the token after. Gaps are lazy, so the reported span is the tightest
//! one the template allows.

use std::fmt;

use crate::error::{Error, Result};

pub const PLACEHOLDER: &str = "{m}";
pub const DEFAULT_GAP: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Atom {
    Literal(Vec<String>),
    Gap(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    source: String,
    /// Atoms before the mention, stored nearest-first.
    left: Vec<Atom>,
    right: Vec<Atom>,
}

impl Template {
    pub fn parse(source: &str) -> Result<Self> {
        let err = |message: String| Error::Template {
            template: source.to_string(),
            message,
        };
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut seen_placeholder = false;
        for word in source.split_whitespace() {
            if word == PLACEHOLDER {
                if seen_placeholder {
                    return Err(err(format!("more than one {PLACEHOLDER} placeholder")));
                }
                seen_placeholder = true;
                continue;
            }
            let atom = if let Some(bound) = word.strip_prefix("..") {
                let n = if bound.is_empty() {
                    DEFAULT_GAP
                } else {
                    bound
                        .parse()
                        .map_err(|_| err(format!("bad gap bound {word:?}")))?
                };
                Atom::Gap(n)
            } else {
                if word.contains('{') || word.contains('}') {
                    return Err(err(format!("unknown placeholder {word:?}")));
                }
                let alts: Vec<String> = word.split('|').map(str::to_lowercase).collect();
                if alts.iter().any(String::is_empty) {
                    return Err(err(format!("empty alternative in {word:?}")));
                }
                Atom::Literal(alts)
            };
            if seen_placeholder {
                right.push(atom);
            } else {
                left.push(atom);
            }
        }
        if !seen_placeholder {
            return Err(err(format!("missing {PLACEHOLDER} placeholder")));
        }
        left.reverse();
        Ok(Template {
            source: source.to_string(),
            left,
            right,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Match with `{m}` bound to `tokens[mention.0..mention.1]`; returns the
    /// token span covered by the whole template.
    pub fn match_at<S: AsRef<str>>(
        &self,
        tokens: &[S],
        mention: (usize, usize),
    ) -> Option<(usize, usize)> {
        let (start, end) = mention;
        if start >= end || end > tokens.len() {
            return None;
        }
        let after = match_seq(&self.right, tokens[end..].iter())?;
        let before = match_seq(&self.left, tokens[..start].iter().rev())?;
        Some((start - before, end + after))
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

/// Number of tokens consumed up to the last literal, or `None` on failure.
fn match_seq<'a, S, I>(atoms: &[Atom], tokens: I) -> Option<usize>
where
    S: AsRef<str> + 'a,
    I: Iterator<Item = &'a S>,
{
    let tokens: Vec<&str> = tokens.map(AsRef::as_ref).collect();
    match_from(atoms, &tokens, 0, 0)
}

fn match_from(atoms: &[Atom], tokens: &[&str], pos: usize, consumed: usize) -> Option<usize> {
    let Some((atom, rest)) = atoms.split_first() else {
        return Some(consumed);
    };
    match atom {
        Atom::Literal(alts) => {
            let token = tokens.get(pos)?;
            if alts.iter().any(|a| a == token) {
                match_from(rest, tokens, pos + 1, pos + 1)
            } else {
                None
            }
        }
        Atom::Gap(n) => (0..=*n)
            .take_while(|k| pos + k <= tokens.len())
            .find_map(|k| match_from(rest, tokens, pos + k, consumed)),
    }
}
