//! Report ingestion and text normalization.
//!
//! Every other module consumes reports through [`Report`], which carries the
//! Findings section split into sentences and per-sentence lowercase tokens.
//! The tokenizer here is shared by the labeler and the metrics so that keyword
//! matching and n-gram counting see identical token streams.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Section headers that terminate a Findings block.
const END_HEADERS: [&str; 2] = ["impression:", "recommendation:"];
const FINDINGS_HEADER: &str = "findings:";

/// Words that end in a period without ending the sentence.
const ABBREVIATIONS: [&str; 12] = [
    "dr", "vs", "a.m", "p.m", "e.g", "i.e", "mr", "mrs", "ms", "approx", "fig", "st",
];

/// Normalized deidentification mask.
pub const MASK_TOKEN: &str = "xxxx";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub id: String,
    pub raw_text: String,
    pub findings: String,
    pub sentences: Vec<String>,
    /// Lowercase tokens, one list per entry of `sentences`.
    pub tokens: Vec<Vec<String>>,
}

impl Report {
    pub fn new(id: impl Into<String>, raw_text: impl Into<String>) -> Self {
        let raw_text = raw_text.into();
        let findings = extract_findings(&raw_text).to_string();
        let sentences = split_sentences(&findings);
        let tokens = sentences.iter().map(|s| tokenize(s)).collect();
        Report {
            id: id.into(),
            raw_text,
            findings,
            sentences,
            tokens,
        }
    }

    pub fn token_count(&self) -> usize {
        self.tokens.iter().map(Vec::len).sum()
    }

    /// All tokens of the Findings text in reading order.
    pub fn flat_tokens(&self) -> Vec<String> {
        self.tokens.iter().flatten().cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRecord {
    pub report: Report,
    pub reference: Option<String>,
    pub candidate: Option<String>,
    pub gold_label: Option<u8>,
}

impl CorpusRecord {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        CorpusRecord {
            report: Report::new(id, text),
            reference: None,
            candidate: None,
            gold_label: None,
        }
    }

    pub fn with_reference(mut self, reference: impl Into<String>) -> Self {
        self.reference = Some(reference.into());
        self
    }

    pub fn with_candidate(mut self, candidate: impl Into<String>) -> Self {
        self.candidate = Some(candidate.into());
        self
    }

    pub fn with_gold_label(mut self, label: u8) -> Self {
        self.gold_label = Some(label);
        self
    }

    pub fn id(&self) -> &str {
        &self.report.id
    }

    fn to_raw(&self) -> RawRecord {
        RawRecord {
            id: self.report.id.clone(),
            text: self.report.raw_text.clone(),
            reference: self.reference.clone(),
            candidate: self.candidate.clone(),
            label: self.gold_label,
        }
    }
}

/// On-disk record layout shared by the JSONL and CSV readers.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawRecord {
    id: String,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    candidate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guess from the file extension; anything other than `.csv` is JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Vec<CorpusRecord>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Malformed {
        line: 0,
        offset: e.utf8_error().valid_up_to() as u64,
        message: "file is not valid UTF-8".into(),
    })?;
    parse_corpus(&text, format)
}

pub fn parse_corpus(text: &str, format: CorpusFormat) -> Result<Vec<CorpusRecord>> {
    let raws = match format {
        CorpusFormat::Jsonl => parse_jsonl(text)?,
        CorpusFormat::Csv => parse_csv(text)?,
    };
    let mut seen = HashSet::with_capacity(raws.len());
    let mut records = Vec::with_capacity(raws.len());
    for (line, offset, raw) in raws {
        if let Some(label) = raw.label {
            if label > 1 {
                return Err(Error::Malformed {
                    line,
                    offset,
                    message: format!("label must be 0 or 1, got {label}"),
                });
            }
        }
        if !seen.insert(raw.id.clone()) {
            return Err(Error::DuplicateId(raw.id));
        }
        records.push(CorpusRecord {
            report: Report::new(raw.id, raw.text),
            reference: raw.reference,
            candidate: raw.candidate,
            gold_label: raw.label,
        });
    }
    Ok(records)
}

fn parse_jsonl(text: &str) -> Result<Vec<(u64, u64, RawRecord)>> {
    let mut out = Vec::new();
    let mut offset = 0u64;
    for (idx, line) in text.split('\n').enumerate() {
        let line_no = idx as u64 + 1;
        let start = offset;
        offset += line.len() as u64 + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| Error::Malformed {
            line: line_no,
            offset: start,
            message: e.to_string(),
        })?;
        out.push((line_no, start, raw));
    }
    Ok(out)
}

fn parse_csv(text: &str) -> Result<Vec<(u64, u64, RawRecord)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let mut out = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let read = reader.read_record(&mut record).map_err(|e| csv_error(&e))?;
        if !read {
            break;
        }
        let (line, offset) = record
            .position()
            .map(|p| (p.line(), p.byte()))
            .unwrap_or((0, 0));
        let raw: RawRecord = record
            .deserialize(Some(&headers))
            .map_err(|e| Error::Malformed {
                line,
                offset,
                message: e.to_string(),
            })?;
        out.push((line, offset, raw));
    }
    Ok(out)
}

fn csv_error(e: &csv::Error) -> Error {
    let (line, offset) = e
        .position()
        .map(|p| (p.line(), p.byte()))
        .unwrap_or((0, 0));
    Error::Malformed {
        line,
        offset,
        message: e.to_string(),
    }
}

/// Serialize records in the same layout [`load_corpus`] reads.
pub fn corpus_to_string(records: &[CorpusRecord], format: CorpusFormat) -> Result<String> {
    match format {
        CorpusFormat::Jsonl => {
            let mut out = String::new();
            for record in records {
                out.push_str(&serde_json::to_string(&record.to_raw())?);
                out.push('\n');
            }
            Ok(out)
        }
        CorpusFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(["id", "text", "reference", "candidate", "label"])?;
            for record in records {
                let raw = record.to_raw();
                let label = raw.label.map(|l| l.to_string()).unwrap_or_default();
                writer.write_record([
                    raw.id.as_str(),
                    raw.text.as_str(),
                    raw.reference.as_deref().unwrap_or(""),
                    raw.candidate.as_deref().unwrap_or(""),
                    label.as_str(),
                ])?;
            }
            let bytes = writer
                .into_inner()
                .map_err(|e| Error::InvalidInput(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
        }
    }
}

/// Text after a case-insensitive `FINDINGS:` header, up to the next
/// `IMPRESSION:` / `RECOMMENDATION:` header. Without a header the input is
/// returned unchanged.
pub fn extract_findings(raw_text: &str) -> &str {
    // ASCII lowercasing keeps byte offsets aligned with `raw_text`.
    let lower = raw_text.to_ascii_lowercase();
    let Some(header) = find_header(&lower, FINDINGS_HEADER, 0) else {
        return raw_text;
    };
    let start = header + FINDINGS_HEADER.len();
    let end = END_HEADERS
        .iter()
        .filter_map(|h| find_header(&lower, h, start))
        .min()
        .unwrap_or(raw_text.len());
    raw_text[start..end].trim()
}

/// Position of `header` at or after `from`, not preceded by a word character.
fn find_header(haystack: &str, header: &str, from: usize) -> Option<usize> {
    let mut search = from;
    while let Some(rel) = haystack[search..].find(header) {
        let pos = search + rel;
        let boundary = haystack[..pos]
            .chars()
            .next_back()
            .is_none_or(|c| !c.is_alphanumeric());
        if boundary {
            return Some(pos);
        }
        search = pos + header.len();
    }
    None
}

pub fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((pos, c)) = chars.next() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let at_boundary = chars.peek().is_none_or(|&(_, next)| next.is_whitespace());
        if !at_boundary || (c == '.' && ends_with_abbreviation(&text[start..pos])) {
            continue;
        }
        let end = pos + c.len_utf8();
        push_trimmed(&mut sentences, &text[start..end]);
        start = end;
    }
    push_trimmed(&mut sentences, &text[start..]);
    sentences
}

fn push_trimmed(out: &mut Vec<String>, piece: &str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece.to_string());
    }
}

fn ends_with_abbreviation(before_period: &str) -> bool {
    let word = before_period
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or("")
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase();
    let mut chars = word.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => c.is_alphabetic(),
        (Some(_), Some(_)) => ABBREVIATIONS.contains(&word.as_str()),
        _ => false,
    }
}

/// Lowercase, whitespace-split tokens with leading and trailing punctuation
/// removed. Internal punctuation (hyphens, slashes, decimal points) survives,
/// and any run of four or more `x` characters becomes [`MASK_TOKEN`].
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence
        .to_lowercase()
        .split_whitespace()
        .filter_map(|raw| {
            let token = raw.trim_matches(|c: char| !c.is_alphanumeric());
            if token.is_empty() {
                None
            } else if token.len() >= MASK_TOKEN.len() && token.bytes().all(|b| b == b'x') {
                Some(MASK_TOKEN.to_string())
            } else {
                Some(token.to_string())
            }
        })
        .collect()
}
