//! Canonical data model and loaders for the three source dataset formats.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod canonical;
mod hotpotqa;
mod squad;
mod tokenize;
mod vocab;
mod wikihop;

pub use canonical::{read_canonical, write_canonical, SCHEMA_VERSION};
pub use hotpotqa::load_hotpotqa;
pub use squad::load_squad;
pub use tokenize::{
    detokenize, split_sentences, split_sentences_with_offsets, tokenize, tokenize_with_offsets,
    TokenSpan,
};
pub use vocab::{Vocab, PAD_INDEX, UNK_INDEX};
pub use wikihop::load_wikihop;

/// One tokenized sentence inside a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub doc_index: usize,
    pub sent_index: usize,
    /// Raw sentence text with original casing, kept for entity extraction.
    pub text: String,
    /// Lowercased tokens; never empty (empty sentences are dropped at load).
    pub tokens: Vec<String>,
    #[serde(default)]
    pub contains_answer: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_supporting_fact: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    /// May be empty for WikiHop and SQuAD documents.
    pub title: String,
    pub sentences: Vec<SentenceRecord>,
}

impl DocumentRecord {
    /// Builds a document from raw text: sentence-split, tokenize, drop
    /// sentences that tokenize to nothing, renumber contiguously.
    pub fn from_text(doc_index: usize, title: &str, text: &str) -> DocumentRecord {
        let mut sentences = Vec::new();
        for raw in split_sentences(text) {
            let tokens = tokenize(&raw);
            if tokens.is_empty() {
                continue;
            }
            sentences.push(SentenceRecord {
                doc_index,
                sent_index: sentences.len(),
                text: raw,
                tokens,
                contains_answer: false,
                is_supporting_fact: None,
            });
        }
        DocumentRecord {
            title: title.to_string(),
            sentences,
        }
    }

    /// Flattened tokens of the document, in sentence order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.sentences
            .iter()
            .flat_map(|s| s.tokens.iter().map(String::as_str))
    }

    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }

    /// Tokens in the document-flat range `[start, end]` (inclusive).
    pub fn token_range(&self, start: usize, end: usize) -> Vec<String> {
        self.tokens()
            .skip(start)
            .take(end + 1 - start)
            .map(str::to_string)
            .collect()
    }
}

/// A token span addressed as (document, start token, end token), end inclusive,
/// with token positions counted across the document's flattened sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpanAddress {
    pub doc: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Supervision {
    Span,
    MultipleChoice,
}

/// One question with its documents, answers and supervision signal; the
/// record every probe and model consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAExample {
    pub id: String,
    pub question_raw: String,
    pub question_tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_relation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_head: Option<String>,
    /// Non-empty list of acceptable answer strings.
    pub answers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<String>>,
    pub documents: Vec<DocumentRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_span: Option<SpanAddress>,
    /// Every answer occurrence, filled in when spans are resolved; any of
    /// them counts as correct at evaluation time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer_occurrences: Option<Vec<SpanAddress>>,
    pub supervision: Supervision,
    /// Answers like HotpotQA's yes/no that are not a passage span.
    #[serde(default)]
    pub non_extractive: bool,
    /// Set when no sentence contains any answer string.
    #[serde(default)]
    pub unanswerable: bool,
}

impl QAExample {
    /// Sentences of all documents in (doc_index, sent_index) order.
    pub fn flat_sentences(&self) -> Vec<&SentenceRecord> {
        self.documents
            .iter()
            .flat_map(|d| d.sentences.iter())
            .collect()
    }

    pub fn num_sentences(&self) -> usize {
        self.documents.iter().map(|d| d.sentences.len()).sum()
    }

    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(|d| d.num_tokens()).sum()
    }

    /// Detokenized text at a span address (tokens joined by single spaces).
    pub fn span_text(&self, span: &SpanAddress) -> String {
        let doc = &self.documents[span.doc];
        detokenize(&doc.token_range(span.start, span.end))
    }

    /// Structural invariants every loader and transform must uphold.
    pub fn check_invariants(&self) -> Result<()> {
        if self.answers.is_empty() {
            return Err(Error::Data(format!("example {}: empty answers", self.id)));
        }
        for (d, doc) in self.documents.iter().enumerate() {
            for (s, sent) in doc.sentences.iter().enumerate() {
                if sent.tokens.is_empty() {
                    return Err(Error::Data(format!(
                        "example {}: empty sentence ({d},{s})",
                        self.id
                    )));
                }
                if sent.doc_index != d || sent.sent_index != s {
                    return Err(Error::Data(format!(
                        "example {}: sentence addressed ({},{}) stored at ({d},{s})",
                        self.id, sent.doc_index, sent.sent_index
                    )));
                }
            }
        }
        if let Some(span) = &self.gold_span {
            if span.end < span.start {
                return Err(Error::Data(format!(
                    "example {}: gold span end before start",
                    self.id
                )));
            }
            let doc = self.documents.get(span.doc).ok_or_else(|| {
                Error::Data(format!("example {}: gold span document out of range", self.id))
            })?;
            if span.end >= doc.num_tokens() {
                return Err(Error::Data(format!(
                    "example {}: gold span exceeds document token range",
                    self.id
                )));
            }
        }
        if self.supervision == Supervision::MultipleChoice && self.candidates.is_none() {
            return Err(Error::Data(format!(
                "example {}: multiple-choice supervision without candidates",
                self.id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl std::str::FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Split> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!("unknown split '{other}'"))),
        }
    }
}

/// A named split of examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub split: Split,
    pub examples: Vec<QAExample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

/// Skip and warning accounting produced by a loader.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    pub loaded: usize,
    /// Skipped record counts keyed by reason.
    pub skipped: BTreeMap<String, usize>,
    /// Counts of noteworthy events that did not drop a record.
    pub annotations: BTreeMap<String, usize>,
    pub warnings: Vec<String>,
}

impl LoadStats {
    pub fn skip(&mut self, reason: &str) {
        *self.skipped.entry(reason.to_string()).or_insert(0) += 1;
    }

    pub fn annotate(&mut self, key: &str) {
        *self.annotations.entry(key.to_string()).or_insert(0) += 1;
    }
}

/// A loaded dataset together with its skip accounting.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub dataset: Dataset,
    pub stats: LoadStats,
}

/// Loader knobs shared by all three formats.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Dataset name; defaults to the input file stem.
    pub name: Option<String>,
    pub split: Split,
    /// Per-example token cap; whole sentences are trimmed from the end of
    /// the longest documents until the example fits.
    pub max_context_tokens: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            name: None,
            split: Split::Train,
            max_context_tokens: 2400,
        }
    }
}

impl LoadOptions {
    pub(crate) fn dataset_name(&self, path: &Path) -> String {
        self.name.clone().unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".to_string())
        })
    }
}

/// Trims whole sentences from the end of the longest documents until the
/// example fits in `cap` tokens. Documents that end up empty are removed
/// and the remaining documents are re-indexed.
pub fn truncate_example(example: &mut QAExample, cap: usize) -> bool {
    let mut truncated = false;
    while example.total_tokens() > cap {
        let longest = example
            .documents
            .iter()
            .enumerate()
            .max_by(|(ai, a), (bi, b)| a.num_tokens().cmp(&b.num_tokens()).then(bi.cmp(ai)))
            .map(|(i, _)| i);
        let Some(i) = longest else { break };
        if example.documents[i].sentences.pop().is_none() {
            break;
        }
        truncated = true;
    }
    if truncated {
        example.documents.retain(|d| !d.sentences.is_empty());
        for (d, doc) in example.documents.iter_mut().enumerate() {
            for (s, sent) in doc.sentences.iter_mut().enumerate() {
                sent.doc_index = d;
                sent.sent_index = s;
            }
        }
        // A gold span set before truncation may no longer be addressable.
        if let Some(span) = example.gold_span {
            let valid = example
                .documents
                .get(span.doc)
                .is_some_and(|d| span.end < d.num_tokens());
            if !valid {
                example.gold_span = None;
            }
        }
        example.answer_occurrences = None;
    }
    truncated
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses a whole-file JSON value, reporting the byte offset on failure.
pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::JsonParse {
        path: path.to_path_buf(),
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })
}

/// Converts serde_json's 1-based line/column into a byte offset.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut offset = 0;
    for (i, l) in text.split('\n').enumerate() {
        if i + 1 == line {
            return offset + column.saturating_sub(1).min(l.len());
        }
        offset += l.len() + 1;
    }
    text.len()
}
