//! Distractor pool extraction: capitalized-run entity mentions.

use crate::corpus::QAExample;

use super::AnswerMatcher;

/// One entity mention with its document-flat token address.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMention {
    /// Raw-cased mention text, tokens joined by spaces.
    pub text: String,
    pub doc: usize,
    pub start: usize,
}

/// The distractor pool of one example: capitalized-run mentions,
/// deduplicated by normalized string, excluding gold answers and mentions
/// already present in the question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityInventory {
    pub example_id: String,
    pub entities: Vec<EntityMention>,
}

impl EntityInventory {
    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }
}

const MAX_RUN_TOKENS: usize = 6;

/// Extracts maximal runs (length 1–6) of capitalized raw-text tokens as
/// entity mentions. Deterministic: mentions appear in document order.
pub fn extract_entity_inventory(example: &QAExample, matcher: &AnswerMatcher) -> EntityInventory {
    let mut entities: Vec<EntityMention> = Vec::new();
    let mut seen: Vec<Vec<String>> = Vec::new();

    for (d, doc) in example.documents.iter().enumerate() {
        let mut flat_offset = 0;
        for sent in &doc.sentences {
            let raw_tokens = tokenize_cased(&sent.text);
            // The cased split must mirror the stored lowercased tokens.
            debug_assert_eq!(raw_tokens.len(), sent.tokens.len());
            let mut i = 0;
            while i < raw_tokens.len() {
                if !is_capitalized(&raw_tokens[i]) {
                    i += 1;
                    continue;
                }
                let mut j = i;
                while j + 1 < raw_tokens.len() && is_capitalized(&raw_tokens[j + 1]) {
                    j += 1;
                }
                let run_end = j.min(i + MAX_RUN_TOKENS - 1);
                let text = raw_tokens[i..=run_end].join(" ");
                let normalized = matcher.normalize_answer(&text);
                let excluded = normalized.is_empty()
                    || example
                        .answers
                        .iter()
                        .any(|a| matcher.normalize_answer(a) == normalized)
                    || question_contains(example, &text, matcher)
                    || seen.contains(&normalized);
                if !excluded {
                    seen.push(normalized);
                    entities.push(EntityMention {
                        text,
                        doc: d,
                        start: flat_offset + i,
                    });
                }
                i = j + 1;
            }
            flat_offset += sent.tokens.len();
        }
    }

    EntityInventory {
        example_id: example.id.clone(),
        entities,
    }
}

fn question_contains(example: &QAExample, mention: &str, matcher: &AnswerMatcher) -> bool {
    super::answer_matches(&example.question_tokens, mention, matcher)
}

/// A token counts as capitalized when its first character is uppercase.
fn is_capitalized(token: &str) -> bool {
    token.chars().next().is_some_and(char::is_uppercase)
}

/// Same segmentation as the corpus tokenizer but preserving case.
fn tokenize_cased(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut run = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            run.push(ch);
        } else {
            if !run.is_empty() {
                tokens.push(std::mem::take(&mut run));
            }
            if !ch.is_whitespace() {
                tokens.push(ch.to_string());
            }
        }
    }
    if !run.is_empty() {
        tokens.push(run);
    }
    tokens
}
