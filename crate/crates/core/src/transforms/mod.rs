//! Supervision recasting and answer-location labeling.
//!
//! All transforms are pure functions of `(example, parameters, seed)`;
//! per-example randomness is derived from `(seed, example.id)` so parallel
//! application order cannot change outputs. Transforms never silently drop
//! an example: every skip carries a counted reason.

use std::collections::BTreeMap;

use crate::corpus::{Dataset, QAExample};

mod entities;
mod matcher;
mod mc;
mod span;
mod sweep;

pub use entities::{extract_entity_inventory, EntityInventory, EntityMention};
pub use matcher::{
    answer_matches, label_answer_sentences, locate_answer_occurrences, AnswerMatcher,
    Normalization,
};
pub use mc::to_multiple_choice;
pub use span::{merge_documents, resolve_gold_span, to_span, FlatContext, DOC_SEPARATOR};
pub use sweep::sweep_option_counts;

/// Why a transform skipped an example.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    /// Entity inventory smaller than the requested distractor count.
    InsufficientEntities,
    /// No answer occurrence in any document.
    AnswerNotFound,
    /// Yes/no style answer that is not a passage span.
    NonExtractive,
}

impl SkipReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            SkipReason::InsufficientEntities => "insufficient_entities",
            SkipReason::AnswerNotFound => "answer_not_found",
            SkipReason::NonExtractive => "non_extractive",
        }
    }
}

/// Skip counts keyed by reason.
pub type SkipCounts = BTreeMap<String, usize>;

pub(crate) trait Bump {
    fn bump(&mut self, key: &str);
}

impl Bump for SkipCounts {
    fn bump(&mut self, key: &str) {
        *self.entry(key.to_string()).or_insert(0) += 1;
    }
}

/// A transformed dataset together with its skip accounting.
#[derive(Debug, Clone)]
pub struct TransformOutcome {
    pub dataset: Dataset,
    pub skipped: SkipCounts,
}

/// Deterministic 64-bit seed derived from an experiment seed and a string
/// tag (FNV-1a mix); used wherever per-example randomness is needed.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed.wrapping_mul(PRIME);
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(PRIME);
    }
    h
}

fn apply_per_example(
    dataset: &Dataset,
    suffix: &str,
    mut f: impl FnMut(&QAExample) -> Result<QAExample, SkipReason>,
) -> TransformOutcome {
    let mut examples = Vec::new();
    let mut skipped = SkipCounts::new();
    for ex in &dataset.examples {
        match f(ex) {
            Ok(out) => examples.push(out),
            Err(reason) => skipped.bump(reason.as_str()),
        }
    }
    TransformOutcome {
        dataset: Dataset {
            name: format!("{}{suffix}", dataset.name),
            split: dataset.split,
            examples,
        },
        skipped,
    }
}

/// Dataset-level [`to_multiple_choice`].
pub fn to_multiple_choice_dataset(
    dataset: &Dataset,
    num_distractors: usize,
    seed: u64,
    matcher: &AnswerMatcher,
) -> TransformOutcome {
    apply_per_example(dataset, "-mc", |ex| {
        to_multiple_choice(ex, num_distractors, seed, matcher)
    })
}

/// Dataset-level [`to_span`].
pub fn to_span_dataset(dataset: &Dataset, matcher: &AnswerMatcher) -> TransformOutcome {
    apply_per_example(dataset, "-span", |ex| to_span(ex, matcher))
}

/// Dataset-level [`resolve_gold_span`]; non-extractive and answerless
/// examples are skipped with counted reasons.
pub fn resolve_spans_dataset(dataset: &Dataset, matcher: &AnswerMatcher) -> TransformOutcome {
    apply_per_example(dataset, "", |ex| resolve_gold_span(ex, matcher))
}

/// Dataset-level [`label_answer_sentences`] (never skips; unanswerable
/// examples are flagged on the example itself).
pub fn label_dataset(dataset: &Dataset, matcher: &AnswerMatcher) -> Dataset {
    Dataset {
        name: dataset.name.clone(),
        split: dataset.split,
        examples: dataset
            .examples
            .iter()
            .map(|ex| label_answer_sentences(ex, matcher))
            .collect(),
    }
}
