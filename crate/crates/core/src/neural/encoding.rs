//! Token-id views of examples, shared by every model family.

use crate::corpus::{QAExample, Vocab};
use crate::transforms::{AnswerMatcher, FlatContext};

#[derive(Debug, Clone)]
pub struct EncodedCandidate {
    pub text: String,
    pub ids: Vec<usize>,
}

/// An example converted to vocabulary indices, with the flat-context view
/// and gold targets all model families read.
#[derive(Debug, Clone)]
pub struct EncodedExample {
    pub id: String,
    pub question: Vec<usize>,
    /// Token ids per sentence, in (doc, sent) order.
    pub sentences: Vec<Vec<usize>>,
    /// (doc_index, sent_index) per flat sentence position.
    pub sentence_addr: Vec<(usize, usize)>,
    /// Flat indices of sentences flagged `contains_answer`.
    pub gold_sentences: Vec<usize>,
    pub unanswerable: bool,
    /// All documents' token ids concatenated in order.
    pub context: Vec<usize>,
    /// The corresponding token strings (for span text extraction).
    pub context_tokens: Vec<String>,
    /// (flat start, length) per sentence into `context`.
    pub sentence_bounds: Vec<(usize, usize)>,
    pub candidates: Option<Vec<EncodedCandidate>>,
    /// Candidate index matching an answer, when candidates exist.
    pub gold_candidate: Option<usize>,
    /// Gold span in flat-context offsets (inclusive end).
    pub gold_span: Option<(usize, usize)>,
    /// All answer occurrences in flat-context offsets.
    pub occurrences: Vec<(usize, usize)>,
    /// Gold answer strings, for span metric evaluation.
    pub answers: Vec<String>,
}

impl EncodedExample {
    pub fn from_example(ex: &QAExample, vocab: &Vocab, matcher: &AnswerMatcher) -> EncodedExample {
        let flat = FlatContext::new(ex);
        let mut sentences = Vec::new();
        let mut sentence_addr = Vec::new();
        let mut gold_sentences = Vec::new();
        for (i, sent) in ex.flat_sentences().iter().enumerate() {
            sentences.push(vocab.encode(&sent.tokens));
            sentence_addr.push((sent.doc_index, sent.sent_index));
            if sent.contains_answer {
                gold_sentences.push(i);
            }
        }
        let candidates = ex.candidates.as_ref().map(|cands| {
            cands
                .iter()
                .map(|c| EncodedCandidate {
                    text: c.clone(),
                    ids: vocab.encode(&crate::corpus::tokenize(c)),
                })
                .collect::<Vec<_>>()
        });
        let gold_candidate = ex.candidates.as_ref().and_then(|cands| {
            cands
                .iter()
                .position(|c| ex.answers.iter().any(|a| matcher.strings_match(c, a)))
        });
        let gold_span = ex.gold_span.as_ref().map(|s| flat.flatten_span(s));
        let occurrences = ex
            .answer_occurrences
            .as_ref()
            .map(|occ| occ.iter().map(|s| flat.flatten_span(s)).collect())
            .unwrap_or_default();
        EncodedExample {
            id: ex.id.clone(),
            question: vocab.encode(&ex.question_tokens),
            sentences,
            sentence_addr,
            gold_sentences,
            unanswerable: ex.unanswerable,
            context: vocab.encode(&flat.tokens),
            context_tokens: flat.tokens.clone(),
            sentence_bounds: flat.sentence_bounds.clone(),
            candidates,
            gold_candidate,
            gold_span,
            occurrences,
            answers: ex.answers.clone(),
        }
    }

    pub fn num_sentences(&self) -> usize {
        self.sentences.len()
    }

    pub fn context_len(&self) -> usize {
        self.context.len()
    }

    /// Detokenized text of a flat-context span (inclusive end).
    pub fn span_text(&self, start: usize, end: usize) -> String {
        self.context_tokens[start..=end].join(" ")
    }
}

/// Encodes a whole dataset in example order.
pub fn encode_dataset(
    dataset: &crate::corpus::Dataset,
    vocab: &Vocab,
    matcher: &AnswerMatcher,
) -> Vec<EncodedExample> {
    dataset
        .examples
        .iter()
        .map(|ex| EncodedExample::from_example(ex, vocab, matcher))
        .collect()
}
