//! Multiple-choice → span recasting and gold span resolution.

use crate::corpus::{DocumentRecord, QAExample, SentenceRecord, SpanAddress, Supervision};

use super::{locate_answer_occurrences, AnswerMatcher, SkipReason};

/// Synthetic token inserted between concatenated documents. It normalizes
/// to nothing, so it can never be part of an answer match.
pub const DOC_SEPARATOR: &str = "|||";

/// Concatenates an example's documents (dataset order, one separator token
/// between documents) into a single document. Gold span and occurrence
/// metadata are cleared; supervision is untouched.
pub fn merge_documents(example: &QAExample) -> QAExample {
    let mut sentences: Vec<SentenceRecord> = Vec::new();
    for (d, doc) in example.documents.iter().enumerate() {
        if d > 0 {
            sentences.push(SentenceRecord {
                doc_index: 0,
                sent_index: 0,
                text: DOC_SEPARATOR.to_string(),
                tokens: vec![DOC_SEPARATOR.to_string()],
                contains_answer: false,
                is_supporting_fact: None,
            });
        }
        sentences.extend(doc.sentences.iter().cloned());
    }
    for (s, sent) in sentences.iter_mut().enumerate() {
        sent.doc_index = 0;
        sent.sent_index = s;
    }
    let mut out = example.clone();
    out.documents = vec![DocumentRecord {
        title: String::new(),
        sentences,
    }];
    out.gold_span = None;
    out.answer_occurrences = None;
    out
}

/// Concatenates all documents (dataset order, one separator token between
/// documents) into a single document and takes the first answer occurrence
/// as the gold span. All occurrences are retained for evaluation. The
/// candidate list, when present, is kept so span-trained models can later
/// be evaluated in the multiple-choice setting.
pub fn to_span(example: &QAExample, matcher: &AnswerMatcher) -> Result<QAExample, SkipReason> {
    let mut out = merge_documents(example);
    let occurrences = locate_answer_occurrences(&out, matcher);
    let Some(first) = occurrences.first().copied() else {
        return Err(SkipReason::AnswerNotFound);
    };
    out.gold_span = Some(first);
    out.answer_occurrences = Some(occurrences);
    out.supervision = Supervision::Span;
    out.unanswerable = false;
    Ok(out)
}

/// Fills in `gold_span` (first occurrence in concatenation order) and the
/// full occurrence list for a span-supervised example. An already-present
/// gold span (e.g. from character-offset alignment) is kept. Examples whose
/// answers never occur in the text are reported, as are non-extractive ones.
pub fn resolve_gold_span(
    example: &QAExample,
    matcher: &AnswerMatcher,
) -> Result<QAExample, SkipReason> {
    if example.non_extractive {
        return Err(SkipReason::NonExtractive);
    }
    let mut out = example.clone();
    let occurrences = locate_answer_occurrences(&out, matcher);
    if out.gold_span.is_none() {
        let Some(first) = occurrences.first().copied() else {
            return Err(SkipReason::AnswerNotFound);
        };
        out.gold_span = Some(first);
    }
    out.answer_occurrences = Some(occurrences);
    Ok(out)
}

/// Document-flat view of an example's context: all documents' tokens in
/// order with flat addressing, plus the sentence boundaries needed by
/// hierarchical models.
#[derive(Debug, Clone)]
pub struct FlatContext {
    pub tokens: Vec<String>,
    /// Flat token offset where each document starts.
    pub doc_offsets: Vec<usize>,
    /// (flat start, length) of every sentence, in (doc, sent) order.
    pub sentence_bounds: Vec<(usize, usize)>,
}

impl FlatContext {
    pub fn new(example: &QAExample) -> FlatContext {
        let mut tokens = Vec::new();
        let mut doc_offsets = Vec::new();
        let mut sentence_bounds = Vec::new();
        for doc in &example.documents {
            doc_offsets.push(tokens.len());
            for sent in &doc.sentences {
                sentence_bounds.push((tokens.len(), sent.tokens.len()));
                tokens.extend(sent.tokens.iter().cloned());
            }
        }
        FlatContext {
            tokens,
            doc_offsets,
            sentence_bounds,
        }
    }

    /// Converts a document-addressed span into flat token offsets.
    pub fn flatten_span(&self, span: &SpanAddress) -> (usize, usize) {
        let off = self.doc_offsets[span.doc];
        (off + span.start, off + span.end)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn mc_example(texts: &[&str], answer: &str) -> QAExample {
        QAExample {
            id: "e".to_string(),
            question_raw: "q".to_string(),
            question_tokens: tokenize("q"),
            query_relation: None,
            query_head: None,
            answers: vec![answer.to_string()],
            candidates: Some(vec![answer.to_string(), "other".to_string()]),
            documents: texts
                .iter()
                .enumerate()
                .map(|(d, t)| DocumentRecord::from_text(d, "", t))
                .collect(),
            gold_span: None,
            answer_occurrences: None,
            supervision: Supervision::MultipleChoice,
            non_extractive: false,
            unanswerable: false,
        }
    }

    #[test]
    fn first_occurrence_becomes_gold() {
        let ex = mc_example(
            &["filler words here. the target is near.", "target appears again."],
            "target",
        );
        let span = to_span(&ex, &AnswerMatcher::default()).unwrap();
        let gold = span.gold_span.unwrap();
        let flat = FlatContext::new(&span);
        let (s, e) = flat.flatten_span(&gold);
        assert_eq!(flat.tokens[s..=e], ["target".to_string()]);
        // tokens: filler words here . the target is near . → "target" at 5
        assert_eq!(s, 5);
        assert_eq!(span.answer_occurrences.as_ref().unwrap().len(), 2);
        assert_eq!(span.documents.len(), 1);
    }

    #[test]
    fn separator_token_sits_between_documents() {
        let ex = mc_example(&["one sentence.", "two sentence."], "two");
        let span = to_span(&ex, &AnswerMatcher::default()).unwrap();
        let flat = FlatContext::new(&span);
        assert!(flat.tokens.contains(&DOC_SEPARATOR.to_string()));
        let sep_pos = flat
            .tokens
            .iter()
            .position(|t| t == DOC_SEPARATOR)
            .unwrap();
        assert_eq!(sep_pos, 3); // "one sentence ." then separator
    }

    #[test]
    fn missing_answer_is_a_skip() {
        let ex = mc_example(&["nothing relevant here."], "absent");
        assert_eq!(
            to_span(&ex, &AnswerMatcher::default()).unwrap_err(),
            SkipReason::AnswerNotFound
        );
    }
}
