//! WikiHop loader: JSON array of {id, query, answer, candidates, supports}.

use std::path::Path;

use serde::Deserialize;

use super::{
    parse_json, read_to_string, tokenize, truncate_example, Dataset, DocumentRecord, LoadOptions,
    LoadStats, Loaded, QAExample, Result, Supervision,
};
use crate::transforms::AnswerMatcher;

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    query: String,
    answer: String,
    candidates: Vec<String>,
    supports: Vec<String>,
}

/// Loads a WikiHop-format file into multiple-choice examples. The query's
/// first whitespace-delimited field becomes the relation, the remainder the
/// head entity. Records whose answer matches no candidate are skipped and
/// counted.
pub fn load_wikihop(path: &Path, opts: &LoadOptions) -> Result<Loaded> {
    let text = read_to_string(path)?;
    let records: Vec<RawRecord> = parse_json(path, &text)?;
    let matcher = AnswerMatcher::default();
    let mut stats = LoadStats::default();
    let mut examples = Vec::new();

    for rec in records {
        // Deduplicate candidates by normalized form so exactly one can
        // match the answer.
        let mut candidates: Vec<String> = Vec::new();
        for c in rec.candidates {
            if !candidates.iter().any(|p| matcher.strings_match(p, &c)) {
                candidates.push(c);
            }
        }
        let answer_present = candidates
            .iter()
            .any(|c| matcher.strings_match(c, &rec.answer));
        if !answer_present {
            stats.skip("answer_not_in_candidates");
            continue;
        }

        let (relation, head) = match rec.query.split_once(char::is_whitespace) {
            Some((r, h)) => (r.to_string(), h.trim().to_string()),
            None => (rec.query.clone(), String::new()),
        };

        let documents: Vec<DocumentRecord> = rec
            .supports
            .iter()
            .enumerate()
            .map(|(d, support)| DocumentRecord::from_text(d, "", support))
            .filter(|d| !d.sentences.is_empty())
            .collect();
        let documents = reindex(documents);

        let mut example = QAExample {
            id: rec.id,
            question_tokens: tokenize(&rec.query),
            question_raw: rec.query,
            query_relation: Some(relation),
            query_head: if head.is_empty() { None } else { Some(head) },
            answers: vec![rec.answer],
            candidates: Some(candidates),
            documents,
            gold_span: None,
            answer_occurrences: None,
            supervision: Supervision::MultipleChoice,
            non_extractive: false,
            unanswerable: false,
        };
        truncate_example(&mut example, opts.max_context_tokens);
        example.check_invariants()?;
        examples.push(example);
    }

    stats.loaded = examples.len();
    Ok(Loaded {
        dataset: Dataset {
            name: opts.dataset_name(path),
            split: opts.split,
            examples,
        },
        stats,
    })
}

pub(crate) fn reindex(mut documents: Vec<DocumentRecord>) -> Vec<DocumentRecord> {
    for (d, doc) in documents.iter_mut().enumerate() {
        for (s, sent) in doc.sentences.iter_mut().enumerate() {
            sent.doc_index = d;
            sent.sent_index = s;
        }
    }
    documents
}
