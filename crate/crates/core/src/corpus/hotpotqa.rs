//! HotpotQA loader: JSON array of {_id, question, answer, context,
//! supporting_facts}.

use std::path::Path;

use serde::Deserialize;

use super::{
    parse_json, read_to_string, tokenize, truncate_example, Dataset, DocumentRecord, LoadOptions,
    LoadStats, Loaded, QAExample, Result, SentenceRecord, Supervision,
};

#[derive(Deserialize)]
struct RawRecord {
    #[serde(rename = "_id")]
    id: String,
    question: String,
    answer: String,
    /// [title, [sentence, ...]] pairs.
    context: Vec<(String, Vec<String>)>,
    /// [title, sentence index] pairs.
    supporting_facts: Vec<(String, usize)>,
}

/// Loads a HotpotQA-format file into span-supervised examples. The gold
/// span stays unset until span resolution; supporting-fact sentences are
/// flagged. Facts naming a missing title or sentence index are dropped
/// with a warning.
pub fn load_hotpotqa(path: &Path, opts: &LoadOptions) -> Result<Loaded> {
    let text = read_to_string(path)?;
    let records: Vec<RawRecord> = parse_json(path, &text)?;
    let mut stats = LoadStats::default();
    let mut examples = Vec::new();

    for rec in records {
        let mut documents = Vec::new();
        for (title, raw_sentences) in &rec.context {
            // Supporting facts address sentences by their original index,
            // so flags are applied before empty sentences are dropped.
            let mut sentences = Vec::new();
            for (orig_index, raw) in raw_sentences.iter().enumerate() {
                let tokens = tokenize(raw);
                if tokens.is_empty() {
                    if rec
                        .supporting_facts
                        .iter()
                        .any(|(t, i)| t == title && *i == orig_index)
                    {
                        stats.warnings.push(format!(
                            "{}: supporting fact ({title}, {orig_index}) addresses an empty sentence; dropped",
                            rec.id
                        ));
                    }
                    continue;
                }
                let supporting = rec
                    .supporting_facts
                    .iter()
                    .any(|(t, i)| t == title && *i == orig_index);
                sentences.push(SentenceRecord {
                    doc_index: documents.len(),
                    sent_index: sentences.len(),
                    text: raw.trim().to_string(),
                    tokens,
                    contains_answer: false,
                    is_supporting_fact: Some(supporting),
                });
            }
            if sentences.is_empty() {
                continue;
            }
            documents.push(DocumentRecord {
                title: title.clone(),
                sentences,
            });
        }
        let documents = super::wikihop::reindex(documents);

        for (title, idx) in &rec.supporting_facts {
            let known = rec
                .context
                .iter()
                .any(|(t, sents)| t == title && *idx < sents.len());
            if !known {
                stats
                    .warnings
                    .push(format!("{}: supporting fact ({title}, {idx}) not found; dropped", rec.id));
            }
        }

        let non_extractive = matches!(rec.answer.as_str(), "yes" | "no");
        let mut example = QAExample {
            id: rec.id,
            question_tokens: tokenize(&rec.question),
            question_raw: rec.question,
            query_relation: None,
            query_head: None,
            answers: vec![rec.answer],
            candidates: None,
            documents,
            gold_span: None,
            answer_occurrences: None,
            supervision: Supervision::Span,
            non_extractive,
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
