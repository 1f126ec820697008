//! SQuAD v1.1 loader: character-offset answers are converted to token
//! spans over a sentence-split single document per paragraph.

use std::path::Path;

use serde::Deserialize;

use super::{
    parse_json, read_to_string, split_sentences_with_offsets, tokenize, tokenize_with_offsets,
    truncate_example, Dataset, DocumentRecord, LoadOptions, LoadStats, Loaded, QAExample, Result,
    SentenceRecord, SpanAddress, Supervision,
};

#[derive(Deserialize)]
struct RawSquad {
    data: Vec<RawArticle>,
}

#[derive(Deserialize)]
struct RawArticle {
    #[serde(default)]
    title: String,
    paragraphs: Vec<RawParagraph>,
}

#[derive(Deserialize)]
struct RawParagraph {
    context: String,
    qas: Vec<RawQa>,
}

#[derive(Deserialize)]
struct RawQa {
    id: String,
    question: String,
    answers: Vec<RawAnswer>,
}

#[derive(Deserialize)]
struct RawAnswer {
    text: String,
    answer_start: usize,
}

/// Loads a SQuAD v1.1 file. Every question becomes one single-document
/// example with span supervision; character answer offsets are expanded to
/// the covering token range (expansions are counted in the stats).
pub fn load_squad(path: &Path, opts: &LoadOptions) -> Result<Loaded> {
    let text = read_to_string(path)?;
    let raw: RawSquad = parse_json(path, &text)?;
    let mut stats = LoadStats::default();
    let mut examples = Vec::new();

    for article in &raw.data {
        for paragraph in &article.paragraphs {
            let (document, token_chars) = build_document(&article.title, &paragraph.context);
            if document.sentences.is_empty() {
                stats.skip("empty_paragraph");
                continue;
            }
            for qa in &paragraph.qas {
                let Some(first) = qa.answers.first() else {
                    stats.skip("no_answers");
                    continue;
                };
                let answers: Vec<String> =
                    qa.answers.iter().map(|a| a.text.clone()).collect();
                let ans_start = first.answer_start;
                let ans_end = ans_start + first.text.chars().count();
                let covering: Vec<usize> = token_chars
                    .iter()
                    .enumerate()
                    .filter(|(_, (s, e))| *s < ans_end && *e > ans_start)
                    .map(|(i, _)| i)
                    .collect();
                let Some((&lo, &hi)) = covering.first().zip(covering.last()) else {
                    stats.skip("answer_outside_tokens");
                    continue;
                };
                let exact = token_chars[lo].0 == ans_start && token_chars[hi].1 == ans_end;
                if !exact {
                    stats.annotate("expanded_to_covering_tokens");
                }
                let mut example = QAExample {
                    id: qa.id.clone(),
                    question_tokens: tokenize(&qa.question),
                    question_raw: qa.question.clone(),
                    query_relation: None,
                    query_head: None,
                    answers,
                    candidates: None,
                    documents: vec![document.clone()],
                    gold_span: Some(SpanAddress {
                        doc: 0,
                        start: lo,
                        end: hi,
                    }),
                    answer_occurrences: None,
                    supervision: Supervision::Span,
                    non_extractive: false,
                    unanswerable: false,
                };
                truncate_example(&mut example, opts.max_context_tokens);
                example.check_invariants()?;
                examples.push(example);
            }
        }
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

/// Sentence-splits and tokenizes a paragraph, returning the document and
/// the absolute `[start, end)` character range of every flattened token.
fn build_document(title: &str, context: &str) -> (DocumentRecord, Vec<(usize, usize)>) {
    let mut sentences = Vec::new();
    let mut token_chars = Vec::new();
    for (sent_text, sent_start) in split_sentences_with_offsets(context) {
        let spans = tokenize_with_offsets(&sent_text);
        if spans.is_empty() {
            continue;
        }
        let tokens: Vec<String> = spans.iter().map(|s| s.token.clone()).collect();
        for s in &spans {
            token_chars.push((sent_start + s.start, sent_start + s.end));
        }
        sentences.push(SentenceRecord {
            doc_index: 0,
            sent_index: sentences.len(),
            text: sent_text,
            tokens,
            contains_answer: false,
            is_supporting_fact: None,
        });
    }
    (
        DocumentRecord {
            title: title.to_string(),
            sentences,
        },
        token_chars,
    )
}
