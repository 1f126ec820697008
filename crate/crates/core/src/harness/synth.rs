//! Bundled synthetic corpora for desk-scale runs.
//!
//! Each generator plants one specific, known signal (or none at all, for
//! the null corpora), so trained accuracy has a meaning: the planted
//! signal is learnable, chance is analytic, and everything is a pure
//! function of the seed.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Dataset, DocumentRecord, QAExample, SentenceRecord, Split, Supervision};
use crate::transforms::derive_seed;

#[derive(Debug, Clone, Copy)]
pub struct SynthSpec {
    pub train: usize,
    pub dev: usize,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(train: usize, dev: usize, seed: u64) -> SynthSpec {
        SynthSpec { train, dev, seed }
    }
}

pub struct SynthPair {
    pub train: Dataset,
    pub dev: Dataset,
}

/// Builds a sentence from display tokens: the raw text keeps the original
/// casing (entity extraction reads it), stored tokens are lowercased.
fn sentence(doc: usize, sent: usize, display: Vec<String>, contains_answer: bool) -> SentenceRecord {
    SentenceRecord {
        doc_index: doc,
        sent_index: sent,
        text: display.join(" "),
        tokens: display.iter().map(|t| t.to_lowercase()).collect(),
        contains_answer,
        is_supporting_fact: None,
    }
}

fn split_into_documents(sentences: Vec<SentenceRecord>, per_doc: usize) -> Vec<DocumentRecord> {
    let mut documents = Vec::new();
    for chunk in sentences.chunks(per_doc) {
        let d = documents.len();
        let sents = chunk
            .iter()
            .enumerate()
            .map(|(s, rec)| SentenceRecord {
                doc_index: d,
                sent_index: s,
                ..rec.clone()
            })
            .collect();
        documents.push(DocumentRecord {
            title: String::new(),
            sentences: sents,
        });
    }
    documents
}

fn base_example(id: String, question: Vec<String>, answers: Vec<String>) -> QAExample {
    QAExample {
        id,
        question_raw: question.join(" "),
        question_tokens: question,
        query_relation: None,
        query_head: None,
        answers,
        candidates: None,
        documents: Vec::new(),
        gold_span: None,
        answer_occurrences: None,
        supervision: Supervision::Span,
        non_extractive: false,
        unanswerable: false,
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &'a [String]) -> &'a String {
    &pool[rng.random_range(0..pool.len())]
}

fn words(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:02}")).collect()
}

/// Planted lexical-overlap corpus: the answer-bearing sentence shares a
/// keyword with the question (and carries a dedicated answer token); every
/// other sentence carries a different keyword. Eight sentences per example
/// across two documents, so the random baseline sits at 1/8.
pub fn lexical_overlap_corpus(spec: SynthSpec) -> SynthPair {
    let keywords = words("key", 16);
    let fillers = words("fill", 60);
    let answers = words("ans", 24);
    let build = |split: Split, count: usize, tag: &str, seed: u64| {
        let mut examples = Vec::with_capacity(count);
        for i in 0..count {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("{tag}-{i}")));
            let keyword = pick(&mut rng, &keywords).clone();
            let answer = pick(&mut rng, &answers).clone();
            let gold_at = rng.random_range(0..8);
            let mut sentences = Vec::new();
            for s in 0..8 {
                let mut tokens: Vec<String> =
                    (0..5).map(|_| pick(&mut rng, &fillers).clone()).collect();
                if s == gold_at {
                    tokens[rng.random_range(0..5)] = answer.clone();
                    let mut slot = rng.random_range(0..5);
                    while tokens[slot] == answer {
                        slot = rng.random_range(0..5);
                    }
                    tokens[slot] = keyword.clone();
                } else {
                    let mut other = pick(&mut rng, &keywords).clone();
                    while other == keyword {
                        other = pick(&mut rng, &keywords).clone();
                    }
                    tokens[rng.random_range(0..5)] = other;
                }
                sentences.push(sentence(0, s, tokens, s == gold_at));
            }
            let question = vec![
                keyword,
                pick(&mut rng, &fillers).clone(),
                pick(&mut rng, &fillers).clone(),
            ];
            let mut ex = base_example(format!("lex-{tag}-{i}"), question, vec![answer]);
            ex.documents = split_into_documents(sentences, 4);
            examples.push(ex);
        }
        Dataset {
            name: "synth-lexical".into(),
            split,
            examples,
        }
    };
    SynthPair {
        train: build(Split::Train, spec.train, "train", spec.seed),
        dev: build(Split::Dev, spec.dev, "dev", spec.seed.wrapping_add(1)),
    }
}

const NUM_TYPES: usize = 8;
const TYPE_TOKENS: [&str; NUM_TYPES] = ["bel", "cor", "dun", "fen", "gor", "hul", "jas", "kiv"];

/// Entity mention of a typed pool: a type morpheme plus an id token
/// ("bel k07"), optionally title-cased for raw document text.
fn typed_entity(type_index: usize, id: usize, capitalized: bool) -> String {
    let morpheme = TYPE_TOKENS[type_index];
    if capitalized {
        let mut m = morpheme.to_string();
        m[..1].make_ascii_uppercase();
        format!("{m} K{id:02}")
    } else {
        format!("{morpheme} k{id:02}")
    }
}

/// Planted candidate-type corpus (natively multiple choice): the question
/// names a type morpheme and exactly one candidate carries it. A
/// no-context scorer can reach high accuracy from the type association
/// alone; the documents are mostly uncorrelated filler.
pub fn candidate_type_corpus(spec: SynthSpec) -> SynthPair {
    let fillers = words("fad", 40);
    let build = |split: Split, count: usize, tag: &str, seed: u64| {
        let mut examples = Vec::with_capacity(count);
        for i in 0..count {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("{tag}-{i}")));
            let answer_type = rng.random_range(0..NUM_TYPES);
            let answer = typed_entity(answer_type, rng.random_range(0..30), false);
            let mut candidates = vec![answer.clone()];
            while candidates.len() < 10 {
                let mut other_type = rng.random_range(0..NUM_TYPES);
                while other_type == answer_type {
                    other_type = rng.random_range(0..NUM_TYPES);
                }
                let cand = typed_entity(other_type, rng.random_range(0..30), false);
                if !candidates.contains(&cand) {
                    candidates.push(cand);
                }
            }
            candidates.shuffle(&mut rng);
            let question = vec![
                TYPE_TOKENS[answer_type].to_string(),
                pick(&mut rng, &fillers).clone(),
                pick(&mut rng, &fillers).clone(),
            ];
            let mut ex = base_example(format!("type-{tag}-{i}"), question, vec![answer.clone()]);
            // Two filler sentences around one containing the answer, so
            // the corpus also works for full (context-reading) MC models.
            let answer_tokens: Vec<String> =
                answer.split(' ').map(str::to_string).collect();
            let mut middle = vec![pick(&mut rng, &fillers).clone()];
            middle.extend(answer_tokens);
            middle.push(pick(&mut rng, &fillers).clone());
            let sentences = vec![
                sentence(
                    0,
                    0,
                    (0..5).map(|_| pick(&mut rng, &fillers).clone()).collect(),
                    false,
                ),
                sentence(0, 1, middle, true),
                sentence(
                    0,
                    2,
                    (0..5).map(|_| pick(&mut rng, &fillers).clone()).collect(),
                    false,
                ),
            ];
            ex.documents = split_into_documents(sentences, 3);
            ex.candidates = Some(candidates);
            ex.supervision = Supervision::MultipleChoice;
            examples.push(ex);
        }
        Dataset {
            name: "synth-type".into(),
            split,
            examples,
        }
    };
    SynthPair {
        train: build(Split::Train, spec.train, "train", spec.seed),
        dev: build(Split::Dev, spec.dev, "dev", spec.seed.wrapping_add(1)),
    }
}

/// Entity-rich span corpus for the option-count sweep. Documents carry
/// 60 distinct capitalized two-token entities drawn from all eight type
/// pools, so the multiple-choice recast can sample up to 49 distractors;
/// because distractors share the answer's type pool, a type-matching
/// scorer's expected accuracy decays as the option count grows.
pub fn entity_sweep_corpus(spec: SynthSpec) -> SynthPair {
    let fillers = words("mur", 30);
    let build = |split: Split, count: usize, tag: &str, seed: u64| {
        let mut examples = Vec::with_capacity(count);
        for i in 0..count {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("{tag}-{i}")));
            let answer_type = rng.random_range(0..NUM_TYPES);
            let answer = typed_entity(answer_type, rng.random_range(0..40), true);
            // 60 distinct entities from all pools, answer planted once.
            let mut entity_set: Vec<String> = Vec::new();
            while entity_set.len() < 60 {
                let t = rng.random_range(0..NUM_TYPES);
                let e = typed_entity(t, rng.random_range(0..40), true);
                if e != answer && !entity_set.contains(&e) {
                    entity_set.push(e);
                }
            }
            let answer_slot = rng.random_range(0..entity_set.len());
            entity_set[answer_slot] = answer.clone();

            // 12 sentences × 5 entities, lowercase filler between mentions
            // so capitalized runs stay one entity long.
            let mut sentences = Vec::new();
            for s in 0..12 {
                let mut tokens = Vec::new();
                let mut has_answer = false;
                for k in 0..5 {
                    tokens.push(pick(&mut rng, &fillers).clone());
                    let ent = &entity_set[s * 5 + k];
                    if ent == &answer {
                        has_answer = true;
                    }
                    tokens.extend(ent.split(' ').map(str::to_string));
                }
                tokens.push(pick(&mut rng, &fillers).clone());
                sentences.push(sentence(0, s, tokens, has_answer));
            }
            let question = vec![
                TYPE_TOKENS[answer_type].to_string(),
                pick(&mut rng, &fillers).clone(),
                pick(&mut rng, &fillers).clone(),
            ];
            let mut ex = base_example(format!("sweep-{tag}-{i}"), question, vec![answer]);
            ex.documents = split_into_documents(sentences, 4);
            examples.push(ex);
        }
        Dataset {
            name: "synth-sweep".into(),
            split,
            examples,
        }
    };
    SynthPair {
        train: build(Split::Train, spec.train, "train", spec.seed),
        dev: build(Split::Dev, spec.dev, "dev", spec.seed.wrapping_add(1)),
    }
}

/// Null sentence corpus: the labeled sentence is chosen uniformly at
/// random and nothing in the text correlates with it. Every example has
/// exactly 8 sentences, so any predictor's answer-location accuracy has
/// expectation 1/8.
pub fn null_sentence_corpus(spec: SynthSpec) -> SynthPair {
    let fillers = words("nul", 80);
    let build = |split: Split, count: usize, tag: &str, seed: u64| {
        let mut examples = Vec::with_capacity(count);
        for i in 0..count {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("{tag}-{i}")));
            let gold_at = rng.random_range(0..8);
            let sentences: Vec<SentenceRecord> = (0..8)
                .map(|s| {
                    let tokens: Vec<String> =
                        (0..6).map(|_| pick(&mut rng, &fillers).clone()).collect();
                    sentence(0, s, tokens, s == gold_at)
                })
                .collect();
            let question: Vec<String> =
                (0..3).map(|_| pick(&mut rng, &fillers).clone()).collect();
            // The answer string never occurs in the text; the labels are
            // assigned directly and must not be recomputed by matching.
            let mut ex = base_example(format!("nullsent-{tag}-{i}"), question, vec!["__never__".into()]);
            ex.documents = split_into_documents(sentences, 4);
            examples.push(ex);
        }
        Dataset {
            name: "synth-null-sentence".into(),
            split,
            examples,
        }
    };
    SynthPair {
        train: build(Split::Train, spec.train, "train", spec.seed),
        dev: build(Split::Dev, spec.dev, "dev", spec.seed.wrapping_add(1)),
    }
}

/// Null multiple-choice corpus: ten distinct candidates from one shared
/// pool, gold position uniform, question and documents uncorrelated.
/// Chance accuracy is exactly 1/10 for any predictor.
pub fn null_mc_corpus(spec: SynthSpec) -> SynthPair {
    let pool = words("cnd", 60);
    let fillers = words("nox", 40);
    let build = |split: Split, count: usize, tag: &str, seed: u64| {
        let mut examples = Vec::with_capacity(count);
        for i in 0..count {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("{tag}-{i}")));
            let mut candidates: Vec<String> = Vec::new();
            while candidates.len() < 10 {
                let c = pick(&mut rng, &pool).clone();
                if !candidates.contains(&c) {
                    candidates.push(c);
                }
            }
            let gold = rng.random_range(0..candidates.len());
            let answer = candidates[gold].clone();
            let question: Vec<String> =
                (0..3).map(|_| pick(&mut rng, &fillers).clone()).collect();
            let sentences: Vec<SentenceRecord> = (0..4)
                .map(|s| {
                    let tokens: Vec<String> =
                        (0..6).map(|_| pick(&mut rng, &fillers).clone()).collect();
                    sentence(0, s, tokens, false)
                })
                .collect();
            let mut ex = base_example(format!("nullmc-{tag}-{i}"), question, vec![answer]);
            ex.documents = split_into_documents(sentences, 4);
            ex.candidates = Some(candidates);
            ex.supervision = Supervision::MultipleChoice;
            examples.push(ex);
        }
        Dataset {
            name: "synth-null-mc".into(),
            split,
            examples,
        }
    };
    SynthPair {
        train: build(Split::Train, spec.train, "train", spec.seed),
        dev: build(Split::Dev, spec.dev, "dev", spec.seed.wrapping_add(1)),
    }
}

/// Null span corpus: 24 distinct tokens per context, the gold span is one
/// uniformly chosen token, and nothing correlates with its position.
/// Exact-match chance is exactly 1/24 for any predictor.
pub fn null_span_corpus(spec: SynthSpec) -> SynthPair {
    let pool = words("spn", 200);
    let build = |split: Split, count: usize, tag: &str, seed: u64| {
        let mut examples = Vec::with_capacity(count);
        for i in 0..count {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("{tag}-{i}")));
            let mut tokens: Vec<String> = Vec::new();
            while tokens.len() < 24 {
                let t = pick(&mut rng, &pool).clone();
                if !tokens.contains(&t) {
                    tokens.push(t);
                }
            }
            let gold = rng.random_range(0..24);
            let answer = tokens[gold].clone();
            let sentences: Vec<SentenceRecord> = tokens
                .chunks(6)
                .enumerate()
                .map(|(s, chunk)| {
                    let has = chunk.iter().any(|t| *t == answer);
                    sentence(0, s, chunk.to_vec(), has)
                })
                .collect();
            let question: Vec<String> = (0..3).map(|_| pick(&mut rng, &pool).clone()).collect();
            let mut ex = base_example(format!("nullspan-{tag}-{i}"), question, vec![answer]);
            ex.documents = vec![DocumentRecord {
                title: String::new(),
                sentences,
            }];
            ex.gold_span = Some(crate::corpus::SpanAddress {
                doc: 0,
                start: gold,
                end: gold,
            });
            ex.answer_occurrences = Some(vec![crate::corpus::SpanAddress {
                doc: 0,
                start: gold,
                end: gold,
            }]);
            examples.push(ex);
        }
        Dataset {
            name: "synth-null-span".into(),
            split,
            examples,
        }
    };
    SynthPair {
        train: build(Split::Train, spec.train, "train", spec.seed),
        dev: build(Split::Dev, spec.dev, "dev", spec.seed.wrapping_add(1)),
    }
}

/// Span corpus with a planted pointer signal: the question's keyword
/// appears once in the context, immediately followed by the answer token.
pub fn span_overlap_corpus(spec: SynthSpec) -> SynthPair {
    let keywords = words("mark", 16);
    let fillers = words("pad", 60);
    let answers = words("tgt", 24);
    let build = |split: Split, count: usize, tag: &str, seed: u64| {
        let mut examples = Vec::with_capacity(count);
        for i in 0..count {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("{tag}-{i}")));
            let keyword = pick(&mut rng, &keywords).clone();
            let answer = pick(&mut rng, &answers).clone();
            let gold_sentence = rng.random_range(0..4);
            let mut sentences = Vec::new();
            let mut gold_flat = None;
            let mut flat = 0usize;
            for s in 0..4 {
                let mut tokens: Vec<String> =
                    (0..6).map(|_| pick(&mut rng, &fillers).clone()).collect();
                if s == gold_sentence {
                    let at = rng.random_range(0..5);
                    tokens[at] = keyword.clone();
                    tokens[at + 1] = answer.clone();
                    gold_flat = Some(flat + at + 1);
                } else {
                    let mut other = pick(&mut rng, &keywords).clone();
                    while other == keyword {
                        other = pick(&mut rng, &keywords).clone();
                    }
                    tokens[rng.random_range(0..6)] = other;
                }
                flat += tokens.len();
                sentences.push(sentence(0, s, tokens, s == gold_sentence));
            }
            let gold = gold_flat.unwrap();
            let question = vec![
                keyword,
                pick(&mut rng, &fillers).clone(),
                pick(&mut rng, &fillers).clone(),
            ];
            let mut ex = base_example(format!("spanlex-{tag}-{i}"), question, vec![answer]);
            ex.documents = vec![DocumentRecord {
                title: String::new(),
                sentences,
            }];
            ex.gold_span = Some(crate::corpus::SpanAddress {
                doc: 0,
                start: gold,
                end: gold,
            });
            examples.push(ex);
        }
        Dataset {
            name: "synth-span-overlap".into(),
            split,
            examples,
        }
    };
    SynthPair {
        train: build(Split::Train, spec.train, "train", spec.seed),
        dev: build(Split::Dev, spec.dev, "dev", spec.seed.wrapping_add(1)),
    }
}
