//! Random-sentence baseline: pick a sentence uniformly and check whether
//! it contains the answer.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomBaseline {
    /// Monte-Carlo estimate over `trials` draws per example.
    pub sampled: f64,
    /// Closed form: mean over examples of |s*| / n_sentences.
    pub expected: f64,
    /// Standard error of the sampled estimate.
    pub std_error: f64,
    pub trials: usize,
}

/// Estimates random-sentence answer-location accuracy on a dataset whose
/// sentences carry `contains_answer` labels.
pub fn random_sentence_accuracy(
    dataset: &Dataset,
    seed: u64,
    trials: usize,
) -> Result<RandomBaseline> {
    if trials == 0 {
        return Err(Error::Config("random baseline needs trials ≥ 1".into()));
    }
    let per_example: Vec<(usize, usize)> = dataset
        .examples
        .iter()
        .map(|ex| {
            let sents = ex.flat_sentences();
            let hits = sents.iter().filter(|s| s.contains_answer).count();
            (hits, sents.len())
        })
        .collect();
    if per_example.is_empty() || per_example.iter().any(|(_, n)| *n == 0) {
        return Err(Error::Data("random baseline needs non-empty examples".into()));
    }

    let n = per_example.len() as f64;
    let expected = per_example
        .iter()
        .map(|(hits, total)| *hits as f64 / *total as f64)
        .sum::<f64>()
        / n;
    // Var of the estimator: Σ p_i (1−p_i) / (T · N²)
    let variance = per_example
        .iter()
        .map(|(hits, total)| {
            let p = *hits as f64 / *total as f64;
            p * (1.0 - p)
        })
        .sum::<f64>()
        / (trials as f64 * n * n);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut correct = 0u64;
    for _ in 0..trials {
        for (hits, total) in &per_example {
            if rng.random_range(0..*total) < *hits {
                correct += 1;
            }
        }
    }
    let sampled = correct as f64 / (trials as f64 * n);

    Ok(RandomBaseline {
        sampled,
        expected,
        std_error: variance.sqrt(),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DocumentRecord, QAExample, SentenceRecord, Split, Supervision};

    fn example_with_flags(flags: &[bool]) -> QAExample {
        let sentences: Vec<SentenceRecord> = flags
            .iter()
            .enumerate()
            .map(|(i, &f)| SentenceRecord {
                doc_index: 0,
                sent_index: i,
                text: format!("s{i}"),
                tokens: vec![format!("s{i}")],
                contains_answer: f,
                is_supporting_fact: None,
            })
            .collect();
        QAExample {
            id: format!("{flags:?}"),
            question_raw: "q".into(),
            question_tokens: vec!["q".into()],
            query_relation: None,
            query_head: None,
            answers: vec!["a".into()],
            candidates: None,
            documents: vec![DocumentRecord {
                title: String::new(),
                sentences,
            }],
            gold_span: None,
            answer_occurrences: None,
            supervision: Supervision::Span,
            non_extractive: false,
            unanswerable: !flags.iter().any(|f| *f),
        }
    }

    fn dataset(examples: Vec<QAExample>) -> Dataset {
        Dataset {
            name: "synthetic".into(),
            split: Split::Dev,
            examples,
        }
    }

    #[test]
    fn every_sentence_containing_answer_gives_one() {
        let ds = dataset(vec![example_with_flags(&[true, true, true])]);
        let rb = random_sentence_accuracy(&ds, 0, 100).unwrap();
        assert_eq!(rb.sampled, 1.0);
        assert_eq!(rb.expected, 1.0);
    }

    #[test]
    fn sampled_tracks_closed_form_within_three_sigma() {
        let mut examples = Vec::new();
        for i in 0..200 {
            let n = 3 + (i % 5);
            let flags: Vec<bool> = (0..n).map(|j| j == 0 || (i + j) % 4 == 0).collect();
            examples.push(example_with_flags(&flags));
        }
        let ds = dataset(examples);
        let rb = random_sentence_accuracy(&ds, 7, 2000).unwrap();
        assert!(
            (rb.sampled - rb.expected).abs() <= 3.0 * rb.std_error,
            "sampled {} expected {} se {}",
            rb.sampled,
            rb.expected,
            rb.std_error
        );
    }
}
