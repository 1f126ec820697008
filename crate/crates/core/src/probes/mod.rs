//! Diagnostic probe models: the restricted scorers whose accuracy bounds
//! how much of a dataset is solvable without multi-hop reasoning.

mod factored;
mod factored_bidaf;
mod nocontext;
mod random_baseline;

pub use factored::FactoredModel;
pub use factored_bidaf::FactoredBidafModel;
pub use nocontext::NoContextModel;
pub use random_baseline::{random_sentence_accuracy, RandomBaseline};

use serde::Serialize;

use crate::error::Result;
use crate::neural::{argmax, EncodedExample};

/// Probability per sentence, aligned to the example's flattened sentence
/// list; the index map back to (doc, sent) is total.
#[derive(Debug, Clone)]
pub struct SentenceDistribution {
    pub probs: Vec<f64>,
    pub sentence_addr: Vec<(usize, usize)>,
}

impl SentenceDistribution {
    /// Highest-probability flat sentence index; ties resolve to the lowest.
    pub fn argmax_index(&self) -> usize {
        argmax(&self.probs)
    }
}

/// One exported sentence-probe prediction.
#[derive(Debug, Clone, Serialize)]
pub struct SentencePrediction {
    pub example_id: String,
    /// (doc index, sentence index) of the top-scored sentence.
    pub predicted_sentence: (usize, usize),
    pub correct: bool,
}

#[derive(Debug, Clone)]
pub struct AnswerLocationEval {
    /// Fraction of examples whose top sentence contains the answer;
    /// unanswerable examples stay in the denominator and count incorrect.
    pub accuracy: f64,
    pub evaluated: usize,
    pub unanswerable: usize,
    pub predictions: Vec<SentencePrediction>,
}

/// Definitional answer-location evaluation: the argmax sentence is correct
/// iff it carries `contains_answer`.
pub fn evaluate_answer_location(
    examples: &[EncodedExample],
    mut distribution: impl FnMut(&EncodedExample) -> Result<SentenceDistribution>,
) -> Result<AnswerLocationEval> {
    let mut correct = 0;
    let mut unanswerable = 0;
    let mut predictions = Vec::with_capacity(examples.len());
    for ex in examples {
        let dist = distribution(ex)?;
        let top = dist.argmax_index();
        let hit = ex.gold_sentences.contains(&top);
        if ex.gold_sentences.is_empty() {
            unanswerable += 1;
        }
        if hit {
            correct += 1;
        }
        predictions.push(SentencePrediction {
            example_id: ex.id.clone(),
            predicted_sentence: dist.sentence_addr[top],
            correct: hit,
        });
    }
    Ok(AnswerLocationEval {
        accuracy: correct as f64 / examples.len().max(1) as f64,
        evaluated: examples.len(),
        unanswerable,
        predictions,
    })
}
