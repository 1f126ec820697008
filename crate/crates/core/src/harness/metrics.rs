//! Answer-string metrics (exact match, token F1, MC accuracy) and the
//! result-row type shared by all report sections.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::neural::{argmax, EncodedExample};

/// Community-standard answer normalization: lowercase, remove ASCII
/// punctuation, drop the articles a/an/the, collapse whitespace.
pub fn normalize_answer(s: &str) -> String {
    let lowered = s.to_lowercase();
    let no_punct: String = lowered
        .chars()
        .filter(|c| !c.is_ascii_punctuation())
        .collect();
    no_punct
        .split_whitespace()
        .filter(|t| !matches!(*t, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Normalized string equality.
pub fn exact_match(prediction: &str, gold: &str) -> f64 {
    if normalize_answer(prediction) == normalize_answer(gold) {
        1.0
    } else {
        0.0
    }
}

/// Token-overlap F1 with multiset counting.
pub fn token_f1(prediction: &str, gold: &str) -> f64 {
    let pred_tokens: Vec<String> = normalize_answer(prediction)
        .split_whitespace()
        .map(str::to_string)
        .collect();
    let gold_tokens: Vec<String> = normalize_answer(gold)
        .split_whitespace()
        .map(str::to_string)
        .collect();
    let mut gold_counts: HashMap<&str, usize> = HashMap::new();
    for t in &gold_tokens {
        *gold_counts.entry(t).or_insert(0) += 1;
    }
    let mut num_same = 0usize;
    for t in &pred_tokens {
        if let Some(c) = gold_counts.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                num_same += 1;
            }
        }
    }
    if num_same == 0 {
        return 0.0;
    }
    let precision = num_same as f64 / pred_tokens.len() as f64;
    let recall = num_same as f64 / gold_tokens.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Best EM/F1 over an example's gold answers.
pub fn best_em_f1(prediction: &str, golds: &[String]) -> (f64, f64) {
    let mut best = (0.0f64, 0.0f64);
    for gold in golds {
        best.0 = best.0.max(exact_match(prediction, gold));
        best.1 = best.1.max(token_f1(prediction, gold));
    }
    best
}

/// One report cell: a (model, dataset, metric) value with its accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub model: String,
    pub dataset: String,
    pub split: String,
    pub metric: String,
    /// Always in [0, 1].
    pub value: f64,
    pub evaluated: usize,
    /// Examples excluded before evaluation, keyed by reason;
    /// `evaluated + Σ skipped` equals the original dataset size.
    #[serde(default)]
    pub skipped: BTreeMap<String, usize>,
    /// Counts that did not exclude examples (e.g. unanswerable-in-text).
    #[serde(default)]
    pub annotations: BTreeMap<String, usize>,
}

impl MetricsRow {
    pub fn new(model: &str, dataset: &str, split: &str, metric: &str, value: f64) -> MetricsRow {
        MetricsRow {
            model: model.to_string(),
            dataset: dataset.to_string(),
            split: split.to_string(),
            metric: metric.to_string(),
            value,
            evaluated: 0,
            skipped: BTreeMap::new(),
            annotations: BTreeMap::new(),
        }
    }
}

/// Multiple-choice accuracy: the argmax candidate (ties → lowest index)
/// must match an answer, i.e. be the example's gold candidate.
pub fn evaluate_mc_accuracy(scored: &[(usize, Vec<f64>)], examples: &[EncodedExample]) -> f64 {
    if scored.is_empty() {
        return 0.0;
    }
    let mut correct = 0usize;
    for (idx, scores) in scored {
        let ex = &examples[*idx];
        if Some(argmax(scores)) == ex.gold_candidate {
            correct += 1;
        }
    }
    correct as f64 / scored.len() as f64
}

/// Span-text metrics averaged over examples: each prediction is compared
/// against all gold answers and the best match counts.
pub fn evaluate_span_text(predictions: &[(usize, String)], examples: &[EncodedExample]) -> (f64, f64) {
    if predictions.is_empty() {
        return (0.0, 0.0);
    }
    let mut em_sum = 0.0;
    let mut f1_sum = 0.0;
    for (idx, text) in predictions {
        let (em, f1) = best_em_f1(text, &examples[*idx].answers);
        em_sum += em;
        f1_sum += f1;
    }
    let n = predictions.len() as f64;
    (em_sum / n, f1_sum / n)
}
