//! Span decoding: constrained argmax and candidate-filtered decoding.

use crate::transforms::AnswerMatcher;

use super::SpanPrediction;

/// Argmax of P_start[i]·P_end[j] over i ≤ j ≤ i+max_span_len−1. Ties go to
/// the smallest start, then the smallest end.
pub fn decode_span(pred: &SpanPrediction, max_span_len: usize) -> (usize, usize) {
    assert!(max_span_len >= 1, "max_span_len must be ≥ 1");
    let n = pred.p_start.len();
    let mut best = (0usize, 0usize);
    let mut best_score = f64::NEG_INFINITY;
    for i in 0..n {
        let upper = (i + max_span_len - 1).min(n.saturating_sub(1));
        for j in i..=upper {
            let score = pred.p_start[i] * pred.p_end[j];
            if score > best_score {
                best_score = score;
                best = (i, j);
            }
        }
    }
    best
}

/// Outcome of candidate-filtered decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span2McDecision {
    pub candidate: usize,
    /// True when no candidate occurred in the context and the decision
    /// fell back to matching the unconstrained decoded span.
    pub fallback: bool,
}

/// Scores each candidate by the best P_start·P_end over its context
/// occurrences and returns the argmax candidate. Candidates absent from
/// the context score −∞; when every candidate is absent, the decoded
/// span's text is matched against the candidates, defaulting to 0.
pub fn span2mc_decode(
    pred: &SpanPrediction,
    context_tokens: &[String],
    candidates: &[String],
    max_span_len: usize,
    matcher: &AnswerMatcher,
) -> Span2McDecision {
    let mut best: Option<(usize, f64)> = None;
    for (ci, cand) in candidates.iter().enumerate() {
        let occurrences = matcher.occurrences(context_tokens.iter().map(String::as_str), cand);
        let mut cand_score = f64::NEG_INFINITY;
        for (s, e) in occurrences {
            if s < pred.p_start.len() && e < pred.p_end.len() {
                cand_score = cand_score.max(pred.p_start[s] * pred.p_end[e]);
            }
        }
        if cand_score > f64::NEG_INFINITY {
            let better = match best {
                Some((_, score)) => cand_score > score,
                None => true,
            };
            if better {
                best = Some((ci, cand_score));
            }
        }
    }
    if let Some((ci, _)) = best {
        return Span2McDecision {
            candidate: ci,
            fallback: false,
        };
    }
    // No candidate occurs in the context: fall back to the decoded span.
    let (s, e) = decode_span(pred, max_span_len);
    let text = context_tokens[s..=e].join(" ");
    let candidate = candidates
        .iter()
        .position(|c| matcher.strings_match(c, &text))
        .unwrap_or(0);
    Span2McDecision {
        candidate,
        fallback: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_hot(n: usize, at: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[at] = 1.0;
        v
    }

    #[test]
    fn one_hot_distributions_decode_to_that_token() {
        let pred = SpanPrediction {
            p_start: one_hot(6, 3),
            p_end: one_hot(6, 3),
        };
        assert_eq!(decode_span(&pred, 4), (3, 3));
    }

    #[test]
    fn decode_respects_length_constraint() {
        // Best unconstrained pair is (0, 5) but the window is 3 tokens.
        let pred = SpanPrediction {
            p_start: vec![0.9, 0.02, 0.02, 0.02, 0.02, 0.02],
            p_end: vec![0.02, 0.02, 0.02, 0.02, 0.02, 0.9],
        };
        let (s, e) = decode_span(&pred, 3);
        assert!(e + 1 - s <= 3, "span ({s},{e}) exceeds the cap");
    }

    #[test]
    fn ties_prefer_smallest_start_then_end() {
        let pred = SpanPrediction {
            p_start: vec![0.5, 0.5],
            p_end: vec![0.5, 0.5],
        };
        assert_eq!(decode_span(&pred, 2), (0, 0));
    }

    #[test]
    fn single_candidate_single_occurrence() {
        let tokens: Vec<String> = ["a", "target", "b"].iter().map(|s| s.to_string()).collect();
        let pred = SpanPrediction {
            p_start: one_hot(3, 1),
            p_end: one_hot(3, 1),
        };
        let decision = span2mc_decode(
            &pred,
            &tokens,
            &["target".to_string()],
            5,
            &AnswerMatcher::default(),
        );
        assert_eq!(decision.candidate, 0);
        assert!(!decision.fallback);
    }

    #[test]
    fn absent_candidates_fall_back_to_first() {
        let tokens: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        let pred = SpanPrediction {
            p_start: one_hot(2, 0),
            p_end: one_hot(2, 0),
        };
        let decision = span2mc_decode(
            &pred,
            &tokens,
            &["absent one".to_string(), "absent two".to_string()],
            5,
            &AnswerMatcher::default(),
        );
        assert!(decision.fallback);
        assert_eq!(decision.candidate, 0);
    }
}
