//! Full QA models: the memory-network and attention-flow readers in both
//! span and multiple-choice variants, plus span decoding.

mod bidafpp;
mod decode;
mod memnet;

pub use bidafpp::BidafModel;
pub use decode::{decode_span, span2mc_decode, Span2McDecision};
pub use memnet::MemNetModel;

/// Start/end probability distributions over the flattened context tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanPrediction {
    pub p_start: Vec<f64>,
    pub p_end: Vec<f64>,
}

impl SpanPrediction {
    /// Both vectors must be valid distributions over the same length.
    pub fn check(&self) -> bool {
        let valid = |p: &[f64]| {
            !p.is_empty()
                && p.iter().all(|v| *v >= 0.0)
                && (p.iter().sum::<f64>() - 1.0).abs() < 1e-6
        };
        self.p_start.len() == self.p_end.len() && valid(&self.p_start) && valid(&self.p_end)
    }
}

/// Per-candidate scores aligned to an example's candidate list.
pub type CandidateScores = Vec<f64>;
