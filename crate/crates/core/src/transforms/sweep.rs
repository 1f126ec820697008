//! Option-count sweep: one multiple-choice recast per candidate count.

use crate::corpus::Dataset;
use crate::error::{Error, Result};

use super::{
    extract_entity_inventory, to_multiple_choice, AnswerMatcher, Bump, SkipCounts,
    TransformOutcome,
};

/// Produces one MC-recast dataset per option count. Examples ineligible at
/// the largest count are excluded from every variant so all variants share
/// a support set; each variant's candidates are derived from the same
/// per-example seed schedule.
pub fn sweep_option_counts(
    dataset: &Dataset,
    counts: &[usize],
    seed: u64,
    matcher: &AnswerMatcher,
) -> Result<Vec<(usize, TransformOutcome)>> {
    if counts.is_empty() {
        return Err(Error::Config("sweep needs at least one option count".into()));
    }
    if let Some(bad) = counts.iter().find(|c| **c < 2) {
        return Err(Error::Config(format!("option count {bad} is below 2")));
    }
    let max_count = *counts.iter().max().unwrap();

    let mut shared_skips = SkipCounts::new();
    let eligible: Vec<&crate::corpus::QAExample> = dataset
        .examples
        .iter()
        .filter(|ex| {
            let ok = extract_entity_inventory(ex, matcher).len() >= max_count - 1;
            if !ok {
                shared_skips.bump("insufficient_entities_at_max_count");
            }
            ok
        })
        .collect();

    let mut out = Vec::new();
    for &count in counts {
        let mut examples = Vec::new();
        let mut skips = shared_skips.clone();
        for ex in &eligible {
            match to_multiple_choice(ex, count - 1, seed, matcher) {
                Ok(mc) => examples.push(mc),
                Err(reason) => skips.bump(reason.as_str()),
            }
        }
        out.push((
            count,
            TransformOutcome {
                dataset: Dataset {
                    name: format!("{}-mc{}", dataset.name, count),
                    split: dataset.split,
                    examples,
                },
                skipped: skips,
            },
        ));
    }
    Ok(out)
}
