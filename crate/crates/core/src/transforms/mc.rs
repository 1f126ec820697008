//! Span → multiple-choice recasting via random entity distractors.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{QAExample, Supervision};

use super::{derive_seed, extract_entity_inventory, AnswerMatcher, SkipReason};

/// Recasts one example to multiple choice: `num_distractors` entities
/// sampled without replacement from the example's entity inventory plus the
/// first answer string, shuffled. Deterministic in `(seed, example.id)`.
pub fn to_multiple_choice(
    example: &QAExample,
    num_distractors: usize,
    seed: u64,
    matcher: &AnswerMatcher,
) -> Result<QAExample, SkipReason> {
    let inventory = extract_entity_inventory(example, matcher);
    if inventory.len() < num_distractors {
        return Err(SkipReason::InsufficientEntities);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &example.id));
    let mut pool: Vec<usize> = (0..inventory.len()).collect();
    pool.shuffle(&mut rng);
    let mut candidates: Vec<String> = pool[..num_distractors]
        .iter()
        .map(|&i| inventory.entities[i].text.clone())
        .collect();
    candidates.push(example.answers[0].clone());
    candidates.shuffle(&mut rng);

    let mut out = example.clone();
    out.candidates = Some(candidates);
    out.supervision = Supervision::MultipleChoice;
    Ok(out)
}
