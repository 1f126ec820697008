//! The no-context baseline: scores answer candidates from the question
//! alone. No document input exists anywhere in this code path, so whatever
//! accuracy it reaches measures question–candidate leakage.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Vocab;
use crate::error::{Error, Result};
use crate::neural::{
    bilinear, encode_tokens, init_embeddings, sequence_summary, strip_padding, BiGruSpec,
    BiGruVars, Graph, ParamStore, TrainingConfig, Var, EMBEDDING_PARAM, MASK_NEG,
};
use crate::neural::{EncodedCandidate, EncodedExample};

#[derive(Debug, Clone)]
pub struct NoContextModel {
    question_encoder: BiGruSpec,
    candidate_encoder: BiGruSpec,
    state_dim: usize,
}

pub(crate) const BILINEAR_W: &str = "nocontext.bilinear.w";

impl NoContextModel {
    pub fn new(config: &TrainingConfig) -> NoContextModel {
        NoContextModel {
            question_encoder: BiGruSpec::new("nocontext.q", config.embedding_dim, config.hidden_dim),
            candidate_encoder: BiGruSpec::new(
                "nocontext.cand",
                config.embedding_dim,
                config.hidden_dim,
            ),
            state_dim: 2 * config.hidden_dim,
        }
    }

    pub fn init_params(&self, vocab: &Vocab, config: &TrainingConfig) -> ParamStore {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut store = ParamStore::new();
        init_embeddings(&mut store, vocab, &mut rng, config.trainable_embeddings);
        self.question_encoder.init(&mut store, &mut rng);
        self.candidate_encoder.init(&mut store, &mut rng);
        store.register(
            BILINEAR_W,
            crate::neural::xavier(&mut rng, self.state_dim, self.state_dim),
        );
        store
    }

    fn bind(&self, g: &mut Graph, store: &ParamStore) -> NoContextVars {
        NoContextVars {
            embedding: g.param(store, EMBEDDING_PARAM),
            question: self.question_encoder.bind(g, store),
            candidate: self.candidate_encoder.bind(g, store),
            bilinear_w: g.param(store, BILINEAR_W),
        }
    }

    /// One score per candidate as a `[1×k]` row. Candidates that encode to
    /// nothing receive a large negative constant and are never selected.
    fn scores_row(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        question: &[usize],
        candidates: &[EncodedCandidate],
    ) -> Result<Var> {
        if candidates.len() < 2 {
            return Err(Error::Data("no-context scoring needs ≥2 candidates".into()));
        }
        let vars = self.bind(g, store);
        let q_states = encode_tokens(g, vars.embedding, &vars.question, question)?;
        let q_summary = sequence_summary(g, &q_states);
        let mut scores = Vec::with_capacity(candidates.len());
        for cand in candidates {
            if strip_padding(&cand.ids).is_empty() {
                scores.push(g.scalar(MASK_NEG));
                continue;
            }
            let states = encode_tokens(g, vars.embedding, &vars.candidate, &cand.ids)?;
            let summary = sequence_summary(g, &states);
            scores.push(bilinear(g, summary, vars.bilinear_w, q_summary)?);
        }
        Ok(g.concat_cols(&scores))
    }

    /// Candidate scores; reads only the question and candidate strings.
    pub fn scores(
        &self,
        store: &ParamStore,
        question: &[usize],
        candidates: &[EncodedCandidate],
    ) -> Result<Vec<f64>> {
        let mut g = Graph::new();
        let row = self.scores_row(&mut g, store, question, candidates)?;
        Ok(g.value(row).iter().copied().collect())
    }

    /// Categorical NLL on the gold candidate; `None` without a gold.
    pub fn example_loss(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        ex: &EncodedExample,
    ) -> Result<Option<Var>> {
        let (Some(cands), Some(gold)) = (&ex.candidates, ex.gold_candidate) else {
            return Ok(None);
        };
        if strip_padding(&cands[gold].ids).is_empty() {
            return Ok(None);
        }
        let row = self.scores_row(g, store, &ex.question, cands)?;
        Ok(Some(g.marginal_nll_from_scores(row, &[gold])))
    }
}

struct NoContextVars {
    embedding: Var,
    question: BiGruVars,
    candidate: BiGruVars,
    bilinear_w: Var,
}
