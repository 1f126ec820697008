//! The attention-flow variant of the sentence-factored probe: each
//! sentence is fused with the question through co-attention, max-pooled,
//! and scored by a feed-forward network. Same factoring restriction and
//! objective as the simple model.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Vocab;
use crate::error::{Error, Result};
use crate::neural::{
    attention_flow, encode_tokens, init_embeddings, maxpool, AttentionFlowSpec, AttentionFlowVars,
    BiGruSpec, BiGruVars, FfnnSpec, FfnnVars, Graph, ParamStore, SeqStates, TrainingConfig, Var,
    EMBEDDING_PARAM,
};
use crate::neural::{softmax, EncodedExample};

use super::SentenceDistribution;

#[derive(Debug, Clone)]
pub struct FactoredBidafModel {
    sentence_encoder: BiGruSpec,
    question_encoder: BiGruSpec,
    attn: AttentionFlowSpec,
    scorer: FfnnSpec,
    shared_encoders: bool,
}

impl FactoredBidafModel {
    pub fn new(config: &TrainingConfig) -> FactoredBidafModel {
        let shared = config.share_encoders;
        let sent_prefix = if shared { "fbidaf.enc" } else { "fbidaf.sent" };
        let q_prefix = if shared { "fbidaf.enc" } else { "fbidaf.q" };
        let state_dim = 2 * config.hidden_dim;
        FactoredBidafModel {
            sentence_encoder: BiGruSpec::new(sent_prefix, config.embedding_dim, config.hidden_dim),
            question_encoder: BiGruSpec::new(q_prefix, config.embedding_dim, config.hidden_dim),
            attn: AttentionFlowSpec::new("fbidaf.attn", state_dim),
            scorer: FfnnSpec::new("fbidaf.ffnn", 4 * state_dim, config.hidden_dim),
            shared_encoders: shared,
        }
    }

    pub fn init_params(&self, vocab: &Vocab, config: &TrainingConfig) -> ParamStore {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut store = ParamStore::new();
        init_embeddings(&mut store, vocab, &mut rng, config.trainable_embeddings);
        self.sentence_encoder.init(&mut store, &mut rng);
        if !self.shared_encoders {
            self.question_encoder.init(&mut store, &mut rng);
        }
        self.attn.init(&mut store, &mut rng);
        self.scorer.init(&mut store, &mut rng);
        store
    }

    fn bind(&self, g: &mut Graph, store: &ParamStore) -> FactoredBidafVars {
        let embedding = g.param(store, EMBEDDING_PARAM);
        let sentence = self.sentence_encoder.bind(g, store);
        let question = if self.shared_encoders {
            sentence
        } else {
            self.question_encoder.bind(g, store)
        };
        FactoredBidafVars {
            embedding,
            sentence,
            question,
            attn: self.attn.bind(g, store),
            scorer: self.scorer.bind(g, store),
        }
    }

    fn score_with_question(
        &self,
        g: &mut Graph,
        vars: &FactoredBidafVars,
        sentence_ids: &[usize],
        question_states: &SeqStates,
    ) -> Result<Var> {
        let states = encode_tokens(g, vars.embedding, &vars.sentence, sentence_ids)?;
        let fused = attention_flow(g, &vars.attn, &states, question_states, false);
        let fused_states = SeqStates {
            states: fused,
            len: states.len,
            fwd_last: states.fwd_last,
            bwd_last: states.bwd_last,
            dim: 4 * states.dim,
        };
        let pooled = maxpool(g, &fused_states);
        Ok(vars.scorer.score(g, pooled))
    }

    /// Score of one sentence against the question; consumes nothing else.
    pub fn score_one(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        sentence_ids: &[usize],
        question_ids: &[usize],
    ) -> Result<Var> {
        let vars = self.bind(g, store);
        let q_states = encode_tokens(g, vars.embedding, &vars.question, question_ids)?;
        self.score_with_question(g, &vars, sentence_ids, &q_states)
    }

    fn scores_row(&self, g: &mut Graph, store: &ParamStore, ex: &EncodedExample) -> Result<Var> {
        if ex.sentences.is_empty() {
            return Err(Error::EmptySequence("factored bidaf scores"));
        }
        let vars = self.bind(g, store);
        let q_states = encode_tokens(g, vars.embedding, &vars.question, &ex.question)?;
        let mut scores = Vec::with_capacity(ex.sentences.len());
        for sentence in &ex.sentences {
            scores.push(self.score_with_question(g, &vars, sentence, &q_states)?);
        }
        Ok(g.concat_cols(&scores))
    }

    pub fn distribution(&self, store: &ParamStore, ex: &EncodedExample) -> Result<SentenceDistribution> {
        let mut g = Graph::new();
        let row = self.scores_row(&mut g, store, ex)?;
        let scores: Vec<f64> = g.value(row).iter().copied().collect();
        Ok(SentenceDistribution {
            probs: softmax(&scores),
            sentence_addr: ex.sentence_addr.clone(),
        })
    }

    pub fn example_loss(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        ex: &EncodedExample,
    ) -> Result<Option<Var>> {
        if ex.gold_sentences.is_empty() {
            return Ok(None);
        }
        let row = self.scores_row(g, store, ex)?;
        Ok(Some(g.marginal_nll_from_scores(row, &ex.gold_sentences)))
    }
}

struct FactoredBidafVars {
    embedding: Var,
    sentence: BiGruVars,
    question: BiGruVars,
    attn: AttentionFlowVars,
    scorer: FfnnVars,
}
