//! The simple sentence-factored probe: bilinear score between a sentence
//! summary and the question summary, softmax over sentences, marginal
//! log-likelihood over sentences containing the answer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Vocab;
use crate::error::{Error, Result};
use crate::neural::{
    bilinear, encode_tokens, init_embeddings, sequence_summary, BiGruSpec, BiGruVars, Graph,
    ParamStore, TrainingConfig, Var, EMBEDDING_PARAM,
};
use crate::neural::{softmax, EncodedExample};

use super::SentenceDistribution;

/// Simple factored model. Scoring is structurally factored: the sentence
/// scorer's signature admits exactly one sentence, so a score can never
/// read other sentences.
#[derive(Debug, Clone)]
pub struct FactoredModel {
    sentence_encoder: BiGruSpec,
    question_encoder: BiGruSpec,
    shared_encoders: bool,
    state_dim: usize,
}

pub(crate) const BILINEAR_W: &str = "factored.bilinear.w";

impl FactoredModel {
    pub fn new(config: &TrainingConfig) -> FactoredModel {
        let shared = config.share_encoders;
        let sent_prefix = if shared { "factored.enc" } else { "factored.sent" };
        let q_prefix = if shared { "factored.enc" } else { "factored.q" };
        FactoredModel {
            sentence_encoder: BiGruSpec::new(sent_prefix, config.embedding_dim, config.hidden_dim),
            question_encoder: BiGruSpec::new(q_prefix, config.embedding_dim, config.hidden_dim),
            shared_encoders: shared,
            state_dim: 2 * config.hidden_dim,
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
        store.register(
            BILINEAR_W,
            crate::neural::xavier(&mut rng, self.state_dim, self.state_dim),
        );
        store
    }

    fn bind(&self, g: &mut Graph, store: &ParamStore) -> FactoredVars {
        let embedding = g.param(store, EMBEDDING_PARAM);
        let sentence = self.sentence_encoder.bind(g, store);
        let question = if self.shared_encoders {
            sentence
        } else {
            self.question_encoder.bind(g, store)
        };
        FactoredVars {
            embedding,
            sentence,
            question,
            bilinear_w: g.param(store, BILINEAR_W),
        }
    }

    /// Bilinear score of one sentence against a precomputed question
    /// summary. Only this sentence and the question reach the score.
    fn score_with_summary(
        &self,
        g: &mut Graph,
        vars: &FactoredVars,
        sentence_ids: &[usize],
        question_summary: Var,
    ) -> Result<Var> {
        let states = encode_tokens(g, vars.embedding, &vars.sentence, sentence_ids)?;
        let summary = sequence_summary(g, &states);
        bilinear(g, summary, vars.bilinear_w, question_summary)
    }

    /// Score of a single sentence against the question; the public
    /// factored-scoring entry point.
    pub fn score_one(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        sentence_ids: &[usize],
        question_ids: &[usize],
    ) -> Result<Var> {
        let vars = self.bind(g, store);
        let q_states = encode_tokens(g, vars.embedding, &vars.question, question_ids)?;
        let q_summary = sequence_summary(g, &q_states);
        self.score_with_summary(g, &vars, sentence_ids, q_summary)
    }

    /// Per-sentence scores of an example as one `[1×n]` row.
    fn scores_row(&self, g: &mut Graph, store: &ParamStore, ex: &EncodedExample) -> Result<Var> {
        if ex.sentences.is_empty() {
            return Err(Error::EmptySequence("factored scores"));
        }
        let vars = self.bind(g, store);
        let q_states = encode_tokens(g, vars.embedding, &vars.question, &ex.question)?;
        let q_summary = sequence_summary(g, &q_states);
        let mut scores = Vec::with_capacity(ex.sentences.len());
        for sentence in &ex.sentences {
            scores.push(self.score_with_summary(g, &vars, sentence, q_summary)?);
        }
        Ok(g.concat_cols(&scores))
    }

    /// Softmax distribution over the example's sentences.
    pub fn distribution(&self, store: &ParamStore, ex: &EncodedExample) -> Result<SentenceDistribution> {
        let mut g = Graph::new();
        let row = self.scores_row(&mut g, store, ex)?;
        let scores: Vec<f64> = g.value(row).iter().copied().collect();
        Ok(SentenceDistribution {
            probs: softmax(&scores),
            sentence_addr: ex.sentence_addr.clone(),
        })
    }

    /// Marginal NLL over the answer-bearing sentences; `None` when the
    /// example has no usable gold sentence.
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

struct FactoredVars {
    embedding: Var,
    sentence: BiGruVars,
    question: BiGruVars,
    bilinear_w: Var,
}
