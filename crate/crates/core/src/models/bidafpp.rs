//! BiDAF-style reader: attention flow between question and flattened
//! context, a residual self-attention block over the context, and
//! start/end span heads. A summarization head adapts it to multiple
//! choice: the start/end distributions pool the context into
//! `[D_start ; D_end]`, which is scored bilinearly against each candidate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Vocab;
use crate::error::{Error, Result};
use crate::neural::{
    attention_flow, bilinear, encode_tokens, init_embeddings, sequence_summary, softmax,
    strip_padding, AttentionFlowSpec, AttentionFlowVars, BiGruSpec, BiGruVars, EncodedExample,
    Graph, LinearSpec, LinearVars, ParamStore, SeqStates, TrainingConfig, Var, EMBEDDING_PARAM,
    MASK_NEG,
};

use super::SpanPrediction;

const MC_W: &str = "bidaf.mc.w";

#[derive(Debug, Clone)]
pub struct BidafModel {
    encoder: BiGruSpec,
    attn: AttentionFlowSpec,
    proj_fused: LinearSpec,
    model_encoder: BiGruSpec,
    self_attn: AttentionFlowSpec,
    proj_self: LinearSpec,
    start_head: LinearSpec,
    end_encoder: BiGruSpec,
    end_head: LinearSpec,
    candidate_encoder: BiGruSpec,
    state_dim: usize,
}

impl BidafModel {
    pub fn new(config: &TrainingConfig) -> BidafModel {
        let h = config.hidden_dim;
        let d = 2 * h;
        BidafModel {
            encoder: BiGruSpec::new("bidaf.enc", config.embedding_dim, h),
            attn: AttentionFlowSpec::new("bidaf.attn", d),
            proj_fused: LinearSpec::new("bidaf.proj_fused", 4 * d, d),
            model_encoder: BiGruSpec::new("bidaf.model_enc", d, h),
            self_attn: AttentionFlowSpec::new("bidaf.self_attn", d),
            proj_self: LinearSpec::new("bidaf.proj_self", 4 * d, d),
            start_head: LinearSpec::new("bidaf.start", d, 1),
            end_encoder: BiGruSpec::new("bidaf.end_enc", d, h),
            end_head: LinearSpec::new("bidaf.end", d, 1),
            candidate_encoder: BiGruSpec::new("bidaf.cand", config.embedding_dim, h),
            state_dim: d,
        }
    }

    pub fn init_params(&self, vocab: &Vocab, config: &TrainingConfig) -> ParamStore {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut store = ParamStore::new();
        init_embeddings(&mut store, vocab, &mut rng, config.trainable_embeddings);
        self.encoder.init(&mut store, &mut rng);
        self.attn.init(&mut store, &mut rng);
        self.proj_fused.init(&mut store, &mut rng);
        self.model_encoder.init(&mut store, &mut rng);
        self.self_attn.init(&mut store, &mut rng);
        self.proj_self.init(&mut store, &mut rng);
        self.start_head.init(&mut store, &mut rng);
        self.end_encoder.init(&mut store, &mut rng);
        self.end_head.init(&mut store, &mut rng);
        self.candidate_encoder.init(&mut store, &mut rng);
        store.register(
            MC_W,
            crate::neural::xavier(&mut rng, 2 * self.state_dim, self.state_dim),
        );
        store
    }

    fn bind(&self, g: &mut Graph, store: &ParamStore) -> BidafVars {
        BidafVars {
            embedding: g.param(store, EMBEDDING_PARAM),
            encoder: self.encoder.bind(g, store),
            attn: self.attn.bind(g, store),
            proj_fused: self.proj_fused.bind(g, store),
            model_encoder: self.model_encoder.bind(g, store),
            self_attn: self.self_attn.bind(g, store),
            proj_self: self.proj_self.bind(g, store),
            start_head: self.start_head.bind(g, store),
            end_encoder: self.end_encoder.bind(g, store),
            end_head: self.end_head.bind(g, store),
            candidate: self.candidate_encoder.bind(g, store),
            mc_w: g.param(store, MC_W),
        }
    }

    /// Runs the reader over the flattened context. Returns the start/end
    /// score rows plus the context states each head scored.
    fn forward(&self, g: &mut Graph, vars: &BidafVars, ex: &EncodedExample) -> Result<BidafForward> {
        if strip_padding(&ex.context).is_empty() {
            return Err(Error::EmptySequence("bidaf context"));
        }
        let q_states = encode_tokens(g, vars.embedding, &vars.encoder, &ex.question)?;
        let c_states = encode_tokens(g, vars.embedding, &vars.encoder, &ex.context)?;

        let fused = attention_flow(g, &vars.attn, &c_states, &q_states, false); // [N×8h]
        let projected = vars.proj_fused.apply(g, fused);
        let modeled_in = g.relu(projected); // [N×2h]
        let modeled = vars.model_encoder.encode(g, modeled_in); // [N×2h]

        let self_fused = attention_flow(g, &vars.self_attn, &modeled, &modeled, true); // [N×8h]
        let self_proj = vars.proj_self.apply(g, self_fused);
        let self_states = g.relu(self_proj); // [N×2h]
        let residual = g.add(modeled.states, self_states); // [N×2h]

        let start_scores_col = vars.start_head.apply(g, residual); // [N×1]
        let start_scores = g.transpose(start_scores_col); // [1×N]

        let residual_seq = SeqStates {
            states: residual,
            len: c_states.len,
            fwd_last: modeled.fwd_last,
            bwd_last: modeled.bwd_last,
            dim: self.state_dim,
        };
        let end_states = vars.end_encoder.encode(g, residual_seq.states); // [N×2h]
        let end_scores_col = vars.end_head.apply(g, end_states.states); // [N×1]
        let end_scores = g.transpose(end_scores_col); // [1×N]

        Ok(BidafForward {
            start_scores,
            end_scores,
            start_states: residual,
            end_states: end_states.states,
        })
    }

    /// Start/end probability distributions over flat context tokens.
    pub fn span_distributions(&self, store: &ParamStore, ex: &EncodedExample) -> Result<SpanPrediction> {
        let mut g = Graph::new();
        let vars = self.bind(&mut g, store);
        let fwd = self.forward(&mut g, &vars, ex)?;
        let start: Vec<f64> = g.value(fwd.start_scores).iter().copied().collect();
        let end: Vec<f64> = g.value(fwd.end_scores).iter().copied().collect();
        Ok(SpanPrediction {
            p_start: softmax(&start),
            p_end: softmax(&end),
        })
    }

    pub fn span_loss(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        ex: &EncodedExample,
        gold: (usize, usize),
    ) -> Result<Var> {
        let vars = self.bind(g, store);
        let fwd = self.forward(g, &vars, ex)?;
        let start_nll = g.marginal_nll_from_scores(fwd.start_scores, &[gold.0]);
        let end_nll = g.marginal_nll_from_scores(fwd.end_scores, &[gold.1]);
        Ok(g.add(start_nll, end_nll))
    }

    fn mc_scores_row(&self, g: &mut Graph, store: &ParamStore, ex: &EncodedExample) -> Result<Var> {
        let Some(cands) = &ex.candidates else {
            return Err(Error::Data(format!("example {}: no candidates", ex.id)));
        };
        let vars = self.bind(g, store);
        let fwd = self.forward(g, &vars, ex)?;
        // D_start = Σ P_start_i · p_i and likewise for the end head.
        let p_start = g.softmax_rows(fwd.start_scores); // [1×N]
        let p_end = g.softmax_rows(fwd.end_scores);
        let d_start = g.matmul(p_start, fwd.start_states); // [1×2h]
        let d_end = g.matmul(p_end, fwd.end_states); // [1×2h]
        let summary = g.concat_cols(&[d_start, d_end]); // [1×4h]

        let mut scores = Vec::with_capacity(cands.len());
        for cand in cands {
            if strip_padding(&cand.ids).is_empty() {
                scores.push(g.scalar(MASK_NEG));
                continue;
            }
            let states = encode_tokens(g, vars.embedding, &vars.candidate, &cand.ids)?;
            let cand_summary = sequence_summary(g, &states);
            scores.push(bilinear(g, summary, vars.mc_w, cand_summary)?);
        }
        Ok(g.concat_cols(&scores))
    }

    /// Candidate scores from the span-head summarization.
    pub fn mc_scores(&self, store: &ParamStore, ex: &EncodedExample) -> Result<Vec<f64>> {
        let mut g = Graph::new();
        let row = self.mc_scores_row(&mut g, store, ex)?;
        Ok(g.value(row).iter().copied().collect())
    }

    pub fn mc_loss(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        ex: &EncodedExample,
    ) -> Result<Option<Var>> {
        let Some(gold) = ex.gold_candidate else {
            return Ok(None);
        };
        let row = self.mc_scores_row(g, store, ex)?;
        Ok(Some(g.marginal_nll_from_scores(row, &[gold])))
    }
}

struct BidafVars {
    embedding: Var,
    encoder: BiGruVars,
    attn: AttentionFlowVars,
    proj_fused: LinearVars,
    model_encoder: BiGruVars,
    self_attn: AttentionFlowVars,
    proj_self: LinearVars,
    start_head: LinearVars,
    end_encoder: BiGruVars,
    end_head: LinearVars,
    candidate: BiGruVars,
    mc_w: Var,
}

struct BidafForward {
    start_scores: Var,
    end_scores: Var,
    start_states: Var,
    end_states: Var,
}
