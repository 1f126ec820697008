//! Memory network reader: repeated read–update hops over the context with
//! hierarchical (word-within-sentence, then sentence) attention, finished
//! by either a candidate-scoring head or start/end span heads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Vocab;
use crate::error::{Error, Result};
use crate::neural::{
    bilinear, encode_tokens, init_embeddings, sequence_summary, softmax, strip_padding, BiGruSpec,
    BiGruVars, EncodedExample, Graph, GruCellSpec, GruCellVars, ParamStore, TrainingConfig, Var,
    EMBEDDING_PARAM, MASK_NEG,
};

use super::SpanPrediction;

const WORD_ATTN_W: &str = "memnet.word_attn.w";
const SENT_ATTN_W: &str = "memnet.sent_attn.w";
const CAND_SCORE_W: &str = "memnet.cand_score.w";
const START_W: &str = "memnet.start.w";
const END_W: &str = "memnet.end.w";

/// MemNet with a shared hop trunk and separate multiple-choice / span
/// heads; the hop count is fixed by the training configuration.
#[derive(Debug, Clone)]
pub struct MemNetModel {
    ctx_encoder: BiGruSpec,
    question_encoder: BiGruSpec,
    candidate_encoder: BiGruSpec,
    update_cell: GruCellSpec,
    pub hops: usize,
    state_dim: usize,
}

impl MemNetModel {
    pub fn new(config: &TrainingConfig) -> MemNetModel {
        let state_dim = 2 * config.hidden_dim;
        MemNetModel {
            ctx_encoder: BiGruSpec::new("memnet.ctx", config.embedding_dim, config.hidden_dim),
            question_encoder: BiGruSpec::new("memnet.q", config.embedding_dim, config.hidden_dim),
            candidate_encoder: BiGruSpec::new("memnet.cand", config.embedding_dim, config.hidden_dim),
            update_cell: GruCellSpec::new("memnet.update", state_dim, state_dim),
            hops: config.hops.max(1),
            state_dim,
        }
    }

    pub fn init_params(&self, vocab: &Vocab, config: &TrainingConfig) -> ParamStore {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut store = ParamStore::new();
        init_embeddings(&mut store, vocab, &mut rng, config.trainable_embeddings);
        self.ctx_encoder.init(&mut store, &mut rng);
        self.question_encoder.init(&mut store, &mut rng);
        self.candidate_encoder.init(&mut store, &mut rng);
        self.update_cell.init(&mut store, &mut rng);
        let d = self.state_dim;
        store.register(WORD_ATTN_W, crate::neural::xavier(&mut rng, d, d));
        store.register(SENT_ATTN_W, crate::neural::xavier(&mut rng, d, d));
        store.register(CAND_SCORE_W, crate::neural::xavier(&mut rng, d, d));
        store.register(START_W, crate::neural::xavier(&mut rng, d, d));
        store.register(END_W, crate::neural::xavier(&mut rng, d, d));
        store
    }

    fn bind(&self, g: &mut Graph, store: &ParamStore) -> MemNetVars {
        MemNetVars {
            embedding: g.param(store, EMBEDDING_PARAM),
            ctx: self.ctx_encoder.bind(g, store),
            question: self.question_encoder.bind(g, store),
            candidate: self.candidate_encoder.bind(g, store),
            update: self.update_cell.bind(g, store),
            word_attn_w: g.param(store, WORD_ATTN_W),
            sent_attn_w: g.param(store, SENT_ATTN_W),
            cand_score_w: g.param(store, CAND_SCORE_W),
            start_w: g.param(store, START_W),
            end_w: g.param(store, END_W),
        }
    }

    /// Encodes every sentence and stacks token states into the context
    /// representation `[total_tokens × 2h]`.
    fn encode_context(
        &self,
        g: &mut Graph,
        vars: &MemNetVars,
        ex: &EncodedExample,
    ) -> Result<EncodedContext> {
        if ex.sentences.is_empty() {
            return Err(Error::EmptySequence("memnet context"));
        }
        let mut sentence_states = Vec::with_capacity(ex.sentences.len());
        let mut token_state_vars = Vec::with_capacity(ex.sentences.len());
        for sent in &ex.sentences {
            let states = encode_tokens(g, vars.embedding, &vars.ctx, sent)?;
            token_state_vars.push(states.states);
            sentence_states.push(states);
        }
        let stacked = g.concat_rows(&token_state_vars);
        Ok(EncodedContext {
            sentence_states,
            stacked,
        })
    }

    /// Hierarchical attention of one hop: word-level softmax inside every
    /// sentence, sentence-level softmax over attended summaries, and the
    /// global token distribution as their product (a `[1×N]` row summing
    /// to one).
    fn hier_attention(
        &self,
        g: &mut Graph,
        vars: &MemNetVars,
        query: Var,
        ctx: &EncodedContext,
    ) -> Var {
        let query_col = g.transpose(query); // [2h×1]
        let wq_word = g.matmul(vars.word_attn_w, query_col); // [2h×1]
        let wq_sent = g.matmul(vars.sent_attn_w, query_col); // [2h×1]

        let mut word_dists = Vec::new();
        let mut sent_scores = Vec::new();
        for states in &ctx.sentence_states {
            let scores = g.matmul(states.states, wq_word); // [L×1]
            let scores_row = g.transpose(scores); // [1×L]
            let beta = g.softmax_rows(scores_row); // within-sentence words
            let summary = g.matmul(beta, states.states); // [1×2h]
            let score = g.matmul(summary, wq_sent); // [1×1]
            word_dists.push(beta);
            sent_scores.push(score);
        }
        let sent_row = g.concat_cols(&sent_scores); // [1×K]
        let gamma = g.softmax_rows(sent_row); // sentence weights
        let gamma_col = g.transpose(gamma); // [K×1]

        let mut scaled = Vec::with_capacity(word_dists.len());
        for (k, beta) in word_dists.iter().enumerate() {
            let gamma_k = g.slice_rows(gamma_col, k, k + 1); // [1×1]
            scaled.push(g.matmul(gamma_k, *beta)); // γ_k · β_k
        }
        g.concat_cols(&scaled) // [1×N], sums to 1
    }

    /// One memory read: hierarchical attention then the attention-weighted
    /// sum of context token states. Returns (α, m).
    fn read(&self, g: &mut Graph, vars: &MemNetVars, query: Var, ctx: &EncodedContext) -> (Var, Var) {
        let alpha = self.hier_attention(g, vars, query, ctx);
        let memory = g.matmul(alpha, ctx.stacked); // [1×2h]
        (alpha, memory)
    }

    /// Runs the hop trunk: q_0 from the question encoder, then T read +
    /// gated-update cycles. Returns the final memory cell.
    fn run_hops(
        &self,
        g: &mut Graph,
        vars: &MemNetVars,
        ex: &EncodedExample,
        ctx: &EncodedContext,
    ) -> Result<Var> {
        let q_states = encode_tokens(g, vars.embedding, &vars.question, &ex.question)?;
        let mut query = sequence_summary(g, &q_states);
        let mut memory = query; // replaced on the first hop
        for _ in 0..self.hops {
            let (_, m) = self.read(g, vars, query, ctx);
            memory = m;
            query = vars.update.step(g, memory, query);
        }
        Ok(memory)
    }

    /// Candidate scores `g(m_T, c_j)` as plain numbers.
    pub fn mc_scores(&self, store: &ParamStore, ex: &EncodedExample) -> Result<Vec<f64>> {
        let mut g = Graph::new();
        let row = self.mc_scores_row(&mut g, store, ex)?;
        Ok(g.value(row).iter().copied().collect())
    }

    fn mc_scores_row(&self, g: &mut Graph, store: &ParamStore, ex: &EncodedExample) -> Result<Var> {
        let Some(cands) = &ex.candidates else {
            return Err(Error::Data(format!("example {}: no candidates", ex.id)));
        };
        let vars = self.bind(g, store);
        let ctx = self.encode_context(g, &vars, ex)?;
        let memory = self.run_hops(g, &vars, ex, &ctx)?;
        let mut scores = Vec::with_capacity(cands.len());
        for cand in cands {
            if strip_padding(&cand.ids).is_empty() {
                scores.push(g.scalar(MASK_NEG));
                continue;
            }
            let states = encode_tokens(g, vars.embedding, &vars.candidate, &cand.ids)?;
            let summary = sequence_summary(g, &states);
            scores.push(bilinear(g, memory, vars.cand_score_w, summary)?);
        }
        Ok(g.concat_cols(&scores))
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

    /// Start/end distributions over flat context tokens:
    /// softmax(p·W·m_T) per head.
    pub fn span_distributions(&self, store: &ParamStore, ex: &EncodedExample) -> Result<SpanPrediction> {
        let mut g = Graph::new();
        let (start_row, end_row) = self.span_score_rows(&mut g, store, ex)?;
        let start_scores: Vec<f64> = g.value(start_row).iter().copied().collect();
        let end_scores: Vec<f64> = g.value(end_row).iter().copied().collect();
        Ok(SpanPrediction {
            p_start: softmax(&start_scores),
            p_end: softmax(&end_scores),
        })
    }

    fn span_score_rows(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        ex: &EncodedExample,
    ) -> Result<(Var, Var)> {
        let vars = self.bind(g, store);
        let ctx = self.encode_context(g, &vars, ex)?;
        let memory = self.run_hops(g, &vars, ex, &ctx)?;
        let memory_col = g.transpose(memory); // [2h×1]
        let start = {
            let wm = g.matmul(vars.start_w, memory_col); // [2h×1]
            let scores = g.matmul(ctx.stacked, wm); // [N×1]
            g.transpose(scores)
        };
        let end = {
            let wm = g.matmul(vars.end_w, memory_col);
            let scores = g.matmul(ctx.stacked, wm);
            g.transpose(scores)
        };
        Ok((start, end))
    }

    pub fn span_loss(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        ex: &EncodedExample,
        gold: (usize, usize),
    ) -> Result<Var> {
        let (start_row, end_row) = self.span_score_rows(g, store, ex)?;
        let start_nll = g.marginal_nll_from_scores(start_row, &[gold.0]);
        let end_nll = g.marginal_nll_from_scores(end_row, &[gold.1]);
        Ok(g.add(start_nll, end_nll))
    }
}

struct MemNetVars {
    embedding: Var,
    ctx: BiGruVars,
    question: BiGruVars,
    candidate: BiGruVars,
    update: GruCellVars,
    word_attn_w: Var,
    sent_attn_w: Var,
    cand_score_w: Var,
    start_w: Var,
    end_w: Var,
}

struct EncodedContext {
    sentence_states: Vec<crate::neural::SeqStates>,
    /// All sentences' token states stacked, `[total_tokens × 2h]`.
    stacked: Var,
}
