//! Shared differentiable layers: embedding lookup, bilinear scoring,
//! attention flow, pooling, and feed-forward scoring.

use ndarray::Array2;
use rand_chacha::ChaCha8Rng;

use super::graph::{Graph, Var};
use super::gru::SeqStates;
use super::params::{xavier, ParamStore};
use crate::corpus::PAD_INDEX;
use crate::error::{Error, Result};

/// Large negative similarity used to mask positions out of a softmax.
pub const MASK_NEG: f64 = -1e30;

/// Embedding rows for a token-id sequence; row i is the embedding of token
/// i and the padding row is all zeros (the embedding matrix pins row 0).
pub fn embed(g: &mut Graph, embedding: Var, token_ids: &[usize]) -> Var {
    g.gather_rows(embedding, token_ids)
}

/// Drops padding ids; model pipelines encode only real tokens, which makes
/// every downstream operation trivially padding-neutral.
pub fn strip_padding(token_ids: &[usize]) -> Vec<usize> {
    token_ids
        .iter()
        .copied()
        .filter(|&id| id != PAD_INDEX)
        .collect()
}

/// uᵀ W v for row vectors u `[1×a]`, v `[1×b]` and W `[a×b]`.
pub fn bilinear(g: &mut Graph, u: Var, w: Var, v: Var) -> Result<Var> {
    let (ur, ua) = g.shape(u);
    let (wa, wb) = g.shape(w);
    let (vr, vb) = g.shape(v);
    if ur != 1 || vr != 1 || ua != wa || vb != wb {
        return Err(Error::Shape {
            op: "bilinear",
            expected: format!("[1×{wa}] · [{wa}×{wb}] · [1×{wb}]ᵀ"),
            found: format!("[{ur}×{ua}] · [{wa}×{wb}] · [{vr}×{vb}]ᵀ"),
        });
    }
    let uw = g.matmul(u, w);
    let vt = g.transpose(v);
    Ok(g.matmul(uw, vt))
}

/// Elementwise maximum over positions: `[n×d] → [1×d]`.
pub fn maxpool(g: &mut Graph, states: &SeqStates) -> Var {
    g.col_max(states.states)
}

/// Trainable similarity weights of an attention-flow block over state
/// dimension `d`: s(c, q) = w_c·c + w_q·q + w_e·(c∘q).
#[derive(Debug, Clone)]
pub struct AttentionFlowSpec {
    pub prefix: String,
    pub dim: usize,
}

impl AttentionFlowSpec {
    pub fn new(prefix: impl Into<String>, dim: usize) -> AttentionFlowSpec {
        AttentionFlowSpec {
            prefix: prefix.into(),
            dim,
        }
    }

    pub fn init(&self, store: &mut ParamStore, rng: &mut ChaCha8Rng) {
        store.register(&format!("{}.w_ctx", self.prefix), xavier(rng, self.dim, 1));
        store.register(&format!("{}.w_query", self.prefix), xavier(rng, self.dim, 1));
        store.register(&format!("{}.w_prod", self.prefix), xavier(rng, 1, self.dim));
    }

    pub fn bind(&self, g: &mut Graph, store: &ParamStore) -> AttentionFlowVars {
        AttentionFlowVars {
            w_ctx: g.param(store, &format!("{}.w_ctx", self.prefix)),
            w_query: g.param(store, &format!("{}.w_query", self.prefix)),
            w_prod: g.param(store, &format!("{}.w_prod", self.prefix)),
        }
    }

    /// Output width of [`attention_flow`] given input width `d`.
    pub fn output_dim(&self) -> usize {
        4 * self.dim
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AttentionFlowVars {
    w_ctx: Var,
    w_query: Var,
    w_prod: Var,
}

/// Query-aware context states.
///
/// Similarity s_ij = w_ctx·c_i + w_query·q_j + w_prod·(c_i∘q_j); context →
/// query attention averages query states per context row; query → context
/// attention pools context rows by softmax over max_j s_ij. The output per
/// position is `[c_i ; a_i ; c_i∘a_i ; c_i∘q2c]`, width 4d.
///
/// `diag_mask` excludes s_ii, used when a sequence attends to itself.
pub fn attention_flow(
    g: &mut Graph,
    params: &AttentionFlowVars,
    context: &SeqStates,
    query: &SeqStates,
    diag_mask: bool,
) -> Var {
    let c = context.states;
    let q = query.states;

    let c_part = g.matmul(c, params.w_ctx); // [n×1]
    let q_part = g.matmul(q, params.w_query); // [m×1]
    let q_part_row = g.transpose(q_part); // [1×m]
    let c_scaled = g.mul_row_vec(c, params.w_prod); // [n×d]
    let q_t = g.transpose(q); // [d×m]
    let prod_part = g.matmul(c_scaled, q_t); // [n×m]
    let mut sim = g.add_col_vec(prod_part, c_part);
    sim = g.add_row_vec(sim, q_part_row);
    if diag_mask {
        let (n, m) = g.shape(sim);
        assert_eq!(n, m, "diagonal mask on a non-square similarity");
        let mask = Array2::from_shape_fn((n, m), |(i, j)| if i == j { MASK_NEG } else { 0.0 });
        let mask = g.constant(mask);
        sim = g.add(sim, mask);
    }

    let attn = g.softmax_rows(sim); // context → query
    let attended = g.matmul(attn, q); // [n×d]

    let row_best = g.row_max(sim); // [n×1]
    let row_best_t = g.transpose(row_best); // [1×n]
    let q2c_weights = g.softmax_rows(row_best_t); // [1×n]
    let q2c = g.matmul(q2c_weights, c); // [1×d]

    let c_attended = g.mul(c, attended);
    let c_q2c = g.mul_row_vec(c, q2c);
    g.concat_cols(&[c, attended, c_attended, c_q2c])
}

/// One-hidden-layer rectifier network producing a scalar score.
#[derive(Debug, Clone)]
pub struct FfnnSpec {
    pub prefix: String,
    pub input_dim: usize,
    pub hidden_dim: usize,
}

impl FfnnSpec {
    pub fn new(prefix: impl Into<String>, input_dim: usize, hidden_dim: usize) -> FfnnSpec {
        FfnnSpec {
            prefix: prefix.into(),
            input_dim,
            hidden_dim,
        }
    }

    pub fn init(&self, store: &mut ParamStore, rng: &mut ChaCha8Rng) {
        store.register(
            &format!("{}.w1", self.prefix),
            xavier(rng, self.input_dim, self.hidden_dim),
        );
        store.register(
            &format!("{}.b1", self.prefix),
            Array2::zeros((1, self.hidden_dim)),
        );
        store.register(&format!("{}.w2", self.prefix), xavier(rng, self.hidden_dim, 1));
        store.register(&format!("{}.b2", self.prefix), Array2::zeros((1, 1)));
    }

    pub fn bind(&self, g: &mut Graph, store: &ParamStore) -> FfnnVars {
        FfnnVars {
            w1: g.param(store, &format!("{}.w1", self.prefix)),
            b1: g.param(store, &format!("{}.b1", self.prefix)),
            w2: g.param(store, &format!("{}.w2", self.prefix)),
            b2: g.param(store, &format!("{}.b2", self.prefix)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FfnnVars {
    w1: Var,
    b1: Var,
    w2: Var,
    b2: Var,
}

impl FfnnVars {
    /// Scalar score of a `[1×input_dim]` row.
    pub fn score(&self, g: &mut Graph, x: Var) -> Var {
        let pre = g.matmul(x, self.w1);
        let pre = g.add(pre, self.b1);
        let hidden = g.relu(pre);
        let out = g.matmul(hidden, self.w2);
        g.add(out, self.b2)
    }
}

/// Affine projection `x·W + b` applied row-wise.
#[derive(Debug, Clone)]
pub struct LinearSpec {
    pub prefix: String,
    pub input_dim: usize,
    pub output_dim: usize,
}

impl LinearSpec {
    pub fn new(prefix: impl Into<String>, input_dim: usize, output_dim: usize) -> LinearSpec {
        LinearSpec {
            prefix: prefix.into(),
            input_dim,
            output_dim,
        }
    }

    pub fn init(&self, store: &mut ParamStore, rng: &mut ChaCha8Rng) {
        store.register(
            &format!("{}.w", self.prefix),
            xavier(rng, self.input_dim, self.output_dim),
        );
        store.register(
            &format!("{}.b", self.prefix),
            Array2::zeros((1, self.output_dim)),
        );
    }

    pub fn bind(&self, g: &mut Graph, store: &ParamStore) -> LinearVars {
        LinearVars {
            w: g.param(store, &format!("{}.w", self.prefix)),
            b: g.param(store, &format!("{}.b", self.prefix)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LinearVars {
    w: Var,
    b: Var,
}

impl LinearVars {
    pub fn apply(&self, g: &mut Graph, x: Var) -> Var {
        let out = g.matmul(x, self.w);
        g.add_row_vec(out, self.b)
    }
}
