//! Gated recurrent units and the bi-directional sequence encoder.

use ndarray::Array2;
use rand_chacha::ChaCha8Rng;

use super::graph::{Graph, Var};
use super::params::{xavier, ParamStore};

/// Declares the parameters of one GRU direction under a name prefix.
///
/// Gate convention: update gate `z`, reset gate `r`, candidate `h̃`;
/// the new state is `(1−z)∘h + z∘h̃`, so a zero update gate keeps the
/// previous state unchanged.
#[derive(Debug, Clone)]
pub struct GruCellSpec {
    pub prefix: String,
    pub input_dim: usize,
    pub hidden_dim: usize,
}

impl GruCellSpec {
    pub fn new(prefix: impl Into<String>, input_dim: usize, hidden_dim: usize) -> GruCellSpec {
        GruCellSpec {
            prefix: prefix.into(),
            input_dim,
            hidden_dim,
        }
    }

    pub fn init(&self, store: &mut ParamStore, rng: &mut ChaCha8Rng) {
        let (d, h) = (self.input_dim, self.hidden_dim);
        for gate in ["z", "r", "c"] {
            store.register(&format!("{}.w{gate}", self.prefix), xavier(rng, d, h));
            store.register(&format!("{}.u{gate}", self.prefix), xavier(rng, h, h));
            store.register(&format!("{}.b{gate}", self.prefix), Array2::zeros((1, h)));
        }
    }

    pub fn bind(&self, g: &mut Graph, store: &ParamStore) -> GruCellVars {
        let p = |g: &mut Graph, suffix: &str| g.param(store, &format!("{}.{suffix}", self.prefix));
        GruCellVars {
            wz: p(g, "wz"),
            uz: p(g, "uz"),
            bz: p(g, "bz"),
            wr: p(g, "wr"),
            ur: p(g, "ur"),
            br: p(g, "br"),
            wc: p(g, "wc"),
            uc: p(g, "uc"),
            bc: p(g, "bc"),
            hidden_dim: self.hidden_dim,
        }
    }
}

/// Tape-bound GRU parameters.
#[derive(Debug, Clone, Copy)]
pub struct GruCellVars {
    wz: Var,
    uz: Var,
    bz: Var,
    wr: Var,
    ur: Var,
    br: Var,
    wc: Var,
    uc: Var,
    bc: Var,
    pub hidden_dim: usize,
}

impl GruCellVars {
    /// One recurrence step: input `x` `[1×d]`, state `h` `[1×hidden]`.
    pub fn step(&self, g: &mut Graph, x: Var, h: Var) -> Var {
        let xz = g.matmul(x, self.wz);
        let xr = g.matmul(x, self.wr);
        let xc = g.matmul(x, self.wc);
        let xz = g.add(xz, self.bz);
        let xr = g.add(xr, self.br);
        let xc = g.add(xc, self.bc);
        self.step_preprojected(g, xz, xr, xc, h)
    }

    /// Step with the input-side projections (bias included) precomputed;
    /// the sequence encoder batches those across timesteps.
    fn step_preprojected(&self, g: &mut Graph, xz: Var, xr: Var, xc: Var, h: Var) -> Var {
        let hz = g.matmul(h, self.uz);
        let z_pre = g.add(xz, hz);
        let z = g.sigmoid(z_pre);

        let hr = g.matmul(h, self.ur);
        let r_pre = g.add(xr, hr);
        let r = g.sigmoid(r_pre);

        let rh = g.mul(r, h);
        let hc = g.matmul(rh, self.uc);
        let c_pre = g.add(xc, hc);
        let cand = g.tanh(c_pre);

        // (1−z)∘h + z∘cand, composed as h + z∘(cand − h)
        let delta = g.sub(cand, h);
        let gated = g.mul(z, delta);
        g.add(h, gated)
    }
}

/// Encoded sequence: per-position states `[len × 2·hidden]` plus the two
/// final directional states used for the summary vector.
#[derive(Debug, Clone, Copy)]
pub struct SeqStates {
    /// `[len × 2·hidden]`; position t is `[fwd_t ; bwd_t]`.
    pub states: Var,
    pub len: usize,
    /// Forward state after the last position, `[1×hidden]`.
    pub fwd_last: Var,
    /// Backward state after the first position, `[1×hidden]`.
    pub bwd_last: Var,
    /// State dimension of `states` (2·hidden).
    pub dim: usize,
}

/// A forward/backward GRU pair over a shared input embedding.
#[derive(Debug, Clone)]
pub struct BiGruSpec {
    pub fwd: GruCellSpec,
    pub bwd: GruCellSpec,
}

impl BiGruSpec {
    pub fn new(prefix: impl Into<String>, input_dim: usize, hidden_dim: usize) -> BiGruSpec {
        let prefix = prefix.into();
        BiGruSpec {
            fwd: GruCellSpec::new(format!("{prefix}.fwd"), input_dim, hidden_dim),
            bwd: GruCellSpec::new(format!("{prefix}.bwd"), input_dim, hidden_dim),
        }
    }

    pub fn init(&self, store: &mut ParamStore, rng: &mut ChaCha8Rng) {
        self.fwd.init(store, rng);
        self.bwd.init(store, rng);
    }

    pub fn bind(&self, g: &mut Graph, store: &ParamStore) -> BiGruVars {
        BiGruVars {
            fwd: self.fwd.bind(g, store),
            bwd: self.bwd.bind(g, store),
        }
    }

    pub fn state_dim(&self) -> usize {
        2 * self.fwd.hidden_dim
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BiGruVars {
    pub fwd: GruCellVars,
    pub bwd: GruCellVars,
}

impl BiGruVars {
    /// Encodes an embedded sequence `[len×d]` with `len ≥ 1` real positions;
    /// the caller must have removed padding.
    pub fn encode(&self, g: &mut Graph, embedded: Var) -> SeqStates {
        let (len, _) = g.shape(embedded);
        assert!(len > 0, "bigru encode: empty sequence");
        let fwd_states = run_direction(g, &self.fwd, embedded, false);
        let bwd_states = run_direction(g, &self.bwd, embedded, true);
        let fwd_stack = g.concat_rows(&fwd_states);
        let bwd_in_order: Vec<Var> = bwd_states.iter().rev().copied().collect();
        let bwd_stack = g.concat_rows(&bwd_in_order);
        let states = g.concat_cols(&[fwd_stack, bwd_stack]);
        SeqStates {
            states,
            len,
            fwd_last: *fwd_states.last().unwrap(),
            bwd_last: *bwd_states.last().unwrap(),
            dim: 2 * self.fwd.hidden_dim,
        }
    }
}

/// Runs one GRU direction, batching the input-side projections across all
/// timesteps. Returns per-step states in processing order.
fn run_direction(g: &mut Graph, cell: &GruCellVars, embedded: Var, reverse: bool) -> Vec<Var> {
    let (len, _) = g.shape(embedded);
    let h = cell.hidden_dim;
    let xz_all = g.matmul(embedded, cell.wz);
    let xz_all = g.add_row_vec(xz_all, cell.bz);
    let xr_all = g.matmul(embedded, cell.wr);
    let xr_all = g.add_row_vec(xr_all, cell.br);
    let xc_all = g.matmul(embedded, cell.wc);
    let xc_all = g.add_row_vec(xc_all, cell.bc);

    let mut state = g.zeros(1, h);
    let mut states = Vec::with_capacity(len);
    let order: Vec<usize> = if reverse {
        (0..len).rev().collect()
    } else {
        (0..len).collect()
    };
    for t in order {
        let xz = g.row(xz_all, t);
        let xr = g.row(xr_all, t);
        let xc = g.row(xc_all, t);
        state = cell.step_preprojected(g, xz, xr, xc, state);
        states.push(state);
    }
    states
}

/// `[final forward state ; final backward state]`, a `[1 × 2·hidden]` row.
pub fn sequence_summary(g: &mut Graph, states: &SeqStates) -> Var {
    g.concat_cols(&[states.fwd_last, states.bwd_last])
}
