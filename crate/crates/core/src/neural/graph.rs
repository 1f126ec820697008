//! A small reverse-mode tape over `ndarray` matrices.
//!
//! Every value is a 2-D `f64` array; vectors are single-row matrices and
//! scalars are 1×1. A forward pass appends nodes to the tape; `backward`
//! walks it in reverse, accumulating gradients. Shape violations are
//! programming errors and panic with the offending operation's name.

use ndarray::{Array2, Axis};

use crate::neural::params::ParamStore;

/// Handle to a node on the tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    /// `[n×m] + [1×m]`, the row vector broadcast down the rows.
    AddRowVec(Var, Var),
    /// `[n×m] + [n×1]`, the column vector broadcast across the columns.
    AddColVec(Var, Var),
    /// `[n×m] ∘ [1×m]`.
    MulRowVec(Var, Var),
    Scale(Var, f64),
    Sigmoid(Var),
    Tanh(Var),
    Relu(Var),
    Transpose(Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    /// Rows `[start, end)` of the input.
    SliceRows(Var, usize, usize),
    /// Row selection with repetition allowed (embedding lookup).
    GatherRows(Var, Vec<usize>),
    SumAll(Var),
    /// Row-wise numerically stabilized softmax.
    SoftmaxRows(Var),
    /// Row-wise maximum, `[n×m] → [n×1]`; ties resolve to the first index.
    RowMax(Var),
    /// Column-wise maximum, `[n×m] → [1×m]`.
    ColMax(Var),
    /// Fused −log Σ_{i∈gold} softmax(scores)_i over a `[1×n]` score row.
    MarginalNll(Var, Vec<usize>),
}

struct Node {
    value: Array2<f64>,
    op: Op,
}

/// Dynamic computation tape.
pub struct Graph {
    nodes: Vec<Node>,
    bindings: Vec<(String, Var)>,
    /// Per-node gradients of the most recent `backward` call.
    grads: Vec<Option<Array2<f64>>>,
}

impl Default for Graph {
    fn default() -> Self {
        Self::new()
    }
}

impl Graph {
    pub fn new() -> Graph {
        Graph {
            nodes: Vec::new(),
            bindings: Vec::new(),
            grads: Vec::new(),
        }
    }

    fn push(&mut self, value: Array2<f64>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    /// A constant leaf; it receives a gradient but nothing reads it.
    pub fn constant(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn scalar(&mut self, value: f64) -> Var {
        self.constant(Array2::from_elem((1, 1), value))
    }

    pub fn zeros(&mut self, rows: usize, cols: usize) -> Var {
        self.constant(Array2::zeros((rows, cols)))
    }

    /// Binds a named parameter from the store as a leaf of this tape.
    pub fn param(&mut self, store: &ParamStore, name: &str) -> Var {
        let value = store.get(name).value.clone();
        let var = self.push(value, Op::Leaf);
        self.bindings.push((name.to_string(), var));
        var
    }

    pub fn value(&self, v: Var) -> &Array2<f64> {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.dim()
    }

    /// Scalar payload of a 1×1 node.
    pub fn scalar_value(&self, v: Var) -> f64 {
        let val = self.value(v);
        assert_eq!(val.dim(), (1, 1), "scalar_value on non-scalar node");
        val[(0, 0)]
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let (ar, ac) = self.shape(a);
        let (br, bc) = self.shape(b);
        assert_eq!(ac, br, "matmul: [{ar}×{ac}] · [{br}×{bc}]");
        let value = self.nodes[a.0].value.dot(&self.nodes[b.0].value);
        self.push(value, Op::MatMul(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        assert_eq!(self.shape(a), self.shape(b), "add: shape mismatch");
        let value = &self.nodes[a.0].value + &self.nodes[b.0].value;
        self.push(value, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        assert_eq!(self.shape(a), self.shape(b), "sub: shape mismatch");
        let value = &self.nodes[a.0].value - &self.nodes[b.0].value;
        self.push(value, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        assert_eq!(self.shape(a), self.shape(b), "mul: shape mismatch");
        let value = &self.nodes[a.0].value * &self.nodes[b.0].value;
        self.push(value, Op::Mul(a, b))
    }

    pub fn add_row_vec(&mut self, a: Var, row: Var) -> Var {
        let (_, m) = self.shape(a);
        assert_eq!(self.shape(row), (1, m), "add_row_vec: shape mismatch");
        let value = &self.nodes[a.0].value + &self.nodes[row.0].value;
        self.push(value, Op::AddRowVec(a, row))
    }

    pub fn add_col_vec(&mut self, a: Var, col: Var) -> Var {
        let (n, _) = self.shape(a);
        assert_eq!(self.shape(col), (n, 1), "add_col_vec: shape mismatch");
        let value = &self.nodes[a.0].value + &self.nodes[col.0].value;
        self.push(value, Op::AddColVec(a, col))
    }

    pub fn mul_row_vec(&mut self, a: Var, row: Var) -> Var {
        let (_, m) = self.shape(a);
        assert_eq!(self.shape(row), (1, m), "mul_row_vec: shape mismatch");
        let value = &self.nodes[a.0].value * &self.nodes[row.0].value;
        self.push(value, Op::MulRowVec(a, row))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        let value = self.nodes[a.0].value.mapv(|x| x * factor);
        self.push(value, Op::Scale(a, factor))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = self.nodes[a.0].value.mapv(sigmoid);
        self.push(value, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let value = self.nodes[a.0].value.mapv(f64::tanh);
        self.push(value, Op::Tanh(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let value = self.nodes[a.0].value.mapv(|x| x.max(0.0));
        self.push(value, Op::Relu(a))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let value = self.nodes[a.0].value.t().to_owned();
        self.push(value, Op::Transpose(a))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty(), "concat_cols: no inputs");
        let n = self.shape(parts[0]).0;
        let total: usize = parts.iter().map(|p| self.shape(*p).1).sum();
        let mut value = Array2::zeros((n, total));
        let mut offset = 0;
        for p in parts {
            let (pn, pm) = self.shape(*p);
            assert_eq!(pn, n, "concat_cols: row mismatch");
            value
                .slice_mut(ndarray::s![.., offset..offset + pm])
                .assign(&self.nodes[p.0].value);
            offset += pm;
        }
        self.push(value, Op::ConcatCols(parts.to_vec()))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty(), "concat_rows: no inputs");
        let m = self.shape(parts[0]).1;
        let total: usize = parts.iter().map(|p| self.shape(*p).0).sum();
        let mut value = Array2::zeros((total, m));
        let mut offset = 0;
        for p in parts {
            let (pn, pm) = self.shape(*p);
            assert_eq!(pm, m, "concat_rows: column mismatch");
            value
                .slice_mut(ndarray::s![offset..offset + pn, ..])
                .assign(&self.nodes[p.0].value);
            offset += pn;
        }
        self.push(value, Op::ConcatRows(parts.to_vec()))
    }

    pub fn slice_rows(&mut self, a: Var, start: usize, end: usize) -> Var {
        let (n, _) = self.shape(a);
        assert!(start < end && end <= n, "slice_rows: bad range");
        let value = self.nodes[a.0]
            .value
            .slice(ndarray::s![start..end, ..])
            .to_owned();
        self.push(value, Op::SliceRows(a, start, end))
    }

    pub fn row(&mut self, a: Var, index: usize) -> Var {
        self.slice_rows(a, index, index + 1)
    }

    pub fn gather_rows(&mut self, a: Var, indices: &[usize]) -> Var {
        let (n, _) = self.shape(a);
        assert!(indices.iter().all(|i| *i < n), "gather_rows: out of range");
        let value = self.nodes[a.0].value.select(Axis(0), indices);
        self.push(value, Op::GatherRows(a, indices.to_vec()))
    }

    pub fn sum_all(&mut self, a: Var) -> Var {
        let value = Array2::from_elem((1, 1), self.nodes[a.0].value.sum());
        self.push(value, Op::SumAll(a))
    }

    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let value = softmax_rows(&self.nodes[a.0].value);
        self.push(value, Op::SoftmaxRows(a))
    }

    pub fn row_max(&mut self, a: Var) -> Var {
        let input = &self.nodes[a.0].value;
        let (n, m) = input.dim();
        assert!(m > 0, "row_max: empty rows");
        let mut value = Array2::zeros((n, 1));
        for i in 0..n {
            value[(i, 0)] = input.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max);
        }
        self.push(value, Op::RowMax(a))
    }

    pub fn col_max(&mut self, a: Var) -> Var {
        let input = &self.nodes[a.0].value;
        let (n, m) = input.dim();
        assert!(n > 0, "col_max: empty columns");
        let mut value = Array2::zeros((1, m));
        for j in 0..m {
            value[(0, j)] = input.column(j).iter().copied().fold(f64::NEG_INFINITY, f64::max);
        }
        self.push(value, Op::ColMax(a))
    }

    /// −log Σ_{i∈gold} softmax(scores)_i computed via log-sum-exp; `scores`
    /// must be a `[1×n]` row and `gold` non-empty with valid indices.
    pub fn marginal_nll_from_scores(&mut self, scores: Var, gold: &[usize]) -> Var {
        let (r, n) = self.shape(scores);
        assert_eq!(r, 1, "marginal_nll: scores must be a single row");
        assert!(!gold.is_empty(), "marginal_nll: empty gold set");
        assert!(gold.iter().all(|i| *i < n), "marginal_nll: gold out of range");
        let row = &self.nodes[scores.0].value;
        let lse_all = log_sum_exp(row.iter().copied());
        let lse_gold = log_sum_exp(gold.iter().map(|&i| row[(0, i)]));
        let value = Array2::from_elem((1, 1), lse_all - lse_gold);
        self.push(value, Op::MarginalNll(scores, gold.to_vec()))
    }

    /// Reverse pass from a scalar loss node. Returns per-node gradients;
    /// use [`Graph::grad`] or [`Graph::accumulate_grads`] to read them.
    pub fn backward(&mut self, loss: Var) {
        assert_eq!(self.shape(loss), (1, 1), "backward: loss must be scalar");
        let mut grads: Vec<Option<Array2<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Array2::from_elem((1, 1), 1.0));

        for i in (0..self.nodes.len()).rev() {
            let Some(grad) = grads[i].take() else { continue };
            let op = self.nodes[i].op.clone();
            match op {
                Op::Leaf => {
                    grads[i] = Some(grad); // retained for reading
                    continue;
                }
                Op::MatMul(a, b) => {
                    let da = grad.dot(&self.nodes[b.0].value.t());
                    let db = self.nodes[a.0].value.t().dot(&grad);
                    accumulate(&mut grads, a, da);
                    accumulate(&mut grads, b, db);
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, a, grad.clone());
                    accumulate(&mut grads, b, grad);
                }
                Op::Sub(a, b) => {
                    accumulate(&mut grads, a, grad.clone());
                    accumulate(&mut grads, b, -grad);
                }
                Op::Mul(a, b) => {
                    let da = &grad * &self.nodes[b.0].value;
                    let db = &grad * &self.nodes[a.0].value;
                    accumulate(&mut grads, a, da);
                    accumulate(&mut grads, b, db);
                }
                Op::AddRowVec(a, row) => {
                    let drow = grad.sum_axis(Axis(0)).insert_axis(Axis(0));
                    accumulate(&mut grads, a, grad);
                    accumulate(&mut grads, row, drow);
                }
                Op::AddColVec(a, col) => {
                    let dcol = grad.sum_axis(Axis(1)).insert_axis(Axis(1));
                    accumulate(&mut grads, a, grad);
                    accumulate(&mut grads, col, dcol);
                }
                Op::MulRowVec(a, row) => {
                    let da = &grad * &self.nodes[row.0].value;
                    let drow = (&grad * &self.nodes[a.0].value)
                        .sum_axis(Axis(0))
                        .insert_axis(Axis(0));
                    accumulate(&mut grads, a, da);
                    accumulate(&mut grads, row, drow);
                }
                Op::Scale(a, factor) => {
                    accumulate(&mut grads, a, grad.mapv(|x| x * factor));
                }
                Op::Sigmoid(a) => {
                    let y = &self.nodes[i].value;
                    let da = &grad * &(y * &y.mapv(|v| 1.0 - v));
                    accumulate(&mut grads, a, da);
                }
                Op::Tanh(a) => {
                    let y = &self.nodes[i].value;
                    let da = &grad * &y.mapv(|v| 1.0 - v * v);
                    accumulate(&mut grads, a, da);
                }
                Op::Relu(a) => {
                    let x = &self.nodes[a.0].value;
                    let da = &grad * &x.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
                    accumulate(&mut grads, a, da);
                }
                Op::Transpose(a) => {
                    accumulate(&mut grads, a, grad.t().to_owned());
                }
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let (_, pm) = self.nodes[p.0].value.dim();
                        let slice = grad.slice(ndarray::s![.., offset..offset + pm]).to_owned();
                        accumulate(&mut grads, p, slice);
                        offset += pm;
                    }
                }
                Op::ConcatRows(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let (pn, _) = self.nodes[p.0].value.dim();
                        let slice = grad.slice(ndarray::s![offset..offset + pn, ..]).to_owned();
                        accumulate(&mut grads, p, slice);
                        offset += pn;
                    }
                }
                Op::SliceRows(a, start, end) => {
                    let mut da = Array2::zeros(self.nodes[a.0].value.dim());
                    da.slice_mut(ndarray::s![start..end, ..]).assign(&grad);
                    accumulate(&mut grads, a, da);
                }
                Op::GatherRows(a, indices) => {
                    let mut da = Array2::zeros(self.nodes[a.0].value.dim());
                    for (k, &idx) in indices.iter().enumerate() {
                        let mut row = da.row_mut(idx);
                        row += &grad.row(k);
                    }
                    accumulate(&mut grads, a, da);
                }
                Op::SumAll(a) => {
                    let da = Array2::from_elem(self.nodes[a.0].value.dim(), grad[(0, 0)]);
                    accumulate(&mut grads, a, da);
                }
                Op::SoftmaxRows(a) => {
                    let y = &self.nodes[i].value;
                    let (n, _) = y.dim();
                    let mut da = Array2::zeros(y.dim());
                    for r in 0..n {
                        let yr = y.row(r);
                        let gr = grad.row(r);
                        let dot: f64 = yr.iter().zip(gr.iter()).map(|(a, b)| a * b).sum();
                        for (c, slot) in da.row_mut(r).iter_mut().enumerate() {
                            *slot = yr[c] * (gr[c] - dot);
                        }
                    }
                    accumulate(&mut grads, a, da);
                }
                Op::RowMax(a) => {
                    let x = &self.nodes[a.0].value;
                    let mut da = Array2::zeros(x.dim());
                    for r in 0..x.nrows() {
                        let arg = argmax(x.row(r).iter().copied());
                        da[(r, arg)] = grad[(r, 0)];
                    }
                    accumulate(&mut grads, a, da);
                }
                Op::ColMax(a) => {
                    let x = &self.nodes[a.0].value;
                    let mut da = Array2::zeros(x.dim());
                    for c in 0..x.ncols() {
                        let arg = argmax(x.column(c).iter().copied());
                        da[(arg, c)] = grad[(0, c)];
                    }
                    accumulate(&mut grads, a, da);
                }
                Op::MarginalNll(scores, gold) => {
                    let row = &self.nodes[scores.0].value;
                    let n = row.ncols();
                    let lse_all = log_sum_exp(row.iter().copied());
                    let lse_gold = log_sum_exp(gold.iter().map(|&i| row[(0, i)]));
                    let mut da = Array2::zeros((1, n));
                    for j in 0..n {
                        da[(0, j)] = (row[(0, j)] - lse_all).exp();
                    }
                    for &j in &gold {
                        da[(0, j)] -= (row[(0, j)] - lse_gold).exp();
                    }
                    da.mapv_inplace(|v| v * grad[(0, 0)]);
                    accumulate(&mut grads, scores, da);
                }
            }
        }
        self.grads = grads;
    }

    /// Gradient of the last `backward` call at a node. Only leaf gradients
    /// are retained; interior nodes report zeros once consumed.
    pub fn grad(&self, v: Var) -> Array2<f64> {
        match &self.grads.get(v.0) {
            Some(Some(g)) => g.clone(),
            _ => Array2::zeros(self.nodes[v.0].value.dim()),
        }
    }

    /// Adds `scale ×` the bound parameters' gradients into the store.
    pub fn accumulate_grads(&self, store: &mut ParamStore, scale: f64) {
        for (name, var) in &self.bindings {
            if let Some(Some(g)) = self.grads.get(var.0) {
                let slot = &mut store.get_mut(name).grad;
                slot.zip_mut_with(g, |acc, gv| *acc += scale * gv);
            }
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }
}

fn accumulate(grads: &mut [Option<Array2<f64>>], target: Var, grad: Array2<f64>) {
    match &mut grads[target.0] {
        Some(existing) => *existing += &grad,
        slot @ None => *slot = Some(grad),
    }
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    best
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

pub(crate) fn softmax_rows(input: &Array2<f64>) -> Array2<f64> {
    let mut out = input.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}
