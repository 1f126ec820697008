//! Numeric oracles for the differentiable layers: every formula is
//! recomputed by explicit loops, independent of the tape.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hopaudit::neural::{
    attention_flow, bilinear, embed, maxpool, sequence_summary, softmax, uniform,
    AttentionFlowSpec, BiGruSpec, Graph, ParamStore, TrainingConfig,
};

fn rows(g: &Graph, v: hopaudit::neural::Var) -> Vec<Vec<f64>> {
    g.value(v).rows().into_iter().map(|r| r.to_vec()).collect()
}

#[test]
fn bilinear_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut store = ParamStore::new();
    store.register("u", uniform(&mut rng, 1, 4, 1.0));
    store.register("w", uniform(&mut rng, 4, 4, 1.0));
    store.register("v", uniform(&mut rng, 1, 4, 1.0));

    let mut g = Graph::new();
    let u = g.param(&store, "u");
    let w = g.param(&store, "w");
    let v = g.param(&store, "v");
    let out = bilinear(&mut g, u, w, v).unwrap();

    let (uv, wv, vv) = (
        store.get("u").value.clone(),
        store.get("w").value.clone(),
        store.get("v").value.clone(),
    );
    let mut expected = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            expected += uv[(0, i)] * wv[(i, j)] * vv[(0, j)];
        }
    }
    assert!((g.scalar_value(out) - expected).abs() < 1e-10);
}

#[test]
fn bilinear_identity_and_orthogonal_cases() {
    let mut store = ParamStore::new();
    store.register("w", Array2::eye(3));
    store.register("e0", Array2::from_shape_vec((1, 3), vec![1.0, 0.0, 0.0]).unwrap());
    store.register("e1", Array2::from_shape_vec((1, 3), vec![0.0, 1.0, 0.0]).unwrap());

    let mut g = Graph::new();
    let w = g.param(&store, "w");
    let e0 = g.param(&store, "e0");
    let e1 = g.param(&store, "e1");
    let same = bilinear(&mut g, e0, w, e0).unwrap();
    let orth = bilinear(&mut g, e0, w, e1).unwrap();
    assert_eq!(g.scalar_value(same), 1.0);
    assert_eq!(g.scalar_value(orth), 0.0);
}

#[test]
fn bilinear_shape_mismatch_is_an_error() {
    let mut store = ParamStore::new();
    store.register("u", Array2::zeros((1, 3)));
    store.register("w", Array2::zeros((4, 4)));
    store.register("v", Array2::zeros((1, 4)));
    let mut g = Graph::new();
    let u = g.param(&store, "u");
    let w = g.param(&store, "w");
    let v = g.param(&store, "v");
    assert!(bilinear(&mut g, u, w, v).is_err());
}

#[test]
fn maxpool_is_columnwise_max_and_permutation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let values = uniform(&mut rng, 5, 4, 2.0);
    let mut expected = vec![f64::NEG_INFINITY; 4];
    for i in 0..5 {
        for j in 0..4 {
            expected[j] = expected[j].max(values[(i, j)]);
        }
    }

    let encode = |perm: &[usize]| -> Vec<f64> {
        let permuted = values.select(ndarray::Axis(0), perm);
        let mut g = Graph::new();
        let states_var = g.constant(permuted);
        let states = hopaudit::neural::SeqStates {
            states: states_var,
            len: 5,
            fwd_last: states_var,
            bwd_last: states_var,
            dim: 4,
        };
        let pooled = maxpool(&mut g, &states);
        g.value(pooled).iter().copied().collect()
    };

    let identity = encode(&[0, 1, 2, 3, 4]);
    let shuffled = encode(&[3, 0, 4, 2, 1]);
    for j in 0..4 {
        assert!((identity[j] - expected[j]).abs() < 1e-12);
        assert_eq!(identity[j], shuffled[j]);
    }
}

/// Step-by-step scalar replay of the GRU recurrence, written without the
/// tape: z/r gates, candidate, interpolation.
fn oracle_gru_sequence(
    store: &ParamStore,
    prefix: &str,
    inputs: &[Vec<f64>],
    hidden: usize,
) -> Vec<Vec<f64>> {
    let get = |name: &str| store.get(&format!("{prefix}.{name}")).value.clone();
    let (wz, uz, bz) = (get("wz"), get("uz"), get("bz"));
    let (wr, ur, br) = (get("wr"), get("ur"), get("br"));
    let (wc, uc, bc) = (get("wc"), get("uc"), get("bc"));
    let sigmoid = |x: f64| 1.0 / (1.0 + (-x).exp());

    let matvec = |m: &Array2<f64>, v: &[f64]| -> Vec<f64> {
        let (rows, cols) = m.dim();
        assert_eq!(rows, v.len());
        (0..cols)
            .map(|j| (0..rows).map(|i| v[i] * m[(i, j)]).sum())
            .collect()
    };

    let mut h = vec![0.0; hidden];
    let mut states = Vec::new();
    for x in inputs {
        let xz = matvec(&wz, x);
        let hz = matvec(&uz, &h);
        let z: Vec<f64> = (0..hidden)
            .map(|k| sigmoid(xz[k] + hz[k] + bz[(0, k)]))
            .collect();
        let xr = matvec(&wr, x);
        let hr = matvec(&ur, &h);
        let r: Vec<f64> = (0..hidden)
            .map(|k| sigmoid(xr[k] + hr[k] + br[(0, k)]))
            .collect();
        let rh: Vec<f64> = (0..hidden).map(|k| r[k] * h[k]).collect();
        let xc = matvec(&wc, x);
        let hc = matvec(&uc, &rh);
        let cand: Vec<f64> = (0..hidden)
            .map(|k| (xc[k] + hc[k] + bc[(0, k)]).tanh())
            .collect();
        h = (0..hidden)
            .map(|k| (1.0 - z[k]) * h[k] + z[k] * cand[k])
            .collect();
        states.push(h.clone());
    }
    states
}

#[test]
fn bigru_states_match_recurrence_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let spec = BiGruSpec::new("enc", 3, 2);
    let mut store = ParamStore::new();
    spec.init(&mut store, &mut rng);
    let embedded = uniform(&mut rng, 3, 3, 1.0); // 3 tokens, dim 3

    let mut g = Graph::new();
    let vars = spec.bind(&mut g, &store);
    let emb = g.constant(embedded.clone());
    let states = vars.encode(&mut g, emb);
    let got = rows(&g, states.states);

    let inputs: Vec<Vec<f64>> = embedded.rows().into_iter().map(|r| r.to_vec()).collect();
    let fwd = oracle_gru_sequence(&store, "enc.fwd", &inputs, 2);
    let reversed: Vec<Vec<f64>> = inputs.iter().rev().cloned().collect();
    let bwd_rev = oracle_gru_sequence(&store, "enc.bwd", &reversed, 2);

    for t in 0..3 {
        let expected: Vec<f64> = fwd[t]
            .iter()
            .chain(bwd_rev[2 - t].iter())
            .copied()
            .collect();
        for (a, b) in got[t].iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-12, "position {t}: {a} vs {b}");
        }
    }

    // Summary = [final forward ; final backward]
    let summary = sequence_summary(&mut g, &states);
    let got_summary: Vec<f64> = g.value(summary).iter().copied().collect();
    let expected_summary: Vec<f64> = fwd[2].iter().chain(bwd_rev[2].iter()).copied().collect();
    for (a, b) in got_summary.iter().zip(expected_summary.iter()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn length_one_sequence_summary_equals_single_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let spec = BiGruSpec::new("enc", 3, 2);
    let mut store = ParamStore::new();
    spec.init(&mut store, &mut rng);

    let mut g = Graph::new();
    let vars = spec.bind(&mut g, &store);
    let emb = g.constant(uniform(&mut rng, 1, 3, 1.0));
    let states = vars.encode(&mut g, emb);
    let summary = sequence_summary(&mut g, &states);
    let state_row: Vec<f64> = g.value(states.states).iter().copied().collect();
    let summary_row: Vec<f64> = g.value(summary).iter().copied().collect();
    assert_eq!(state_row, summary_row);
}

#[test]
fn padding_is_neutral_for_the_encoding_pipeline() {
    // Appending padding ids leaves the encoded states and summary bitwise
    // unchanged (padding is stripped before the tape is built).
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let config = TrainingConfig {
        embedding_dim: 4,
        hidden_dim: 3,
        ..TrainingConfig::default()
    };
    let spec = BiGruSpec::new("enc", config.embedding_dim, config.hidden_dim);
    let mut store = ParamStore::new();
    store.register("embed.matrix", uniform(&mut rng, 10, 4, 0.5));
    spec.init(&mut store, &mut rng);

    let encode = |ids: &[usize]| -> Vec<f64> {
        let mut g = Graph::new();
        let embedding = g.param(&store, "embed.matrix");
        let vars = spec.bind(&mut g, &store);
        let states = hopaudit::neural::encode_tokens(&mut g, embedding, &vars, ids).unwrap();
        let summary = sequence_summary(&mut g, &states);
        g.value(summary).iter().copied().collect()
    };
    let plain = encode(&[2, 5, 7]);
    let padded = encode(&[2, 5, 7, 0, 0, 0]);
    for (a, b) in plain.iter().zip(padded.iter()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn embed_gathers_rows_and_zero_pad_row() {
    let mut store = ParamStore::new();
    let matrix = Array2::from_shape_fn((4, 2), |(i, j)| (i * 10 + j) as f64);
    let mut with_zero_pad = matrix.clone();
    with_zero_pad.row_mut(0).fill(0.0);
    store.register("embed.matrix", with_zero_pad.clone());

    let mut g = Graph::new();
    let e = g.param(&store, "embed.matrix");
    let out = embed(&mut g, e, &[2, 0, 1]);
    let got = rows(&g, out);
    assert_eq!(got[0], vec![20.0, 21.0]);
    assert_eq!(got[1], vec![0.0, 0.0], "padding row is zero");
    assert_eq!(got[2], vec![10.0, 11.0]);

    let empty = embed(&mut g, e, &[]);
    assert_eq!(g.shape(empty), (0, 2));
}

/// Brute-force attention-flow oracle over a 2×3 instance, enumerating the
/// similarity, both attention directions, and the fused output.
#[test]
fn attention_flow_matches_bruteforce_enumeration() {
    let dim = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let spec = AttentionFlowSpec::new("attn", dim);
    let mut store = ParamStore::new();
    spec.init(&mut store, &mut rng);
    let context = uniform(&mut rng, 2, dim, 1.0);
    let query = uniform(&mut rng, 3, dim, 1.0);

    let mut g = Graph::new();
    let vars = spec.bind(&mut g, &store);
    let mk = |g: &mut Graph, m: &Array2<f64>| {
        let v = g.constant(m.clone());
        hopaudit::neural::SeqStates {
            states: v,
            len: m.nrows(),
            fwd_last: v,
            bwd_last: v,
            dim,
        }
    };
    let c_states = mk(&mut g, &context);
    let q_states = mk(&mut g, &query);
    let fused = attention_flow(&mut g, &vars, &c_states, &q_states, false);
    let got = rows(&g, fused);

    // Oracle: s_ij = w_ctx·c_i + w_query·q_j + w_prod·(c_i∘q_j)
    let w_ctx = store.get("attn.w_ctx").value.clone();
    let w_query = store.get("attn.w_query").value.clone();
    let w_prod = store.get("attn.w_prod").value.clone();
    let mut sim = [[0.0f64; 3]; 2];
    for i in 0..2 {
        for j in 0..3 {
            let mut s = 0.0;
            for k in 0..dim {
                s += w_ctx[(k, 0)] * context[(i, k)];
                s += w_query[(k, 0)] * query[(j, k)];
                s += w_prod[(0, k)] * context[(i, k)] * query[(j, k)];
            }
            sim[i][j] = s;
        }
    }
    // context→query rows
    let mut attended = [[0.0f64; 2]; 2];
    for i in 0..2 {
        let probs = softmax(&sim[i]);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        for k in 0..dim {
            attended[i][k] = (0..3).map(|j| probs[j] * query[(j, k)]).sum();
        }
    }
    // query→context over row maxima
    let row_max: Vec<f64> = (0..2)
        .map(|i| sim[i].iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let q2c_w = softmax(&row_max);
    let q2c: Vec<f64> = (0..dim)
        .map(|k| (0..2).map(|i| q2c_w[i] * context[(i, k)]).sum())
        .collect();

    for i in 0..2 {
        for k in 0..dim {
            let c = context[(i, k)];
            let a = attended[i][k];
            assert!((got[i][k] - c).abs() < 1e-8, "c block");
            assert!((got[i][dim + k] - a).abs() < 1e-8, "attended block");
            assert!((got[i][2 * dim + k] - c * a).abs() < 1e-8, "c∘a block");
            assert!((got[i][3 * dim + k] - c * q2c[k]).abs() < 1e-8, "c∘q2c block");
        }
    }
}

#[test]
fn attention_with_single_query_state_degenerates_to_it() {
    let dim = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let spec = AttentionFlowSpec::new("attn", dim);
    let mut store = ParamStore::new();
    spec.init(&mut store, &mut rng);
    let context = uniform(&mut rng, 4, dim, 1.0);
    let query = uniform(&mut rng, 1, dim, 1.0);

    let mut g = Graph::new();
    let vars = spec.bind(&mut g, &store);
    let c_var = g.constant(context);
    let q_var = g.constant(query.clone());
    let c_states = hopaudit::neural::SeqStates {
        states: c_var,
        len: 4,
        fwd_last: c_var,
        bwd_last: c_var,
        dim,
    };
    let q_states = hopaudit::neural::SeqStates {
        states: q_var,
        len: 1,
        fwd_last: q_var,
        bwd_last: q_var,
        dim,
    };
    let fused = attention_flow(&mut g, &vars, &c_states, &q_states, false);
    let got = rows(&g, fused);
    for row in got {
        for k in 0..dim {
            assert!((row[dim + k] - query[(0, k)]).abs() < 1e-12);
        }
    }
}

#[test]
fn ffnn_zero_weights_returns_output_bias() {
    let spec = hopaudit::neural::FfnnSpec::new("ffnn", 4, 3);
    let mut store = ParamStore::new();
    store.register("ffnn.w1", Array2::zeros((4, 3)));
    store.register("ffnn.b1", Array2::zeros((1, 3)));
    store.register("ffnn.w2", Array2::zeros((3, 1)));
    store.register("ffnn.b2", Array2::from_elem((1, 1), 0.73));

    let mut g = Graph::new();
    let vars = spec.bind(&mut g, &store);
    let x = g.constant(Array2::from_elem((1, 4), 5.0));
    let score = vars.score(&mut g, x);
    assert_eq!(g.scalar_value(score), 0.73);
}

#[test]
fn ffnn_hidden_layer_is_positively_homogeneous_with_zero_biases() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let spec = hopaudit::neural::FfnnSpec::new("ffnn", 3, 4);
    let mut store = ParamStore::new();
    store.register("ffnn.w1", uniform(&mut rng, 3, 4, 1.0));
    store.register("ffnn.b1", Array2::zeros((1, 4)));
    store.register("ffnn.w2", uniform(&mut rng, 4, 1, 1.0));
    store.register("ffnn.b2", Array2::zeros((1, 1)));

    let x = uniform(&mut rng, 1, 3, 1.0);
    let score_of = |scale: f64| {
        let mut g = Graph::new();
        let vars = spec.bind(&mut g, &store);
        let input = g.constant(x.mapv(|v| v * scale));
        let s = vars.score(&mut g, input);
        g.scalar_value(s)
    };
    let base = score_of(1.0);
    let tripled = score_of(3.0);
    assert!((tripled - 3.0 * base).abs() < 1e-10);
}

#[test]
fn graph_marginal_agrees_with_plain_softmax_route() {
    let scores = vec![0.2, -1.3, 2.4, 0.0, 0.9];
    let gold = vec![1usize, 3];
    let p = softmax(&scores);
    let plain = hopaudit::neural::marginal_nll(&p, &gold).unwrap();

    let mut g = Graph::new();
    let row = g.constant(Array2::from_shape_vec((1, 5), scores).unwrap());
    let fused = g.marginal_nll_from_scores(row, &gold);
    assert!((g.scalar_value(fused) - plain).abs() < 1e-10);
}

#[test]
fn random_marginal_cases_match_summation_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..100 {
        let n = 2 + (rand::Rng::random_range(&mut rng, 0..8usize));
        let scores: Vec<f64> =
            (0..n).map(|_| rand::Rng::random_range(&mut rng, -3.0..3.0)).collect();
        let k = 1 + rand::Rng::random_range(&mut rng, 0..n);
        let mut gold: Vec<usize> = (0..n).collect();
        for i in (1..gold.len()).rev() {
            let j = rand::Rng::random_range(&mut rng, 0..=i);
            gold.swap(i, j);
        }
        gold.truncate(k);
        let p = softmax(&scores);
        let total: f64 = gold.iter().map(|&i| p[i]).sum();
        let expected = -total.ln();
        let got = hopaudit::neural::marginal_nll(&p, &gold).unwrap();
        assert!((got - expected).abs() < 1e-10);
    }
}
