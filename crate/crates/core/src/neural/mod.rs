//! Differentiable building blocks shared by all models.
//!
//! Forward passes build a [`Graph`] (a reverse-mode tape over `ndarray`
//! matrices); `Graph::backward` fills parameter gradients, [`Adam`] applies
//! updates, and [`grad_check`] verifies any loss against central finite
//! differences at double precision.
//!
//! One trainer owns the [`ParamStore`] while training; evaluation may share
//! read-only snapshots freely.

mod adam;
mod checkpoint;
mod config;
mod encoding;
mod gradcheck;
mod graph;
mod gru;
mod layers;
mod losses;
mod params;

pub use adam::{clip_gradients, Adam};
pub use encoding::{encode_dataset, EncodedCandidate, EncodedExample};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use config::TrainingConfig;
pub use gradcheck::{grad_check, GradCheckReport};
pub use graph::{Graph, Var};
pub use gru::{sequence_summary, BiGruSpec, BiGruVars, GruCellSpec, GruCellVars, SeqStates};
pub use layers::{
    attention_flow, bilinear, embed, maxpool, strip_padding, AttentionFlowSpec, AttentionFlowVars,
    FfnnSpec, FfnnVars, LinearSpec, LinearVars, MASK_NEG,
};
pub use losses::{argmax, categorical_nll, marginal_nll, softmax, span_nll};
pub use params::{uniform, xavier, ParamStore, ParamTensor};

use rand_chacha::ChaCha8Rng;

use crate::corpus::Vocab;
use crate::error::{Error, Result};

/// Registers the embedding matrix: pretrained rows when the vocabulary
/// carries them, uniform ±0.1 otherwise; the padding row is pinned to zero.
pub const EMBEDDING_PARAM: &str = "embed.matrix";

pub fn init_embeddings(
    store: &mut ParamStore,
    vocab: &Vocab,
    rng: &mut ChaCha8Rng,
    trainable: bool,
) {
    let mut matrix = match &vocab.embeddings {
        Some(m) => m.clone(),
        None => uniform(rng, vocab.size(), vocab.embedding_dim, 0.1),
    };
    for v in matrix.row_mut(crate::corpus::PAD_INDEX) {
        *v = 0.0;
    }
    store.register_with(EMBEDDING_PARAM, matrix, trainable);
}

/// Embeds and encodes a token-id sequence after stripping padding.
/// Errors when nothing but padding remains.
pub fn encode_tokens(
    g: &mut Graph,
    embedding: Var,
    encoder: &BiGruVars,
    token_ids: &[usize],
) -> Result<SeqStates> {
    let real = strip_padding(token_ids);
    if real.is_empty() {
        return Err(Error::EmptySequence("encode_tokens"));
    }
    let embedded = embed(g, embedding, &real);
    Ok(encoder.encode(g, embedded))
}
