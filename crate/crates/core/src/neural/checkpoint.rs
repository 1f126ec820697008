//! Parameter checkpoints: a named-array archive with a JSON manifest.
//!
//! Layout (version 1):
//!
//! ```text
//! 8 bytes  magic  b"HOPCKPT1"
//! 8 bytes  manifest length, little-endian u64
//! N bytes  manifest JSON (model kind, config, vocab tokens, array table)
//! .        array payloads: f64 little-endian, row-major, manifest order
//! ```

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::config::TrainingConfig;
use super::params::ParamStore;
use crate::corpus::Vocab;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"HOPCKPT1";
const VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct Manifest {
    version: u64,
    model: String,
    config: TrainingConfig,
    vocab_tokens: Vec<String>,
    embedding_dim: usize,
    arrays: Vec<ArrayEntry>,
}

#[derive(Serialize, Deserialize)]
struct ArrayEntry {
    name: String,
    rows: usize,
    cols: usize,
    dtype: String,
    trainable: bool,
}

pub struct Checkpoint {
    pub model: String,
    pub config: TrainingConfig,
    pub vocab: Vocab,
    pub params: ParamStore,
}

pub fn save_checkpoint(
    path: &Path,
    model: &str,
    config: &TrainingConfig,
    vocab: &Vocab,
    params: &ParamStore,
) -> Result<()> {
    let manifest = Manifest {
        version: VERSION,
        model: model.to_string(),
        config: config.clone(),
        vocab_tokens: vocab.tokens().to_vec(),
        embedding_dim: vocab.embedding_dim,
        arrays: params
            .iter()
            .map(|p| ArrayEntry {
                name: p.name.clone(),
                rows: p.value.nrows(),
                cols: p.value.ncols(),
                dtype: "f64".to_string(),
                trainable: p.trainable,
            })
            .collect(),
    };
    let manifest_json =
        serde_json::to_vec(&manifest).map_err(|e| Error::Data(format!("manifest: {e}")))?;

    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let io_err = |e: std::io::Error| Error::io(path, e);
    file.write_all(MAGIC).map_err(io_err)?;
    file.write_all(&(manifest_json.len() as u64).to_le_bytes())
        .map_err(io_err)?;
    file.write_all(&manifest_json).map_err(io_err)?;
    for p in params.iter() {
        let mut bytes = Vec::with_capacity(p.value.len() * 8);
        for v in p.value.iter() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        file.write_all(&bytes).map_err(io_err)?;
    }
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let io_err = |e: std::io::Error| Error::io(path, e);

    let mut magic = [0u8; 8];
    file.read_exact(&mut magic).map_err(io_err)?;
    if &magic != MAGIC {
        return Err(Error::Data(format!(
            "{}: not a checkpoint file",
            path.display()
        )));
    }
    let mut len_bytes = [0u8; 8];
    file.read_exact(&mut len_bytes).map_err(io_err)?;
    let manifest_len = u64::from_le_bytes(len_bytes) as usize;
    let mut manifest_json = vec![0u8; manifest_len];
    file.read_exact(&mut manifest_json).map_err(io_err)?;
    let manifest: Manifest = serde_json::from_slice(&manifest_json)
        .map_err(|e| Error::Data(format!("{}: bad manifest: {e}", path.display())))?;
    if manifest.version != VERSION {
        return Err(Error::SchemaVersion {
            found: manifest.version,
            expected: VERSION,
        });
    }

    let mut params = ParamStore::new();
    for entry in &manifest.arrays {
        if entry.dtype != "f64" {
            return Err(Error::Data(format!(
                "{}: unsupported dtype {} for {}",
                path.display(),
                entry.dtype,
                entry.name
            )));
        }
        let count = entry.rows * entry.cols;
        let mut bytes = vec![0u8; count * 8];
        file.read_exact(&mut bytes).map_err(io_err)?;
        let values: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let array = Array2::from_shape_vec((entry.rows, entry.cols), values)
            .map_err(|e| Error::Data(format!("{}: {e}", entry.name)))?;
        params.register_with(&entry.name, array, entry.trainable);
    }

    Ok(Checkpoint {
        model: manifest.model,
        config: manifest.config,
        vocab: Vocab::from_tokens(manifest.vocab_tokens, manifest.embedding_dim),
        params,
    })
}
