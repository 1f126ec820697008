//! Canonical line-delimited JSON serialization of datasets.
//!
//! The first line is a header `{"schema_version": 1, "name": ..., "split": ...}`;
//! every following line is one example.

use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, QAExample, Split};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    schema_version: u64,
    name: String,
    split: Split,
}

pub fn write_canonical(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let header = Header {
        schema_version: SCHEMA_VERSION,
        name: dataset.name.clone(),
        split: dataset.split,
    };
    let io_err = |e: std::io::Error| Error::io(path, e);
    serde_json::to_writer(&mut out, &header).map_err(|e| Error::Data(e.to_string()))?;
    out.write_all(b"\n").map_err(io_err)?;
    for example in &dataset.examples {
        serde_json::to_writer(&mut out, example).map_err(|e| Error::Data(e.to_string()))?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn read_canonical(path: &Path) -> Result<Dataset> {
    let text = super::read_to_string(path)?;
    let mut lines = text.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Data(format!("{}: empty canonical file", path.display())))?;
    // Version is checked before full header validation so an old file with
    // a different header shape still reports the version mismatch.
    let probe: serde_json::Value = serde_json::from_str(header_line)
        .map_err(|e| Error::Data(format!("{}: bad header: {e}", path.display())))?;
    let found = probe
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Data(format!("{}: header missing schema_version", path.display())))?;
    if found != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found,
            expected: SCHEMA_VERSION,
        });
    }
    let header: Header = serde_json::from_str(header_line)
        .map_err(|e| Error::Data(format!("{}: bad header: {e}", path.display())))?;
    let mut examples = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let example: QAExample = serde_json::from_str(line).map_err(|e| {
            Error::Data(format!("{}: bad example on line {}: {e}", path.display(), i + 2))
        })?;
        examples.push(example);
    }
    Ok(Dataset {
        name: header.name,
        split: header.split,
        examples,
    })
}
