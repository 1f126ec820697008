//! Auditing toolkit for multi-hop question answering datasets.
//!
//! The crate loads WikiHop / HotpotQA / SQuAD style corpora into one
//! canonical representation, recasts them between span-based and
//! multiple-choice supervision, and trains a family of deliberately
//! restricted probe models (sentence-factored scorers, a no-context
//! candidate scorer) next to full readers (a memory network and a
//! BiDAF-style attention model). Comparing the restricted and full
//! models quantifies how much of a dataset is solvable without
//! combining evidence across sentences.
//!
//! Modules mirror the pipeline:
//!
//! * [`corpus`] — loaders, tokenization, vocabulary, canonical JSONL.
//! * [`transforms`] — answer matching, supervision recasting, distractor
//!   sampling, option-count sweeps.
//! * [`neural`] — a small reverse-mode tape over `ndarray`, GRU encoders,
//!   attention layers, losses, Adam, and a finite-difference checker.
//! * [`probes`] — the restricted diagnostic models.
//! * [`models`] — the full readers and span decoding.
//! * [`harness`] — metrics, experiment running, the probe suite, reports.

pub mod corpus;
pub mod error;
pub mod harness;
pub mod models;
pub mod neural;
pub mod probes;
pub mod transforms;

pub use corpus::{
    Dataset, DocumentRecord, QAExample, SentenceRecord, SpanAddress, Split, Supervision, Vocab,
};
pub use error::{Error, Result};
pub use neural::{Graph, ParamStore, TrainingConfig, Var};
