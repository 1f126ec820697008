//! Orchestration: metrics, synthetic corpora, the training loop, the
//! experiment runner, the probe suite, and report emission.

pub mod experiment;
pub mod metrics;
pub mod report;
pub mod suite;
pub mod synth;
pub mod train;

pub use experiment::{
    config_hash, evaluate_checkpoint, run_experiment, run_model, CellOutcome, ExperimentConfig,
    ModelKind, TransformSpec,
};
pub use metrics::{
    best_em_f1, evaluate_mc_accuracy, evaluate_span_text, exact_match, normalize_answer, token_f1,
    MetricsRow,
};
pub use report::{
    emit_report, read_report, render_markdown, ProbeReport, ReportSection, SectionKind,
    REPORT_SCHEMA_VERSION,
};
pub use suite::{run_probe_suite, suite_config_hash, DatasetPair, SuiteConfig};
pub use synth::{
    candidate_type_corpus, entity_sweep_corpus, lexical_overlap_corpus, null_mc_corpus,
    null_sentence_corpus, null_span_corpus, span_overlap_corpus, SynthPair, SynthSpec,
};
pub use train::{train_loop, EpochContext, TrainLog};
