//! The probe suite: runs the full battery over bundled synthetic corpora
//! and any supplied datasets, assembling a [`ProbeReport`].

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, Supervision};
use crate::error::Result;
use crate::neural::TrainingConfig;
use crate::transforms::{derive_seed, sweep_option_counts, AnswerMatcher};

use super::experiment::{run_model, ModelKind};
use super::metrics::MetricsRow;
use super::report::{ProbeReport, ReportSection, SectionKind, REPORT_SCHEMA_VERSION};
use super::synth::{
    candidate_type_corpus, entity_sweep_corpus, lexical_overlap_corpus, span_overlap_corpus,
    SynthPair, SynthSpec,
};

/// A train/dev pair supplied to the suite.
#[derive(Debug, Clone)]
pub struct DatasetPair {
    pub name: String,
    pub train: Dataset,
    pub dev: Dataset,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub training: TrainingConfig,
    /// Sizes of the bundled synthetic corpora.
    pub synth_train: usize,
    pub synth_dev: usize,
    pub sweep_counts: Vec<usize>,
    /// Include the full (context-reading) models; the restricted probes
    /// always run.
    pub include_full_models: bool,
    /// Caps applied to supplied datasets in desk mode.
    pub max_train_examples: Option<usize>,
    pub max_dev_examples: Option<usize>,
    pub extended: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            training: TrainingConfig {
                embedding_dim: 32,
                hidden_dim: 32,
                max_epochs: 8,
                patience: 3,
                ..TrainingConfig::default()
            },
            synth_train: 500,
            synth_dev: 200,
            sweep_counts: vec![10, 20, 50],
            include_full_models: true,
            max_train_examples: Some(500),
            max_dev_examples: Some(200),
            extended: false,
        }
    }
}

impl SuiteConfig {
    /// Full-data mode: no dataset caps and full-size training settings.
    pub fn extended() -> SuiteConfig {
        SuiteConfig {
            training: TrainingConfig::default(),
            max_train_examples: None,
            max_dev_examples: None,
            extended: true,
            ..SuiteConfig::default()
        }
    }

    fn cell_training(&self, seed_tag: &str) -> TrainingConfig {
        TrainingConfig {
            seed: derive_seed(self.seed, seed_tag),
            ..self.training.clone()
        }
    }
}

/// Runs the battery. Per-cell failures are recorded in the report and do
/// not stop the suite. Deterministic given `(datasets, config.seed)`.
pub fn run_probe_suite(datasets: &[DatasetPair], config: &SuiteConfig) -> Result<ProbeReport> {
    let matcher = AnswerMatcher::default();
    let mut sections = SectionAccumulator::default();
    let mut failures = Vec::new();

    // Bundled synthetic corpora.
    let spec = SynthSpec::new(config.synth_train, config.synth_dev, config.seed);
    let lexical = lexical_overlap_corpus(spec);
    let typed = candidate_type_corpus(spec);
    let span_overlap = span_overlap_corpus(spec);
    let sweep = entity_sweep_corpus(spec);

    run_cells(
        &lexical,
        &[ModelKind::Random, ModelKind::Factored, ModelKind::FactoredBidaf],
        SectionKind::AnswerLocation,
        config,
        &matcher,
        &mut sections,
        &mut failures,
    );
    run_cells(
        &typed,
        &[ModelKind::NoContext],
        SectionKind::NoContext,
        config,
        &matcher,
        &mut sections,
        &mut failures,
    );
    if config.include_full_models {
        run_cells(
            &typed,
            &[ModelKind::MemnetMc, ModelKind::BidafppMc],
            SectionKind::MultipleChoice,
            config,
            &matcher,
            &mut sections,
            &mut failures,
        );
        run_cells(
            &span_overlap,
            &[ModelKind::MemnetSpan, ModelKind::BidafppSpan],
            SectionKind::Span,
            config,
            &matcher,
            &mut sections,
            &mut failures,
        );
    }

    // Option-count sweep over the entity-rich corpus.
    match sweep_section(&sweep, config, &matcher) {
        Ok(rows) => sections.extend(SectionKind::Sweep, rows),
        Err(e) => failures.push(format!("sweep: {e}")),
    }
    if config.include_full_models {
        // Span-supervised training evaluated as multiple choice, on the
        // 10-option recast of the sweep corpus (all candidates occur in
        // the documents there).
        match span2mc_cell(&sweep, config, &matcher) {
            Ok(rows) => sections.extend(SectionKind::MultipleChoice, rows),
            Err(e) => failures.push(format!("span2mc: {e}")),
        }
    }

    // Supplied datasets.
    for pair in datasets {
        let pair = cap_pair(pair, config);
        let synth_like = SynthPair {
            train: pair.train.clone(),
            dev: pair.dev.clone(),
        };
        run_cells(
            &synth_like,
            &[ModelKind::Random, ModelKind::Factored, ModelKind::FactoredBidaf],
            SectionKind::AnswerLocation,
            config,
            &matcher,
            &mut sections,
            &mut failures,
        );
        let all_mc = pair.train.examples.iter().all(|e| e.candidates.is_some())
            && !pair.train.is_empty();
        let all_span = pair
            .train
            .examples
            .iter()
            .all(|e| e.supervision == Supervision::Span)
            && !pair.train.is_empty();
        if all_mc {
            run_cells(
                &synth_like,
                &[ModelKind::NoContext],
                SectionKind::NoContext,
                config,
                &matcher,
                &mut sections,
                &mut failures,
            );
            if config.include_full_models {
                run_cells(
                    &synth_like,
                    &[ModelKind::MemnetMc, ModelKind::BidafppMc, ModelKind::Span2mcBidafpp],
                    SectionKind::MultipleChoice,
                    config,
                    &matcher,
                    &mut sections,
                    &mut failures,
                );
            }
        }
        if all_span && config.include_full_models {
            run_cells(
                &synth_like,
                &[ModelKind::MemnetSpan, ModelKind::BidafppSpan],
                SectionKind::Span,
                config,
                &matcher,
                &mut sections,
                &mut failures,
            );
        }
    }

    Ok(ProbeReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed: config.seed,
        config_hash: suite_config_hash(config),
        mode: if config.extended { "extended" } else { "desk" }.to_string(),
        created_at: None,
        sections: sections.into_sections(),
        failures,
    })
}

pub fn suite_config_hash(config: &SuiteConfig) -> String {
    let text = serde_json::to_string(config).unwrap_or_default();
    format!("{:016x}", derive_seed(0x5417e, &text))
}

fn cap_pair(pair: &DatasetPair, config: &SuiteConfig) -> DatasetPair {
    let cap = |ds: &Dataset, limit: Option<usize>| -> Dataset {
        match limit {
            Some(n) if ds.len() > n => Dataset {
                name: ds.name.clone(),
                split: ds.split,
                examples: ds.examples[..n].to_vec(),
            },
            _ => ds.clone(),
        }
    };
    DatasetPair {
        name: pair.name.clone(),
        train: cap(&pair.train, config.max_train_examples),
        dev: cap(&pair.dev, config.max_dev_examples),
    }
}

#[derive(Default)]
struct SectionAccumulator {
    answer_location: Vec<MetricsRow>,
    no_context: Vec<MetricsRow>,
    multiple_choice: Vec<MetricsRow>,
    span: Vec<MetricsRow>,
    sweep: Vec<MetricsRow>,
}

impl SectionAccumulator {
    fn extend(&mut self, kind: SectionKind, rows: Vec<MetricsRow>) {
        match kind {
            SectionKind::AnswerLocation => self.answer_location.extend(rows),
            SectionKind::NoContext => self.no_context.extend(rows),
            SectionKind::MultipleChoice => self.multiple_choice.extend(rows),
            SectionKind::Span => self.span.extend(rows),
            SectionKind::Sweep => self.sweep.extend(rows),
        }
    }

    fn into_sections(self) -> Vec<ReportSection> {
        let named = [
            (
                SectionKind::AnswerLocation,
                "Answer location (random + factored probes)",
                self.answer_location,
            ),
            (SectionKind::NoContext, "No-context baseline", self.no_context),
            (
                SectionKind::MultipleChoice,
                "Multiple-choice models",
                self.multiple_choice,
            ),
            (SectionKind::Span, "Span models", self.span),
            (SectionKind::Sweep, "Accuracy vs option count", self.sweep),
        ];
        named
            .into_iter()
            .map(|(kind, title, rows)| ReportSection {
                kind,
                title: title.to_string(),
                rows,
            })
            .collect()
    }
}

#[allow(clippy::too_many_arguments)]
fn run_cells(
    pair: &SynthPair,
    kinds: &[ModelKind],
    section: SectionKind,
    config: &SuiteConfig,
    matcher: &AnswerMatcher,
    sections: &mut SectionAccumulator,
    failures: &mut Vec<String>,
) {
    for kind in kinds {
        let training = config.cell_training(&format!("{}-{}", pair.train.name, kind.as_str()));
        match run_model(*kind, &pair.train, &pair.dev, &training, matcher) {
            Ok(outcome) => sections.extend(section, outcome.rows),
            Err(e) => failures.push(format!("{} on {}: {e}", kind.as_str(), pair.train.name)),
        }
    }
}

/// One no-context cell per option count plus the analytic random-guess row
/// (1/k) for each; all variants share a support set by construction.
fn sweep_section(
    sweep: &SynthPair,
    config: &SuiteConfig,
    matcher: &AnswerMatcher,
) -> Result<Vec<MetricsRow>> {
    let train_variants =
        sweep_option_counts(&sweep.train, &config.sweep_counts, config.seed, matcher)?;
    let dev_variants = sweep_option_counts(&sweep.dev, &config.sweep_counts, config.seed, matcher)?;
    let mut rows = Vec::new();
    for ((count, t), (_, d)) in train_variants.into_iter().zip(dev_variants) {
        let training = config.cell_training(&format!("sweep-{count}"));
        let outcome = run_model(ModelKind::NoContext, &t.dataset, &d.dataset, &training, matcher)?;
        for mut row in outcome.rows {
            for (k, v) in &t.skipped {
                *row.skipped.entry(format!("transform:{k}")).or_insert(0) += v;
            }
            rows.push(row);
        }
        let mut guess = MetricsRow::new(
            "random_guess",
            &d.dataset.name,
            "dev",
            "random_expectation",
            1.0 / count as f64,
        );
        guess.evaluated = d.dataset.len();
        rows.push(guess);
    }
    Ok(rows)
}

fn span2mc_cell(
    sweep: &SynthPair,
    config: &SuiteConfig,
    matcher: &AnswerMatcher,
) -> Result<Vec<MetricsRow>> {
    let count = config.sweep_counts.first().copied().unwrap_or(10);
    let train = crate::transforms::to_multiple_choice_dataset(
        &sweep.train,
        count - 1,
        config.seed,
        matcher,
    );
    let dev =
        crate::transforms::to_multiple_choice_dataset(&sweep.dev, count - 1, config.seed, matcher);
    let training = config.cell_training("span2mc");
    let outcome = run_model(
        ModelKind::Span2mcBidafpp,
        &train.dataset,
        &dev.dataset,
        &training,
        matcher,
    )?;
    Ok(outcome.rows)
}
