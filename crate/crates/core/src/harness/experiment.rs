//! Config-driven experiment execution: one (model, dataset) cell from
//! loading through training, evaluation, and artifact emission.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::corpus::{read_canonical, Dataset, Vocab};
use crate::error::{Error, Result};
use crate::models::{decode_span, span2mc_decode, BidafModel, MemNetModel, SpanPrediction};
use crate::neural::{
    encode_dataset, save_checkpoint, EncodedExample, ParamStore, TrainingConfig,
};
use crate::probes::{
    evaluate_answer_location, random_sentence_accuracy, FactoredBidafModel, FactoredModel,
    NoContextModel,
};
use crate::transforms::{
    derive_seed, label_dataset, merge_documents, resolve_gold_span, sweep_option_counts,
    to_multiple_choice_dataset, to_span_dataset, AnswerMatcher, SkipCounts,
};

use super::metrics::{evaluate_mc_accuracy, evaluate_span_text, MetricsRow};
use super::train::{train_loop, EpochContext, TrainLog};

/// Every trainable or evaluable model family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Random,
    Factored,
    FactoredBidaf,
    NoContext,
    MemnetMc,
    MemnetSpan,
    BidafppSpan,
    BidafppMc,
    Span2mcBidafpp,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Random => "random",
            ModelKind::Factored => "factored",
            ModelKind::FactoredBidaf => "factored_bidaf",
            ModelKind::NoContext => "nocontext",
            ModelKind::MemnetMc => "memnet_mc",
            ModelKind::MemnetSpan => "memnet_span",
            ModelKind::BidafppSpan => "bidafpp_span",
            ModelKind::BidafppMc => "bidafpp_mc",
            ModelKind::Span2mcBidafpp => "span2mc_bidafpp",
        }
    }

    /// True for kinds that score candidate lists.
    pub fn needs_candidates(&self) -> bool {
        matches!(
            self,
            ModelKind::NoContext
                | ModelKind::MemnetMc
                | ModelKind::BidafppMc
                | ModelKind::Span2mcBidafpp
        )
    }

    pub fn is_span(&self) -> bool {
        matches!(self, ModelKind::MemnetSpan | ModelKind::BidafppSpan)
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<ModelKind> {
        match s.replace('-', "_").as_str() {
            "random" => Ok(ModelKind::Random),
            "factored" => Ok(ModelKind::Factored),
            "factored_bidaf" => Ok(ModelKind::FactoredBidaf),
            "nocontext" | "no_context" => Ok(ModelKind::NoContext),
            "memnet_mc" => Ok(ModelKind::MemnetMc),
            "memnet_span" => Ok(ModelKind::MemnetSpan),
            "bidafpp_span" => Ok(ModelKind::BidafppSpan),
            "bidafpp_mc" => Ok(ModelKind::BidafppMc),
            "span2mc_bidafpp" => Ok(ModelKind::Span2mcBidafpp),
            other => Err(Error::Config(format!("unknown model kind '{other}'"))),
        }
    }
}

/// Dataset recast applied before the model runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TransformSpec {
    None,
    LabelAnswers,
    ToMc { distractors: usize, seed: u64 },
    ToSpan,
    Sweep { counts: Vec<usize>, seed: u64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub train_path: PathBuf,
    pub dev_path: Option<PathBuf>,
    pub transform: TransformSpec,
    pub model: ModelKind,
    #[serde(default)]
    pub training: TrainingConfig,
    pub output_dir: PathBuf,
}

/// Result of one model × dataset cell.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub rows: Vec<MetricsRow>,
    pub predictions: Vec<serde_json::Value>,
    pub checkpoint: Option<(String, ParamStore, Vocab)>,
    pub train_log: Option<TrainLog>,
}

/// Trains (when applicable) and evaluates one model on a train/dev pair.
/// Configuration problems (model incompatible with the data's supervision)
/// are reported before any training starts.
pub fn run_model(
    kind: ModelKind,
    train: &Dataset,
    dev: &Dataset,
    config: &TrainingConfig,
    matcher: &AnswerMatcher,
) -> Result<CellOutcome> {
    config.validate()?;
    validate_compatibility(kind, train)?;
    match kind {
        ModelKind::Random => run_random(train, dev, config, matcher),
        ModelKind::Factored | ModelKind::FactoredBidaf => {
            run_sentence_probe(kind, train, dev, config, matcher)
        }
        ModelKind::NoContext | ModelKind::MemnetMc | ModelKind::BidafppMc => {
            run_mc_model(kind, train, dev, config, matcher)
        }
        ModelKind::MemnetSpan | ModelKind::BidafppSpan => {
            run_span_model(kind, train, dev, config, matcher)
        }
        ModelKind::Span2mcBidafpp => run_span2mc(train, dev, config, matcher),
    }
}

fn validate_compatibility(kind: ModelKind, train: &Dataset) -> Result<()> {
    if kind.needs_candidates() {
        let missing = train
            .examples
            .iter()
            .filter(|e| e.candidates.is_none())
            .count();
        if missing > 0 {
            return Err(Error::Config(format!(
                "model {} needs multiple-choice data but {missing} train examples have no candidates",
                kind.as_str()
            )));
        }
    }
    if kind.is_span() {
        let non_span = train
            .examples
            .iter()
            .filter(|e| e.supervision != crate::corpus::Supervision::Span)
            .count();
        if non_span > 0 {
            return Err(Error::Config(format!(
                "model {} needs span supervision but {non_span} train examples are multiple-choice",
                kind.as_str()
            )));
        }
    }
    Ok(())
}

/// Labels answer sentences unless the dataset already carries flags
/// (bundled synthetic corpora arrive pre-labeled).
fn ensure_labels(dataset: &Dataset, matcher: &AnswerMatcher) -> Dataset {
    let has_flags = dataset
        .examples
        .iter()
        .any(|e| e.flat_sentences().iter().any(|s| s.contains_answer));
    if has_flags {
        dataset.clone()
    } else {
        label_dataset(dataset, matcher)
    }
}

fn run_random(
    train: &Dataset,
    dev: &Dataset,
    config: &TrainingConfig,
    matcher: &AnswerMatcher,
) -> Result<CellOutcome> {
    let _ = train;
    let labeled = ensure_labels(dev, matcher);
    let baseline = random_sentence_accuracy(&labeled, config.seed, 10_000)?;
    let mut sampled = MetricsRow::new("random", &dev.name, split_name(dev), "accuracy", baseline.sampled);
    sampled.evaluated = dev.len();
    let mut expected = MetricsRow::new(
        "random",
        &dev.name,
        split_name(dev),
        "random_expectation",
        baseline.expected,
    );
    expected.evaluated = dev.len();
    Ok(CellOutcome {
        rows: vec![sampled, expected],
        predictions: Vec::new(),
        checkpoint: None,
        train_log: None,
    })
}

fn split_name(ds: &Dataset) -> &'static str {
    match ds.split {
        crate::corpus::Split::Train => "train",
        crate::corpus::Split::Dev => "dev",
        crate::corpus::Split::Test => "test",
    }
}

fn run_sentence_probe(
    kind: ModelKind,
    train: &Dataset,
    dev: &Dataset,
    config: &TrainingConfig,
    matcher: &AnswerMatcher,
) -> Result<CellOutcome> {
    let train_labeled = ensure_labels(train, matcher);
    let dev_labeled = ensure_labels(dev, matcher);
    let vocab = Vocab::build(&[&train_labeled], config.min_freq, config.embedding_dim, None, config.seed)?;
    let train_enc = encode_dataset(&train_labeled, &vocab, matcher);
    let dev_enc = encode_dataset(&dev_labeled, &vocab, matcher);

    let mut skipped = SkipCounts::new();
    let usable: Vec<EncodedExample> = train_enc
        .into_iter()
        .filter(|e| {
            let ok = !e.gold_sentences.is_empty();
            if !ok {
                *skipped.entry("unanswerable_in_text".into()).or_insert(0) += 1;
            }
            ok
        })
        .collect();

    enum Probe {
        Simple(FactoredModel),
        Bidaf(FactoredBidafModel),
    }
    let probe = match kind {
        ModelKind::Factored => Probe::Simple(FactoredModel::new(config)),
        _ => Probe::Bidaf(FactoredBidafModel::new(config)),
    };
    let mut store = match &probe {
        Probe::Simple(m) => m.init_params(&vocab, config),
        Probe::Bidaf(m) => m.init_params(&vocab, config),
    };

    let distribution = |store: &ParamStore, ex: &EncodedExample| match &probe {
        Probe::Simple(m) => m.distribution(store, ex),
        Probe::Bidaf(m) => m.distribution(store, ex),
    };
    let log = train_loop(
        &mut store,
        config,
        &usable,
        |g, s, ex, _ctx| match &probe {
            Probe::Simple(m) => m.example_loss(g, s, ex),
            Probe::Bidaf(m) => m.example_loss(g, s, ex),
        },
        |s| Ok(evaluate_answer_location(&dev_enc, |ex| distribution(s, ex))?.accuracy),
    )?;

    let eval = evaluate_answer_location(&dev_enc, |ex| distribution(&store, ex))?;
    let mut row = MetricsRow::new(kind.as_str(), &dev.name, split_name(dev), "accuracy", eval.accuracy);
    row.evaluated = eval.evaluated;
    row.skipped = skipped;
    row.annotations
        .insert("dev_unanswerable_in_text".into(), eval.unanswerable);
    let predictions = eval
        .predictions
        .iter()
        .map(|p| {
            json!({
                "example_id": p.example_id,
                "predicted_sentence": [p.predicted_sentence.0, p.predicted_sentence.1],
                "correct": p.correct,
            })
        })
        .collect();
    Ok(CellOutcome {
        rows: vec![row],
        predictions,
        checkpoint: Some((kind.as_str().to_string(), store, vocab)),
        train_log: Some(log),
    })
}

fn run_mc_model(
    kind: ModelKind,
    train: &Dataset,
    dev: &Dataset,
    config: &TrainingConfig,
    matcher: &AnswerMatcher,
) -> Result<CellOutcome> {
    let vocab = Vocab::build(&[train], config.min_freq, config.embedding_dim, None, config.seed)?;
    let train_enc = encode_dataset(train, &vocab, matcher);
    let dev_enc = encode_dataset(dev, &vocab, matcher);

    let mut skipped = SkipCounts::new();
    let usable: Vec<EncodedExample> = train_enc
        .into_iter()
        .filter(|e| {
            let ok = e.gold_candidate.is_some();
            if !ok {
                *skipped.entry("no_gold_candidate".into()).or_insert(0) += 1;
            }
            ok
        })
        .collect();

    enum Mc {
        NoContext(NoContextModel),
        Memnet(MemNetModel),
        Bidaf(BidafModel),
    }
    let model = match kind {
        ModelKind::NoContext => Mc::NoContext(NoContextModel::new(config)),
        ModelKind::MemnetMc => Mc::Memnet(MemNetModel::new(config)),
        _ => Mc::Bidaf(BidafModel::new(config)),
    };
    let mut store = match &model {
        Mc::NoContext(m) => m.init_params(&vocab, config),
        Mc::Memnet(m) => m.init_params(&vocab, config),
        Mc::Bidaf(m) => m.init_params(&vocab, config),
    };

    let scores = |store: &ParamStore, ex: &EncodedExample| -> Result<Vec<f64>> {
        match &model {
            Mc::NoContext(m) => m.scores(store, &ex.question, ex.candidates.as_deref().unwrap_or(&[])),
            Mc::Memnet(m) => m.mc_scores(store, ex),
            Mc::Bidaf(m) => m.mc_scores(store, ex),
        }
    };
    let eval_accuracy = |store: &ParamStore, data: &[EncodedExample]| -> Result<f64> {
        let mut scored = Vec::with_capacity(data.len());
        for (i, ex) in data.iter().enumerate() {
            scored.push((i, scores(store, ex)?));
        }
        Ok(evaluate_mc_accuracy(&scored, data))
    };

    let log = train_loop(
        &mut store,
        config,
        &usable,
        |g, s, ex, _ctx| match &model {
            Mc::NoContext(m) => m.example_loss(g, s, ex),
            Mc::Memnet(m) => m.mc_loss(g, s, ex),
            Mc::Bidaf(m) => m.mc_loss(g, s, ex),
        },
        |s| eval_accuracy(s, &dev_enc),
    )?;

    let mut predictions = Vec::with_capacity(dev_enc.len());
    let mut correct_count = 0usize;
    for ex in &dev_enc {
        let sc = scores(&store, ex)?;
        let pick = crate::neural::argmax(&sc);
        let correct = Some(pick) == ex.gold_candidate;
        if correct {
            correct_count += 1;
        }
        let text = ex
            .candidates
            .as_ref()
            .and_then(|c| c.get(pick))
            .map(|c| c.text.clone())
            .unwrap_or_default();
        predictions.push(json!({
            "example_id": ex.id,
            "predicted_candidate": pick,
            "candidate_text": text,
            "correct": correct,
        }));
    }
    let accuracy = correct_count as f64 / dev_enc.len().max(1) as f64;

    let mut row = MetricsRow::new(kind.as_str(), &dev.name, split_name(dev), "accuracy", accuracy);
    row.evaluated = dev_enc.len();
    row.skipped = skipped;
    Ok(CellOutcome {
        rows: vec![row],
        predictions,
        checkpoint: Some((kind.as_str().to_string(), store, vocab)),
        train_log: Some(log),
    })
}

enum SpanModel {
    Memnet(MemNetModel),
    Bidaf(BidafModel),
}

impl SpanModel {
    fn init(&self, vocab: &Vocab, config: &TrainingConfig) -> ParamStore {
        match self {
            SpanModel::Memnet(m) => m.init_params(vocab, config),
            SpanModel::Bidaf(m) => m.init_params(vocab, config),
        }
    }

    fn predict(&self, store: &ParamStore, ex: &EncodedExample) -> Result<SpanPrediction> {
        match self {
            SpanModel::Memnet(m) => m.span_distributions(store, ex),
            SpanModel::Bidaf(m) => m.span_distributions(store, ex),
        }
    }

    fn loss(
        &self,
        g: &mut crate::neural::Graph,
        store: &ParamStore,
        ex: &EncodedExample,
        gold: (usize, usize),
    ) -> Result<crate::neural::Var> {
        match self {
            SpanModel::Memnet(m) => m.span_loss(g, store, ex, gold),
            SpanModel::Bidaf(m) => m.span_loss(g, store, ex, gold),
        }
    }
}

/// Picks the training span: the fixed first-occurrence gold, or a
/// uniformly chosen occurrence when `random_span_selection` is on.
fn training_span(ex: &EncodedExample, ctx: &EpochContext, random_selection: bool) -> Option<(usize, usize)> {
    if random_selection && !ex.occurrences.is_empty() {
        let tag = format!("span-choice-{}-{}", ex.id, ctx.epoch);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(ctx.seed, &tag));
        let pick = rng.random_range(0..ex.occurrences.len());
        return Some(ex.occurrences[pick]);
    }
    ex.gold_span
}

fn prepare_span_training(
    train: &Dataset,
    matcher: &AnswerMatcher,
    skipped: &mut SkipCounts,
) -> Dataset {
    // Resolve missing gold spans (first occurrence in concatenation order).
    let mut examples = Vec::new();
    for ex in &train.examples {
        if ex.gold_span.is_some() {
            examples.push(ex.clone());
            continue;
        }
        match resolve_gold_span(ex, matcher) {
            Ok(resolved) => examples.push(resolved),
            Err(reason) => {
                *skipped.entry(reason.as_str().to_string()).or_insert(0) += 1;
            }
        }
    }
    Dataset {
        name: train.name.clone(),
        split: train.split,
        examples,
    }
}

fn run_span_model(
    kind: ModelKind,
    train: &Dataset,
    dev: &Dataset,
    config: &TrainingConfig,
    matcher: &AnswerMatcher,
) -> Result<CellOutcome> {
    let mut skipped = SkipCounts::new();
    let train_resolved = prepare_span_training(train, matcher, &mut skipped);
    let vocab = Vocab::build(&[&train_resolved], config.min_freq, config.embedding_dim, None, config.seed)?;
    let train_enc: Vec<EncodedExample> = encode_dataset(&train_resolved, &vocab, matcher)
        .into_iter()
        .filter(|e| {
            let ok = e.gold_span.is_some() && !e.context.is_empty();
            if !ok {
                *skipped.entry("no_gold_span".into()).or_insert(0) += 1;
            }
            ok
        })
        .collect();
    let dev_enc = encode_dataset(dev, &vocab, matcher);

    let model = match kind {
        ModelKind::MemnetSpan => SpanModel::Memnet(MemNetModel::new(config)),
        _ => SpanModel::Bidaf(BidafModel::new(config)),
    };
    let mut store = model.init(&vocab, config);
    let random_selection = config.random_span_selection;
    let max_span_len = config.max_span_len;

    let eval_f1 = |store: &ParamStore, data: &[EncodedExample]| -> Result<f64> {
        let mut preds = Vec::with_capacity(data.len());
        for (i, ex) in data.iter().enumerate() {
            let pred = model.predict(store, ex)?;
            let (s, e) = decode_span(&pred, max_span_len);
            preds.push((i, ex.span_text(s, e)));
        }
        Ok(evaluate_span_text(&preds, data).1)
    };

    let log = train_loop(
        &mut store,
        config,
        &train_enc,
        |g, s, ex, ctx| match training_span(ex, ctx, random_selection) {
            Some(gold) => model.loss(g, s, ex, gold).map(Some),
            None => Ok(None),
        },
        |s| eval_f1(s, &dev_enc),
    )?;

    let mut predictions = Vec::with_capacity(dev_enc.len());
    let mut em_f1_inputs = Vec::with_capacity(dev_enc.len());
    let mut non_extractive = 0usize;
    for (i, ex) in dev_enc.iter().enumerate() {
        let pred = model.predict(&store, ex)?;
        let (s, e) = decode_span(&pred, max_span_len);
        let text = ex.span_text(s, e);
        predictions.push(json!({
            "example_id": ex.id,
            "span": [s, e],
            "text": text,
        }));
        if ex.gold_span.is_none() && ex.occurrences.is_empty() {
            non_extractive += 1;
        }
        em_f1_inputs.push((i, text));
    }
    let (em, f1) = evaluate_span_text(&em_f1_inputs, &dev_enc);

    let mut em_row = MetricsRow::new(kind.as_str(), &dev.name, split_name(dev), "em", em);
    em_row.evaluated = dev_enc.len();
    em_row.skipped = skipped.clone();
    em_row
        .annotations
        .insert("dev_answer_not_in_context".into(), non_extractive);
    let mut f1_row = MetricsRow::new(kind.as_str(), &dev.name, split_name(dev), "f1", f1);
    f1_row.evaluated = dev_enc.len();
    f1_row.skipped = skipped;
    Ok(CellOutcome {
        rows: vec![em_row, f1_row],
        predictions,
        checkpoint: Some((kind.as_str().to_string(), store, vocab)),
        train_log: Some(log),
    })
}

/// Trains the attention-flow reader with span supervision derived from a
/// multiple-choice dataset, then evaluates it in the multiple-choice
/// setting by maxing span scores over candidate occurrences.
fn run_span2mc(
    train: &Dataset,
    dev: &Dataset,
    config: &TrainingConfig,
    matcher: &AnswerMatcher,
) -> Result<CellOutcome> {
    let span_train = to_span_dataset(train, matcher);
    let mut skipped = span_train.skipped.clone();

    let vocab = Vocab::build(
        &[&span_train.dataset],
        config.min_freq,
        config.embedding_dim,
        None,
        config.seed,
    )?;
    let train_enc: Vec<EncodedExample> = encode_dataset(&span_train.dataset, &vocab, matcher)
        .into_iter()
        .filter(|e| {
            let ok = e.gold_span.is_some();
            if !ok {
                *skipped.entry("no_gold_span".into()).or_insert(0) += 1;
            }
            ok
        })
        .collect();

    // Dev keeps its candidates; contexts are merged the same way as the
    // training inputs (separator tokens between documents).
    let dev_merged = Dataset {
        name: dev.name.clone(),
        split: dev.split,
        examples: dev.examples.iter().map(merge_documents).collect(),
    };
    let dev_enc = encode_dataset(&dev_merged, &vocab, matcher);

    let model = BidafModel::new(config);
    let mut store = model.init_params(&vocab, config);
    let random_selection = config.random_span_selection;
    let max_span_len = config.max_span_len;

    let decide = |store: &ParamStore, ex: &EncodedExample| -> Result<(usize, bool)> {
        let pred = model.span_distributions(store, ex)?;
        let cands: Vec<String> = ex
            .candidates
            .as_ref()
            .map(|c| c.iter().map(|x| x.text.clone()).collect())
            .unwrap_or_default();
        let decision = span2mc_decode(&pred, &ex.context_tokens, &cands, max_span_len, matcher);
        Ok((decision.candidate, decision.fallback))
    };
    let eval_accuracy = |store: &ParamStore, data: &[EncodedExample]| -> Result<f64> {
        let mut correct = 0usize;
        for ex in data {
            let (pick, _) = decide(store, ex)?;
            if Some(pick) == ex.gold_candidate {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.len().max(1) as f64)
    };

    let log = train_loop(
        &mut store,
        config,
        &train_enc,
        |g, s, ex, ctx| match training_span(ex, ctx, random_selection) {
            Some(gold) => model.span_loss(g, s, ex, gold).map(Some),
            None => Ok(None),
        },
        |s| eval_accuracy(s, &dev_enc),
    )?;

    let mut predictions = Vec::with_capacity(dev_enc.len());
    let mut correct_count = 0usize;
    let mut fallbacks = 0usize;
    for ex in &dev_enc {
        let (pick, fallback) = decide(&store, ex)?;
        if fallback {
            fallbacks += 1;
        }
        let correct = Some(pick) == ex.gold_candidate;
        if correct {
            correct_count += 1;
        }
        let text = ex
            .candidates
            .as_ref()
            .and_then(|c| c.get(pick))
            .map(|c| c.text.clone())
            .unwrap_or_default();
        predictions.push(json!({
            "example_id": ex.id,
            "predicted_candidate": pick,
            "candidate_text": text,
            "correct": correct,
            "fallback": fallback,
        }));
    }
    let accuracy = correct_count as f64 / dev_enc.len().max(1) as f64;

    let mut row = MetricsRow::new(
        ModelKind::Span2mcBidafpp.as_str(),
        &dev.name,
        split_name(dev),
        "accuracy",
        accuracy,
    );
    row.evaluated = dev_enc.len();
    row.skipped = skipped;
    row.annotations.insert("decode_fallbacks".into(), fallbacks);
    Ok(CellOutcome {
        rows: vec![row],
        predictions,
        checkpoint: Some(("span2mc_bidafpp".to_string(), store, vocab)),
        train_log: Some(log),
    })
}

/// Loads datasets, applies the configured transform, runs the model, and
/// writes metrics, predictions, the checkpoint, and the config echo into
/// the output directory. Deterministic given the config (single-threaded).
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    config.training.validate()?;
    let matcher = AnswerMatcher::default();
    let train = read_canonical(&config.train_path)?;
    let dev = match &config.dev_path {
        Some(p) => read_canonical(p)?,
        None => train.clone(),
    };

    std::fs::create_dir_all(&config.output_dir)
        .map_err(|e| Error::io(&config.output_dir, e))?;

    let mut pairs: Vec<(String, Dataset, Dataset, SkipCounts)> = Vec::new();
    match &config.transform {
        TransformSpec::None => pairs.push((config.name.clone(), train, dev, SkipCounts::new())),
        TransformSpec::LabelAnswers => {
            let t = label_dataset(&train, &matcher);
            let d = label_dataset(&dev, &matcher);
            pairs.push((config.name.clone(), t, d, SkipCounts::new()));
        }
        TransformSpec::ToMc { distractors, seed } => {
            let t = to_multiple_choice_dataset(&train, *distractors, *seed, &matcher);
            let d = to_multiple_choice_dataset(&dev, *distractors, *seed, &matcher);
            let mut skips = t.skipped.clone();
            for (k, v) in d.skipped {
                *skips.entry(k).or_insert(0) += v;
            }
            pairs.push((config.name.clone(), t.dataset, d.dataset, skips));
        }
        TransformSpec::ToSpan => {
            let t = to_span_dataset(&train, &matcher);
            let d = to_span_dataset(&dev, &matcher);
            let mut skips = t.skipped.clone();
            for (k, v) in d.skipped {
                *skips.entry(k).or_insert(0) += v;
            }
            pairs.push((config.name.clone(), t.dataset, d.dataset, skips));
        }
        TransformSpec::Sweep { counts, seed } => {
            let t_variants = sweep_option_counts(&train, counts, *seed, &matcher)?;
            let d_variants = sweep_option_counts(&dev, counts, *seed, &matcher)?;
            for ((count, t), (_, d)) in t_variants.into_iter().zip(d_variants) {
                let mut skips = t.skipped.clone();
                for (k, v) in d.skipped {
                    *skips.entry(k).or_insert(0) += v;
                }
                pairs.push((format!("{}-mc{count}", config.name), t.dataset, d.dataset, skips));
            }
        }
    }

    let mut all_rows = Vec::new();
    for (cell_name, train_ds, dev_ds, transform_skips) in pairs {
        let outcome = run_model(config.model, &train_ds, &dev_ds, &config.training, &matcher)?;
        write_cell_artifacts(&config.output_dir, &cell_name, config, &outcome)?;
        for mut row in outcome.rows {
            for (k, v) in &transform_skips {
                *row.skipped.entry(format!("transform:{k}")).or_insert(0) += v;
            }
            all_rows.push(row);
        }
    }

    let rows_path = config.output_dir.join("metrics.json");
    let payload = serde_json::to_string_pretty(&all_rows)
        .map_err(|e| Error::Data(format!("metrics serialization: {e}")))?;
    std::fs::write(&rows_path, payload).map_err(|e| Error::io(&rows_path, e))?;
    Ok(all_rows)
}

fn write_cell_artifacts(
    dir: &Path,
    cell_name: &str,
    config: &ExperimentConfig,
    outcome: &CellOutcome,
) -> Result<()> {
    let pred_path = dir.join(format!("{cell_name}.predictions.jsonl"));
    let mut lines = String::new();
    for p in &outcome.predictions {
        lines.push_str(&p.to_string());
        lines.push('\n');
    }
    std::fs::write(&pred_path, lines).map_err(|e| Error::io(&pred_path, e))?;

    if let Some((model, store, vocab)) = &outcome.checkpoint {
        let ckpt_path = dir.join(format!("{cell_name}.ckpt"));
        save_checkpoint(&ckpt_path, model, &config.training, vocab, store)?;
    }

    let config_path = dir.join("experiment.json");
    let mut echo = serde_json::to_value(config).map_err(|e| Error::Data(e.to_string()))?;
    if let Some(obj) = echo.as_object_mut() {
        obj.insert("config_hash".into(), json!(config_hash(config)));
    }
    std::fs::write(&config_path, serde_json::to_string_pretty(&echo).unwrap())
        .map_err(|e| Error::io(&config_path, e))?;
    Ok(())
}

/// Stable FNV-1a hash of the serialized config, hex-encoded.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let text = serde_json::to_string(config).unwrap_or_default();
    format!("{:016x}", derive_seed(0x5eed, &text))
}

/// Evaluates a loaded checkpoint on a dataset. `metric` is `accuracy` for
/// sentence probes and candidate scorers, `span` for EM/F1 of span models.
pub fn evaluate_checkpoint(
    ckpt: &crate::neural::Checkpoint,
    data: &Dataset,
    metric: &str,
    matcher: &AnswerMatcher,
) -> Result<Vec<MetricsRow>> {
    let kind: ModelKind = ckpt.model.parse()?;
    let config = &ckpt.config;
    let store = &ckpt.params;
    let vocab = &ckpt.vocab;

    match (kind, metric) {
        (ModelKind::Factored | ModelKind::FactoredBidaf, "accuracy") => {
            let labeled = ensure_labels(data, matcher);
            let encoded = encode_dataset(&labeled, vocab, matcher);
            let eval = match kind {
                ModelKind::Factored => {
                    let model = FactoredModel::new(config);
                    evaluate_answer_location(&encoded, |ex| model.distribution(store, ex))?
                }
                _ => {
                    let model = FactoredBidafModel::new(config);
                    evaluate_answer_location(&encoded, |ex| model.distribution(store, ex))?
                }
            };
            let mut row = MetricsRow::new(kind.as_str(), &data.name, split_name(data), "accuracy", eval.accuracy);
            row.evaluated = eval.evaluated;
            row.annotations
                .insert("unanswerable_in_text".into(), eval.unanswerable);
            Ok(vec![row])
        }
        (ModelKind::NoContext | ModelKind::MemnetMc | ModelKind::BidafppMc, "accuracy") => {
            let encoded = encode_dataset(data, vocab, matcher);
            let mut scored = Vec::with_capacity(encoded.len());
            for (i, ex) in encoded.iter().enumerate() {
                let scores = match kind {
                    ModelKind::NoContext => NoContextModel::new(config).scores(
                        store,
                        &ex.question,
                        ex.candidates.as_deref().unwrap_or(&[]),
                    )?,
                    ModelKind::MemnetMc => MemNetModel::new(config).mc_scores(store, ex)?,
                    _ => BidafModel::new(config).mc_scores(store, ex)?,
                };
                scored.push((i, scores));
            }
            let accuracy = evaluate_mc_accuracy(&scored, &encoded);
            let mut row = MetricsRow::new(kind.as_str(), &data.name, split_name(data), "accuracy", accuracy);
            row.evaluated = encoded.len();
            Ok(vec![row])
        }
        (ModelKind::MemnetSpan | ModelKind::BidafppSpan, "span") => {
            let encoded = encode_dataset(data, vocab, matcher);
            let model = match kind {
                ModelKind::MemnetSpan => SpanModel::Memnet(MemNetModel::new(config)),
                _ => SpanModel::Bidaf(BidafModel::new(config)),
            };
            let mut preds = Vec::with_capacity(encoded.len());
            for (i, ex) in encoded.iter().enumerate() {
                let pred = model.predict(store, ex)?;
                let (s, e) = decode_span(&pred, config.max_span_len);
                preds.push((i, ex.span_text(s, e)));
            }
            let (em, f1) = evaluate_span_text(&preds, &encoded);
            let mut em_row = MetricsRow::new(kind.as_str(), &data.name, split_name(data), "em", em);
            em_row.evaluated = encoded.len();
            let mut f1_row = MetricsRow::new(kind.as_str(), &data.name, split_name(data), "f1", f1);
            f1_row.evaluated = encoded.len();
            Ok(vec![em_row, f1_row])
        }
        (ModelKind::Span2mcBidafpp, "accuracy") => {
            let merged = Dataset {
                name: data.name.clone(),
                split: data.split,
                examples: data.examples.iter().map(merge_documents).collect(),
            };
            let encoded = encode_dataset(&merged, vocab, matcher);
            let model = BidafModel::new(config);
            let mut correct = 0usize;
            for ex in &encoded {
                let pred = model.span_distributions(store, ex)?;
                let cands: Vec<String> = ex
                    .candidates
                    .as_ref()
                    .map(|c| c.iter().map(|x| x.text.clone()).collect())
                    .unwrap_or_default();
                let decision =
                    span2mc_decode(&pred, &ex.context_tokens, &cands, config.max_span_len, matcher);
                if Some(decision.candidate) == ex.gold_candidate {
                    correct += 1;
                }
            }
            let accuracy = correct as f64 / encoded.len().max(1) as f64;
            let mut row = MetricsRow::new(kind.as_str(), &data.name, split_name(data), "accuracy", accuracy);
            row.evaluated = encoded.len();
            Ok(vec![row])
        }
        (k, m) => Err(Error::Config(format!(
            "metric '{m}' is not applicable to model '{}'",
            k.as_str()
        ))),
    }
}

/// Accuracy evaluation of an already-trained MC scorer, exposed for the
/// probe suite's sweep section.
pub fn mc_accuracy_of(
    scores: impl Fn(&EncodedExample) -> Result<Vec<f64>>,
    data: &[EncodedExample],
) -> Result<f64> {
    let mut scored = Vec::with_capacity(data.len());
    for (i, ex) in data.iter().enumerate() {
        scored.push((i, scores(ex)?));
    }
    Ok(evaluate_mc_accuracy(&scored, data))
}

/// Helper used by tests and BTreeMap-based accounting.
pub type Skips = BTreeMap<String, usize>;
