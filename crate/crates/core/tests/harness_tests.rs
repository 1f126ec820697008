//! Harness behavior: training determinism, experiment orchestration,
//! checkpoints, and the probe suite at miniature scale.

use hopaudit::corpus::{read_canonical, write_canonical, Vocab};
use hopaudit::harness::{
    candidate_type_corpus, evaluate_checkpoint, lexical_overlap_corpus, run_experiment, run_model,
    run_probe_suite, DatasetPair, ExperimentConfig, ModelKind, SectionKind, SuiteConfig, SynthSpec,
    TransformSpec,
};
use hopaudit::neural::{
    encode_dataset, load_checkpoint, save_checkpoint, Graph, TrainingConfig,
};
use hopaudit::probes::FactoredModel;
use hopaudit::transforms::AnswerMatcher;

fn tiny_training(seed: u64) -> TrainingConfig {
    TrainingConfig {
        seed,
        embedding_dim: 12,
        hidden_dim: 12,
        max_epochs: 3,
        patience: 2,
        ..TrainingConfig::default()
    }
}

#[test]
fn identical_seeds_give_bitwise_identical_parameters() {
    let pair = lexical_overlap_corpus(SynthSpec::new(40, 16, 3));
    let matcher = AnswerMatcher::default();
    let config = tiny_training(5);
    let run = || {
        let out = run_model(ModelKind::Factored, &pair.train, &pair.dev, &config, &matcher).unwrap();
        out.checkpoint.unwrap().1
    };
    let a = run();
    let b = run();
    assert!(a.values_bitwise_eq(&b), "same seed must reproduce bitwise");

    let mut other = config.clone();
    other.seed = 6;
    let c = run_model(ModelKind::Factored, &pair.train, &pair.dev, &other, &matcher)
        .unwrap()
        .checkpoint
        .unwrap()
        .1;
    assert!(!a.values_bitwise_eq(&c), "different seed should differ");
}

#[test]
fn one_step_reduces_loss_on_a_fixed_batch() {
    let pair = lexical_overlap_corpus(SynthSpec::new(24, 8, 9));
    let matcher = AnswerMatcher::default();
    let config = tiny_training(1);
    let vocab = Vocab::build(&[&pair.train], 1, config.embedding_dim, None, config.seed).unwrap();
    let encoded = encode_dataset(&pair.train, &vocab, &matcher);
    let model = FactoredModel::new(&config);
    let mut store = model.init_params(&vocab, &config);

    let batch: Vec<&hopaudit::neural::EncodedExample> = encoded.iter().take(8).collect();
    let batch_loss = |store: &hopaudit::neural::ParamStore| -> f64 {
        batch
            .iter()
            .map(|ex| {
                let mut g = Graph::new();
                let loss = model.example_loss(&mut g, store, ex).unwrap().unwrap();
                g.scalar_value(loss)
            })
            .sum::<f64>()
            / batch.len() as f64
    };

    let before = batch_loss(&store);
    let mut adam = hopaudit::neural::Adam::new(&config);
    store.zero_grads();
    for ex in &batch {
        let mut g = Graph::new();
        let loss = model.example_loss(&mut g, &store, ex).unwrap().unwrap();
        g.backward(loss);
        g.accumulate_grads(&mut store, 1.0 / batch.len() as f64);
    }
    adam.step(&mut store).unwrap();
    let after = batch_loss(&store);
    assert!(after < before, "loss went {before} -> {after}");
}

#[test]
fn random_model_needs_no_training_and_reports_both_rows() {
    let pair = lexical_overlap_corpus(SynthSpec::new(10, 30, 7));
    let matcher = AnswerMatcher::default();
    let out = run_model(
        ModelKind::Random,
        &pair.train,
        &pair.dev,
        &tiny_training(0),
        &matcher,
    )
    .unwrap();
    assert!(out.checkpoint.is_none());
    let metrics: Vec<&str> = out.rows.iter().map(|r| r.metric.as_str()).collect();
    assert!(metrics.contains(&"accuracy"));
    assert!(metrics.contains(&"random_expectation"));
    // eight sentences per example: closed form is exactly 1/8
    let expectation = out
        .rows
        .iter()
        .find(|r| r.metric == "random_expectation")
        .unwrap();
    assert!((expectation.value - 0.125).abs() < 1e-12);
}

#[test]
fn incompatible_model_and_supervision_fail_before_training() {
    let pair = lexical_overlap_corpus(SynthSpec::new(6, 2, 2)); // span corpus, no candidates
    let matcher = AnswerMatcher::default();
    let err = run_model(
        ModelKind::NoContext,
        &pair.train,
        &pair.dev,
        &tiny_training(0),
        &matcher,
    )
    .unwrap_err();
    assert!(err.is_config(), "got: {err}");
}

#[test]
fn checkpoint_round_trips_parameters_and_vocab() {
    let pair = candidate_type_corpus(SynthSpec::new(30, 10, 4));
    let matcher = AnswerMatcher::default();
    let config = tiny_training(11);
    let out = run_model(ModelKind::NoContext, &pair.train, &pair.dev, &config, &matcher).unwrap();
    let (model_name, store, vocab) = out.checkpoint.unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    save_checkpoint(&path, &model_name, &config, &vocab, &store).unwrap();
    let ckpt = load_checkpoint(&path).unwrap();
    assert_eq!(ckpt.model, "nocontext");
    assert_eq!(ckpt.config, config);
    assert_eq!(ckpt.vocab.size(), vocab.size());
    assert!(ckpt.params.values_bitwise_eq(&store));

    // An evaluation through the checkpoint reproduces the original row.
    let rows = evaluate_checkpoint(&ckpt, &pair.dev, "accuracy", &matcher).unwrap();
    assert_eq!(rows[0].value, out.rows[0].value);
}

#[test]
fn checkpoint_wrong_metric_is_config_error() {
    let pair = candidate_type_corpus(SynthSpec::new(20, 8, 4));
    let matcher = AnswerMatcher::default();
    let config = tiny_training(11);
    let out = run_model(ModelKind::NoContext, &pair.train, &pair.dev, &config, &matcher).unwrap();
    let (model_name, store, vocab) = out.checkpoint.unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    save_checkpoint(&path, &model_name, &config, &vocab, &store).unwrap();
    let ckpt = load_checkpoint(&path).unwrap();
    let err = evaluate_checkpoint(&ckpt, &pair.dev, "span", &matcher).unwrap_err();
    assert!(err.is_config());
}

#[test]
fn run_experiment_writes_metrics_predictions_and_checkpoint() {
    let pair = lexical_overlap_corpus(SynthSpec::new(30, 12, 8));
    let dir = tempfile::tempdir().unwrap();
    let train_path = dir.path().join("train.jsonl");
    let dev_path = dir.path().join("dev.jsonl");
    write_canonical(&pair.train, &train_path).unwrap();
    write_canonical(&pair.dev, &dev_path).unwrap();

    let out_dir = dir.path().join("out");
    let config = ExperimentConfig {
        name: "lex".into(),
        train_path: train_path.clone(),
        dev_path: Some(dev_path),
        transform: TransformSpec::None,
        model: ModelKind::Factored,
        training: tiny_training(3),
        output_dir: out_dir.clone(),
    };
    let rows = run_experiment(&config).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(out_dir.join("metrics.json").exists());
    assert!(out_dir.join("lex.predictions.jsonl").exists());
    assert!(out_dir.join("lex.ckpt").exists());
    assert!(out_dir.join("experiment.json").exists());

    // Determinism: a rerun produces identical metric values.
    let rows2 = run_experiment(&config).unwrap();
    assert_eq!(
        serde_json::to_string(&rows).unwrap(),
        serde_json::to_string(&rows2).unwrap()
    );

    // The canonical files round-trip through the experiment unchanged.
    let back = read_canonical(&train_path).unwrap();
    assert_eq!(back, pair.train);
}

#[test]
fn probe_suite_populates_all_sections_and_is_deterministic() {
    let suite_config = SuiteConfig {
        seed: 5,
        training: TrainingConfig {
            embedding_dim: 10,
            hidden_dim: 10,
            max_epochs: 2,
            patience: 1,
            batch_size: 16,
            ..TrainingConfig::default()
        },
        synth_train: 40,
        synth_dev: 16,
        sweep_counts: vec![4, 6],
        include_full_models: true,
        max_train_examples: Some(40),
        max_dev_examples: Some(16),
        extended: false,
    };
    let report = run_probe_suite(&[], &suite_config).unwrap();
    assert!(report.failures.is_empty(), "failures: {:?}", report.failures);
    for kind in [
        SectionKind::AnswerLocation,
        SectionKind::NoContext,
        SectionKind::MultipleChoice,
        SectionKind::Span,
        SectionKind::Sweep,
    ] {
        let section = report.section(kind).unwrap();
        assert!(!section.rows.is_empty(), "section {kind:?} is empty");
    }
    // sweep carries a random-guess expectation row of 1/k per count
    let sweep = report.section(SectionKind::Sweep).unwrap();
    for count in [4usize, 6] {
        let guess = sweep
            .rows
            .iter()
            .find(|r| r.model == "random_guess" && r.dataset.ends_with(&format!("mc{count}")))
            .unwrap();
        assert!((guess.value - 1.0 / count as f64).abs() < 1e-12);
    }

    let again = run_probe_suite(&[], &suite_config).unwrap();
    assert_eq!(report, again, "same seed must reproduce the report");
}

#[test]
fn probe_suite_accepts_supplied_datasets() {
    let pair = lexical_overlap_corpus(SynthSpec::new(30, 10, 21));
    let supplied = DatasetPair {
        name: "supplied".into(),
        train: pair.train,
        dev: pair.dev,
    };
    let suite_config = SuiteConfig {
        seed: 2,
        training: TrainingConfig {
            embedding_dim: 8,
            hidden_dim: 8,
            max_epochs: 1,
            patience: 1,
            ..TrainingConfig::default()
        },
        synth_train: 20,
        synth_dev: 8,
        sweep_counts: vec![4],
        include_full_models: false,
        max_train_examples: Some(20),
        max_dev_examples: Some(8),
        extended: false,
    };
    let report = run_probe_suite(&[supplied], &suite_config).unwrap();
    let answer_location = report.section(SectionKind::AnswerLocation).unwrap();
    let datasets: Vec<&str> = answer_location
        .rows
        .iter()
        .map(|r| r.dataset.as_str())
        .collect();
    assert!(datasets.contains(&"synth-lexical"), "{datasets:?}");
    // supplied dataset rows appear under their own name
    assert!(
        answer_location.rows.iter().any(|r| r.dataset == "synth-lexical")
            && answer_location.rows.len() > 3,
        "supplied dataset missing: {datasets:?}"
    );
}

#[test]
fn skip_accounting_conserves_dataset_size() {
    // A multiple-choice model on a dataset where some examples lack a gold
    // candidate: evaluated + skipped must equal the dataset size.
    let mut pair = candidate_type_corpus(SynthSpec::new(24, 12, 6));
    for ex in pair.train.examples.iter_mut().take(5) {
        // break the gold candidate by renaming the answer
        ex.answers = vec!["nonexistent candidate".into()];
    }
    let matcher = AnswerMatcher::default();
    let out = run_model(
        ModelKind::NoContext,
        &pair.train,
        &pair.dev,
        &tiny_training(1),
        &matcher,
    )
    .unwrap();
    let row = &out.rows[0];
    assert_eq!(row.evaluated, pair.dev.len());
    assert_eq!(row.skipped["no_gold_candidate"], 5);
}
