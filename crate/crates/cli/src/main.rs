//! Command-line interface: ingest raw datasets, recast supervision, train
//! and evaluate models, run the probe suite, and render reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hopaudit::corpus::{
    load_hotpotqa, load_squad, load_wikihop, read_canonical, write_canonical, LoadOptions, Split,
};
use hopaudit::error::Error;
use hopaudit::harness::{
    emit_report, evaluate_checkpoint, read_report, run_experiment, run_probe_suite, DatasetPair,
    ExperimentConfig, ModelKind, ProbeReport, SuiteConfig, TransformSpec,
};
use hopaudit::neural::{load_checkpoint, TrainingConfig};
use hopaudit::transforms::{
    label_dataset, sweep_option_counts, to_multiple_choice_dataset, to_span_dataset, AnswerMatcher,
};

#[derive(Parser)]
#[command(name = "hopaudit", version, about = "Dataset auditing for multi-hop QA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a raw dataset file into canonical JSONL.
    Ingest(IngestArgs),
    /// Recast supervision or label answer sentences.
    Transform(TransformArgs),
    /// Train a model and write metrics, predictions, and a checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a canonical dataset.
    Eval(EvalArgs),
    /// Run the probe battery and write a report.
    Probe(ProbeArgs),
    /// Re-render a probe report from its machine-readable form.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Wikihop,
    Hotpotqa,
    Squad,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long, value_enum)]
    format: Format,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
    /// Dataset name; defaults to the input file stem.
    #[arg(long)]
    name: Option<String>,
    #[arg(long, default_value = "train")]
    split: String,
    #[arg(long, default_value_t = 2400)]
    max_context_tokens: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformOp {
    ToMc,
    ToSpan,
    LabelAnswers,
    Sweep,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long, value_enum)]
    op: TransformOp,
    #[arg(long = "in")]
    input: PathBuf,
    /// Output file; for `sweep`, a directory receiving one file per count.
    #[arg(long = "out")]
    output: PathBuf,
    #[arg(long, default_value_t = 9)]
    distractors: usize,
    /// Option counts for `sweep`, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "10,20,50")]
    counts: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    dev: Option<PathBuf>,
    /// JSON training configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "out")]
    output: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// `accuracy` or `span`.
    #[arg(long)]
    metric: String,
}

#[derive(Args)]
struct ProbeArgs {
    /// Canonical dataset paths, comma-separated. Each entry is either one
    /// file (split 80/20 into train/dev) or `train.jsonl:dev.jsonl`.
    #[arg(long, value_delimiter = ',')]
    datasets: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "out")]
    output: PathBuf,
    /// Full-data mode: removes desk-scale caps and uses full-size models.
    #[arg(long)]
    extended: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory containing report.json.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                // Malformed invocations are configuration errors.
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if configuration_error(&e) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn configuration_error(e: &anyhow::Error) -> bool {
    e.downcast_ref::<Error>().is_some_and(Error::is_config)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest(args) => ingest(args),
        Command::Transform(args) => transform(args),
        Command::Train(args) => train(args),
        Command::Eval(args) => eval(args),
        Command::Probe(args) => probe(args),
        Command::Report(args) => report(args),
    }
}

fn ingest(args: IngestArgs) -> anyhow::Result<()> {
    let split: Split = args.split.parse::<Split>()?;
    let opts = LoadOptions {
        name: args.name,
        split,
        max_context_tokens: args.max_context_tokens,
    };
    let loaded = match args.format {
        Format::Wikihop => load_wikihop(&args.input, &opts)?,
        Format::Hotpotqa => load_hotpotqa(&args.input, &opts)?,
        Format::Squad => load_squad(&args.input, &opts)?,
    };
    write_canonical(&loaded.dataset, &args.output)?;
    eprintln!(
        "loaded {} examples ({} skipped) -> {}",
        loaded.stats.loaded,
        loaded.stats.skipped.values().sum::<usize>(),
        args.output.display()
    );
    for (reason, count) in &loaded.stats.skipped {
        eprintln!("  skipped {count}: {reason}");
    }
    for warning in loaded.stats.warnings.iter().take(20) {
        eprintln!("  warning: {warning}");
    }
    Ok(())
}

fn transform(args: TransformArgs) -> anyhow::Result<()> {
    let dataset = read_canonical(&args.input)?;
    let matcher = AnswerMatcher::default();
    match args.op {
        TransformOp::LabelAnswers => {
            let labeled = label_dataset(&dataset, &matcher);
            write_canonical(&labeled, &args.output)?;
            let unanswerable = labeled.examples.iter().filter(|e| e.unanswerable).count();
            eprintln!(
                "labeled {} examples ({unanswerable} unanswerable-in-text)",
                labeled.len()
            );
        }
        TransformOp::ToMc => {
            let out = to_multiple_choice_dataset(&dataset, args.distractors, args.seed, &matcher);
            write_canonical(&out.dataset, &args.output)?;
            report_skips(out.dataset.len(), &out.skipped);
        }
        TransformOp::ToSpan => {
            let out = to_span_dataset(&dataset, &matcher);
            write_canonical(&out.dataset, &args.output)?;
            report_skips(out.dataset.len(), &out.skipped);
        }
        TransformOp::Sweep => {
            std::fs::create_dir_all(&args.output).map_err(|e| Error::io(&args.output, e))?;
            let variants = sweep_option_counts(&dataset, &args.counts, args.seed, &matcher)?;
            for (count, out) in variants {
                let path = args.output.join(format!("{}-mc{count}.jsonl", dataset.name));
                write_canonical(&out.dataset, &path)?;
                eprintln!("wrote {}", path.display());
                report_skips(out.dataset.len(), &out.skipped);
            }
        }
    }
    Ok(())
}

fn report_skips(kept: usize, skipped: &std::collections::BTreeMap<String, usize>) {
    eprintln!(
        "kept {kept} examples, skipped {}",
        skipped.values().sum::<usize>()
    );
    for (reason, count) in skipped {
        eprintln!("  skipped {count}: {reason}");
    }
}

fn train(args: TrainArgs) -> anyhow::Result<()> {
    let model: ModelKind = args.model.parse()?;
    let training: TrainingConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("bad training config: {e}")))?
        }
        None => TrainingConfig::default(),
    };
    let config = ExperimentConfig {
        name: args
            .data
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "experiment".into()),
        train_path: args.data,
        dev_path: args.dev,
        transform: TransformSpec::None,
        model,
        training,
        output_dir: args.output,
    };
    let rows = run_experiment(&config)?;
    println!("{}", serde_json::to_string_pretty(&rows)?);
    Ok(())
}

fn eval(args: EvalArgs) -> anyhow::Result<()> {
    let ckpt = load_checkpoint(&args.checkpoint)?;
    let requested: ModelKind = args.model.parse()?;
    let stored: ModelKind = ckpt.model.parse()?;
    if requested != stored {
        return Err(Error::Config(format!(
            "checkpoint holds model '{}', not '{}'",
            ckpt.model, args.model
        ))
        .into());
    }
    let data = read_canonical(&args.data)?;
    let rows = evaluate_checkpoint(&ckpt, &data, &args.metric, &AnswerMatcher::default())?;
    println!("{}", serde_json::to_string_pretty(&rows)?);
    Ok(())
}

fn parse_dataset_entry(entry: &str) -> anyhow::Result<DatasetPair> {
    if let Some((train_path, dev_path)) = entry.split_once(':') {
        let train = read_canonical(Path::new(train_path))?;
        let dev = read_canonical(Path::new(dev_path))?;
        return Ok(DatasetPair {
            name: train.name.clone(),
            train,
            dev,
        });
    }
    // Single file: deterministic 80/20 split.
    let full = read_canonical(Path::new(entry))?;
    if full.is_empty() {
        return Err(Error::Data(format!("{entry}: dataset is empty")).into());
    }
    let cut = ((full.len() * 4) / 5).max(1);
    let (train_examples, dev_examples) = full.examples.split_at(cut);
    Ok(DatasetPair {
        name: full.name.clone(),
        train: hopaudit::corpus::Dataset {
            name: full.name.clone(),
            split: Split::Train,
            examples: train_examples.to_vec(),
        },
        dev: hopaudit::corpus::Dataset {
            name: full.name.clone(),
            split: Split::Dev,
            examples: dev_examples.to_vec(),
        },
    })
}

fn probe(args: ProbeArgs) -> anyhow::Result<()> {
    let mut pairs = Vec::new();
    for entry in &args.datasets {
        pairs.push(parse_dataset_entry(entry)?);
    }
    let mut config = if args.extended {
        eprintln!(
            "warning: extended mode trains full-size models on the full data; \
             expect hours of runtime on large datasets"
        );
        SuiteConfig::extended()
    } else {
        SuiteConfig::default()
    };
    config.seed = args.seed;
    let mut report: ProbeReport = run_probe_suite(&pairs, &config)?;
    report.created_at = Some(now_utc());
    emit_report(&report, &args.output)?;
    eprintln!("report written to {}", args.output.display());
    for failure in &report.failures {
        eprintln!("  cell failed: {failure}");
    }
    Ok(())
}

fn report(args: ReportArgs) -> anyhow::Result<()> {
    let report = read_report(&args.input.join("report.json"))?;
    emit_report(&report, &args.output)?;
    eprintln!("report rendered to {}", args.output.display());
    Ok(())
}

/// Seconds since the epoch; avoids a clock dependency for one timestamp.
fn now_utc() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}
