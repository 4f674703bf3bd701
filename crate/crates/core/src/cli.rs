//! The `speller` command line.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::artifacts::{load_index, save_index, INDEX_DUMP_FILE, MODEL_FILE};
use crate::datagen::{dataset_to_tsv, generate_dataset, load_misspelling_corpus, read_dataset, read_queries, DatasetRow, ErrorInjector, DEFAULT_ERROR_PROB};
use crate::dictionary::{build_delete_index, load_dictionary, DEFAULT_MAX_EDIT_DISTANCE, DEFAULT_PREFIX_LENGTH};
use crate::eval::{evaluate, read_eval_file, score_rows};
use crate::features::{FeatureSchema, RequestContext, DEFAULT_APPLICATIONS, DEFAULT_LOCALES};
use crate::pipeline::{refresh_behavioral_stats, RefreshConfig, DEFAULT_MIN_NEW_TERM_COUNT};
use crate::ranker::{build_training_set, save_model, train, TrainConfig};
use crate::service::{spawn, Service, ServiceConfig};
use crate::suggester::DEFAULT_MIN_CANDIDATES;

#[derive(Debug, Parser)]
#[command(name = "speller", version, about = "Spell correction for short search queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the frequency dictionary and delete index into an artifact directory.
    BuildIndex(BuildIndexArgs),
    /// Generate a corrupted-query dataset from correctly spelled queries.
    GenData(GenDataArgs),
    /// Train the candidate ranker on a generated dataset.
    Train(TrainArgs),
    /// Correct queries given as arguments, or one per line on stdin.
    Correct(CorrectArgs),
    /// Report accuracy, precision and recall on an evaluation file.
    Eval(EvalArgs),
    /// Run the HTTP correction service.
    Serve(ServeArgs),
    /// Merge query-log counts into an artifact directory's dictionary.
    Refresh(RefreshArgs),
}

#[derive(Debug, Args)]
struct BuildIndexArgs {
    /// `term<TAB>count` language lexicon.
    #[arg(long)]
    lexicon: PathBuf,
    /// Additional `term<TAB>count` vocabularies.
    #[arg(long)]
    custom: Vec<PathBuf>,
    /// `term<TAB>asset_frequency<TAB>download_count` statistics.
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, default_value = "en")]
    locale: String,
    /// Artifact directory to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_PREFIX_LENGTH)]
    prefix_length: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_EDIT_DISTANCE)]
    max_edit_distance: usize,
    /// Also write a sorted dump of the index.
    #[arg(long)]
    dump_index: bool,
}

#[derive(Debug, Args)]
struct GenDataArgs {
    /// Correct queries, one per line (`query<TAB>count` lines are accepted).
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-token error probability.
    #[arg(long, default_value_t = DEFAULT_ERROR_PROB)]
    error_prob: f64,
    /// Selects keyboard layout and vowel tables.
    #[arg(long, default_value = "en")]
    locale: String,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Dataset written by `gen-data`.
    #[arg(long)]
    data: PathBuf,
    /// `misspelled<TAB>correct` pair corpora added to the training rows.
    #[arg(long)]
    pairs: Vec<PathBuf>,
    /// Times each pair is repeated. Pairs are usually scarce next to
    /// generated rows, and they are the only source of two-edit corrections.
    #[arg(long, default_value_t = 1)]
    pairs_weight: usize,
    /// Artifact directory holding the dictionary.
    #[arg(long)]
    artifacts: PathBuf,
    /// Model path; defaults to `model.json` in the artifact directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    #[arg(long, default_value_t = 0.01)]
    learning_rate: f64,
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,
    #[arg(long, default_value_t = 0.2)]
    dropout: f64,
    #[arg(long, default_value_t = DEFAULT_MIN_CANDIDATES)]
    min_candidates: usize,
    /// Locales the model accepts.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LOCALES.map(String::from))]
    locales: Vec<String>,
    /// Applications the model accepts.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_APPLICATIONS.map(String::from))]
    applications: Vec<String>,
    /// Context of the training rows; defaults to the dictionary locale.
    #[arg(long)]
    locale: Option<String>,
    /// Context of the training rows; defaults to the first application.
    #[arg(long)]
    application: Option<String>,
}

#[derive(Debug, Args)]
struct ContextArgs {
    #[arg(long)]
    locale: Option<String>,
    #[arg(long)]
    application: Option<String>,
}

#[derive(Debug, Args)]
struct CorrectArgs {
    #[arg(long)]
    artifacts: PathBuf,
    #[command(flatten)]
    context: ContextArgs,
    queries: Vec<String>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// `input<TAB>gold[<TAB>predicted]` rows.
    #[arg(long)]
    data: PathBuf,
    /// Artifacts used for rows without a prediction.
    #[arg(long)]
    artifacts: Option<PathBuf>,
    /// Also write the report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    context: ContextArgs,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long)]
    artifacts: Option<PathBuf>,
    /// Service config; defaults to `speller.conf` in the artifact directory.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    listen: Option<String>,
}

#[derive(Debug, Args)]
struct RefreshArgs {
    #[arg(long)]
    artifacts: PathBuf,
    /// `query<TAB>count` log.
    #[arg(long)]
    log: PathBuf,
    /// Occurrences a new term needs to enter the dictionary.
    #[arg(long, default_value_t = DEFAULT_MIN_NEW_TERM_COUNT)]
    min_count: u64,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("speller: error: {e:#}");
            1
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::BuildIndex(a) => build_index(a),
        Command::GenData(a) => gen_data(a),
        Command::Train(a) => train_model(a),
        Command::Correct(a) => correct(a),
        Command::Eval(a) => eval(a),
        Command::Serve(a) => serve(a),
        Command::Refresh(a) => refresh(a),
    }
}

fn build_index(a: BuildIndexArgs) -> Result<()> {
    if a.prefix_length == 0 {
        bail!("--prefix-length must be positive");
    }
    let dict = load_dictionary(&a.lexicon, &a.custom, a.stats.as_deref(), &a.locale)?;
    let index = build_delete_index(&dict, a.max_edit_distance, a.prefix_length);
    save_index(&a.out, &dict, &index, a.dump_index)?;
    eprintln!(
        "{} terms, {} index keys written to {}",
        dict.len(),
        index.variant_count(),
        a.out.display()
    );
    Ok(())
}

fn gen_data(a: GenDataArgs) -> Result<()> {
    let queries = read_queries(&a.input)?;
    let injector = ErrorInjector::new(&a.locale);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let rows: Vec<DatasetRow> = generate_dataset(&queries, &injector, &mut rng, a.error_prob)?
        .iter()
        .map(DatasetRow::from)
        .collect();
    write_file(&a.out, dataset_to_tsv(&rows).as_bytes())?;
    eprintln!("{} rows written to {}", rows.len(), a.out.display());
    Ok(())
}

fn train_model(a: TrainArgs) -> Result<()> {
    let (dict, index) = load_index(&a.artifacts)?;
    let schema = FeatureSchema::new(a.locales, a.applications)?;
    let context = RequestContext::new(
        a.locale.unwrap_or_else(|| dict.locale().to_owned()),
        a.application.unwrap_or_else(|| schema.applications[0].clone()),
    );
    let mut rows = read_dataset(&a.data)?;
    for path in &a.pairs {
        let pairs = load_misspelling_corpus(path)?;
        for _ in 0..a.pairs_weight {
            rows.extend(pairs.iter().map(|(misspelled, correct)| DatasetRow {
                corrupted: misspelled.clone(),
                original: correct.clone(),
                error_types: Vec::new(),
            }));
        }
    }
    let (examples, stats) = build_training_set(&rows, &dict, &index, &schema, &context, a.min_candidates)?;
    eprintln!(
        "{} rows, {} corrupted tokens, {} usable ({} gold not suggested, {} real words); {} examples",
        stats.rows,
        stats.corrupted_tokens,
        stats.used_tokens,
        stats.gold_missing,
        stats.in_dictionary,
        examples.len()
    );
    let config = TrainConfig {
        epochs: a.epochs,
        batch_size: a.batch_size,
        learning_rate: a.learning_rate,
        momentum: a.momentum,
        dropout_rate: a.dropout,
        seed: a.seed,
        ..TrainConfig::default()
    };
    let model = train(&examples, &schema, &config)?;
    let out = a.out.unwrap_or_else(|| a.artifacts.join(MODEL_FILE));
    save_model(&model, &out)?;
    eprintln!("model written to {}", out.display());
    Ok(())
}

fn open_service(dir: &Path) -> Result<Service> {
    let config = ServiceConfig::for_artifact_dir(dir)?;
    Service::open(config).with_context(|| format!("loading artifacts from {}", dir.display()))
}

fn correct(a: CorrectArgs) -> Result<()> {
    let service = open_service(&a.artifacts)?;
    let context = service.context(a.context.locale, a.context.application)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut emit = |query: &str| -> Result<()> {
        let result = service.correct(query, &context)?;
        writeln!(out, "{}\t{}\t{:.4}", query, result.corrected, result.confidence())?;
        Ok(())
    };
    if a.queries.is_empty() {
        for line in io::stdin().lock().lines() {
            let line = line.context("reading stdin")?;
            emit(line.trim_end_matches('\r'))?;
        }
    } else {
        for q in &a.queries {
            emit(q)?;
        }
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let rows = read_eval_file(&a.data)?;
    let service = a.artifacts.as_deref().map(open_service).transpose()?;
    let context = service
        .as_ref()
        .map(|s| s.context(a.context.locale, a.context.application))
        .transpose()?;
    let records = score_rows(&rows, |input| match (&service, &context) {
        (Some(s), Some(c)) => Ok(s.correct(input, c)?.corrected),
        _ => Err(crate::error::Error::Argument(
            "rows without a predicted column need --artifacts".into(),
        )),
    })?;
    let report = evaluate(&records)?;
    println!("{report}");
    if let Some(path) = a.report {
        write_file(&path, serde_json::to_string_pretty(&report)?.as_bytes())?;
    }
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let mut config = match (&a.config, &a.artifacts) {
        (Some(path), _) => ServiceConfig::load(path)?,
        (None, Some(dir)) => ServiceConfig::for_artifact_dir(dir)?,
        (None, None) => ServiceConfig::default(),
    };
    config.apply_env(|k| std::env::var(k).ok());
    if let Some(dir) = a.artifacts {
        config.artifact_dir = dir;
    }
    if let Some(listen) = a.listen {
        config.listen = listen;
    }
    let service = Arc::new(Service::open(config)?);
    let handle = spawn(service)?;
    eprintln!("listening on http://{}", handle.addr());
    handle.wait();
    Ok(())
}

fn refresh(a: RefreshArgs) -> Result<()> {
    let (dict, index) = load_index(&a.artifacts)?;
    let config = RefreshConfig {
        min_new_term_count: a.min_count,
        max_edit_distance: index.max_edit_distance(),
        prefix_length: index.prefix_length(),
    };
    let refreshed = refresh_behavioral_stats(&a.log, &dict, &config)?;
    let dump = a.artifacts.join(INDEX_DUMP_FILE).exists();
    save_index(&a.artifacts, &refreshed.dictionary, &refreshed.index, dump)?;
    let s = refreshed.stats;
    eprintln!(
        "{} log queries: {} terms updated, {} added, {} below threshold",
        s.log_queries, s.updated_terms, s.new_terms, s.rejected_terms
    );
    Ok(())
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["speller", "bogus"]), 2);
        assert_eq!(run(["speller", "build-index"]), 2);
        assert_eq!(run(["speller", "correct", "--artifacts"]), 2);
    }

    #[test]
    fn failures_exit_1() {
        assert_eq!(run(["speller", "eval", "--data", "/nonexistent/eval.tsv"]), 1);
    }

    #[test]
    fn command_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
