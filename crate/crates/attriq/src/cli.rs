//! The pipeline as reproducible subcommands.
//!
//! One binary, eight stages: `synth` fabricates a corpus, `build`
//! counts it into a graph snapshot, `dict` compiles the value
//! dictionary, `featurize` turns labeled queries into vectors, `train`
//! fits the classifier, `predict` scores raw queries, `eval` reports
//! identification and ranking quality, and `bench` measures
//! throughput. Every stage seeds all randomness from `--seed`, writes
//! a checksum manifest beside each artifact, and verifies manifests on
//! the artifacts it reads.
//!
//! Exit codes classify failures: 0 success, 2 usage (bad flags or
//! config), 3 input format (malformed, corrupt, or mismatched
//! artifacts), 4 internal (I/O and everything else).

pub mod manifest;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::catalog::{
    build_graph_stream, load_catalog, load_graph, save_catalog, save_graph, AttributeSchema, Item,
    KnowledgeGraph,
};
use crate::error::{Error, Result};
use crate::eval::{ndcg_at_k, prf1, save_judgments, ItemRanker, Judgment, PRF1Report, RankMode};
use crate::features::{featurize, load_features, save_features, FeatureRecord, FeatureVector};
use crate::lexicon::{
    build_dictionary, detect_conflicts, extract_candidates, load_dictionary, save_dictionary,
    Dictionary, Query,
};
use crate::model::{
    baseline_predict, load_labeled_queries, load_model, predict, save_labeled_queries, save_model,
    train_with_history, Model, TrainConfig,
};
use crate::synth::{generate_catalog, generate_judgments, generate_labeled_queries, SynthConfig};
use manifest::{verify_input, RunManifest};

#[derive(Debug, Parser)]
#[command(
    name = "attriq",
    version,
    about = "Catalog-driven query attribute identification"
)]
pub struct Cli {
    /// Seed for every random choice the invoked command makes.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic catalog, labeled queries, and judgments.
    Synth(SynthArgs),
    /// Count catalog co-occurrences into a graph snapshot.
    Build(BuildArgs),
    /// Compile the value-phrase dictionary from a graph snapshot.
    Dict(DictArgs),
    /// Turn labeled queries into feature records.
    Featurize(FeaturizeArgs),
    /// Train the presence classifier on feature records.
    Train(TrainArgs),
    /// Score raw queries with a trained model.
    Predict(PredictArgs),
    /// Evaluate identification and ranking quality.
    Eval(EvalArgs),
    /// Measure extract+featurize+predict throughput.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory receiving catalog.jsonl, queries.jsonl, judgments.tsv.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// key=value settings file; its entries win over the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub item_count: Option<usize>,
    #[arg(long)]
    pub query_count: Option<usize>,
    #[arg(long)]
    pub conflict_rate: Option<f64>,
    #[arg(long)]
    pub exponent: Option<f64>,
    #[arg(long)]
    pub noise_rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Catalog file, one JSON item per line.
    #[arg(long)]
    pub catalog: PathBuf,
    /// Attribute names in schema order, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub schema: Vec<String>,
    #[arg(long, default_value = "graph.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DictArgs {
    /// Graph snapshot to read value phrases from.
    #[arg(long)]
    pub graph: PathBuf,
    /// Keep only values appearing on at least this many items.
    #[arg(long, default_value_t = 1)]
    pub min_support: u64,
    #[arg(long, default_value = "dict.tsv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub dict: PathBuf,
    /// Labeled queries, one JSON record per line.
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long, default_value = "features.jsonl")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Graph snapshot supplying the schema the features were computed
    /// under.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Disable inverse-class-frequency example weighting.
    #[arg(long)]
    pub no_class_weights: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub dict: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Raw queries, one per line.
    #[arg(long)]
    pub queries: PathBuf,
    /// Attribute whose presence to adjudicate.
    #[arg(long)]
    pub target_attr: String,
    /// Override the decision threshold stored in the model.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, default_value = "predictions.jsonl")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub dict: PathBuf,
    /// Catalog file; its items are what the ranking task reorders.
    #[arg(long)]
    pub catalog: PathBuf,
    /// Labeled queries to evaluate on.
    #[arg(long)]
    pub queries: PathBuf,
    /// Relevance judgments (query TAB item_id TAB orders).
    #[arg(long)]
    pub judgments: PathBuf,
    /// Trained model; omit to evaluate only the baseline.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Also evaluate the dictionary-lookup baseline.
    #[arg(long)]
    pub baseline: bool,
    #[arg(long)]
    pub target_attr: String,
    /// Override the decision threshold stored in the model.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_enum, default_value_t = RankModeArg::Boost)]
    pub rank_mode: RankModeArg,
    #[arg(long, default_value_t = 20)]
    pub ndcg_k: usize,
    #[arg(long, default_value = "eval.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub dict: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Raw queries, one per line.
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub target_attr: String,
    /// Worker thread counts to measure, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub threads: Vec<usize>,
    /// Cycle the query file this many times to enlarge the sample.
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    /// Machine-readable report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// CLI-facing spelling of [`RankMode`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RankModeArg {
    Boost,
    Filter,
}

impl From<RankModeArg> for RankMode {
    fn from(arg: RankModeArg) -> RankMode {
        match arg {
            RankModeArg::Boost => RankMode::Boost,
            RankModeArg::Filter => RankMode::Filter,
        }
    }
}

/// Parse real process arguments and execute; returns the process exit
/// code. Intended to be the whole body of `main`.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too; they are not errors
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            error_class(&err)
        }
    }
}

/// Parse the given argument list and execute, for in-process tests.
pub fn run_from<I, S>(args: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    execute(&cli)
}

/// Exit-code class for a failure: 2 usage, 3 input format, 4 internal.
pub fn error_class(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_) | Error::InvalidSchema(_) => 2,
        Error::MalformedRecord { .. }
        | Error::Corrupt { .. }
        | Error::VersionMismatch { .. }
        | Error::ChecksumMismatch { .. }
        | Error::FingerprintMismatch { .. }
        | Error::UnknownAttribute(_)
        | Error::WidthMismatch { .. }
        | Error::LengthMismatch { .. } => 3,
        _ => 4,
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(args) => cmd_synth(cli.seed, args),
        Command::Build(args) => cmd_build(cli.seed, args),
        Command::Dict(args) => cmd_dict(cli.seed, args),
        Command::Featurize(args) => cmd_featurize(cli.seed, args),
        Command::Train(args) => cmd_train(cli.seed, args),
        Command::Predict(args) => cmd_predict(cli.seed, args),
        Command::Eval(args) => cmd_eval(cli.seed, args),
        Command::Bench(args) => cmd_bench(cli.seed, args),
    }
}

fn elapsed_ms(started: Instant) -> u64 {
    started.elapsed().as_millis() as u64
}

fn config_json<T: Serialize>(config: &T) -> serde_json::Value {
    serde_json::to_value(config).expect("config serializes")
}

fn cmd_synth(seed: u64, args: &SynthArgs) -> Result<()> {
    let started = Instant::now();
    let mut config = SynthConfig {
        seed,
        ..SynthConfig::default()
    };
    if let Some(n) = args.item_count {
        config.item_count = n;
    }
    if let Some(n) = args.query_count {
        config.query_count = n;
    }
    if let Some(r) = args.conflict_rate {
        config.conflict_rate = r;
    }
    if let Some(e) = args.exponent {
        config.exponent = e;
    }
    if let Some(r) = args.noise_rate {
        config.noise_rate = r;
    }
    if let Some(path) = &args.config {
        config.apply_file(path)?;
    }
    config.validate()?;

    std::fs::create_dir_all(&args.out_dir)?;
    let catalog = generate_catalog(&config)?;
    let queries = generate_labeled_queries(&catalog, &config)?;
    let judgment_rows = generate_judgments(&catalog, &queries, &config)?;

    let catalog_path = args.out_dir.join("catalog.jsonl");
    let queries_path = args.out_dir.join("queries.jsonl");
    let judgments_path = args.out_dir.join("judgments.tsv");
    save_catalog(&catalog, &catalog_path)?;
    save_labeled_queries(&queries, &queries_path)?;
    save_judgments(&judgment_rows, &judgments_path)?;

    RunManifest::build(
        "synth",
        config.seed,
        config_json(&config),
        &[],
        &[&catalog_path, &queries_path, &judgments_path],
        elapsed_ms(started),
    )?
    .write()?;
    println!(
        "wrote {} items, {} labeled queries, {} judgment rows to {}",
        catalog.len(),
        queries.len(),
        judgment_rows.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_build(seed: u64, args: &BuildArgs) -> Result<()> {
    let started = Instant::now();
    verify_input(&args.catalog)?;
    let schema = AttributeSchema::new(args.schema.clone())?;
    let reader = load_catalog(&args.catalog, &schema)?;
    let kg = build_graph_stream(&schema, reader)?;
    save_graph(&kg, &args.out)?;

    RunManifest::build(
        "build",
        seed,
        serde_json::json!({ "schema": args.schema }),
        &[&args.catalog],
        &[&args.out],
        elapsed_ms(started),
    )?
    .write()?;
    println!(
        "wrote {} ({} items, {} value nodes)",
        args.out.display(),
        kg.item_count(),
        kg.iter_values().count()
    );
    Ok(())
}

fn cmd_dict(seed: u64, args: &DictArgs) -> Result<()> {
    let started = Instant::now();
    verify_input(&args.graph)?;
    let kg = load_graph(&args.graph)?;
    let dict = build_dictionary(&kg, args.min_support)?;
    save_dictionary(&dict, &args.out)?;

    RunManifest::build(
        "dict",
        seed,
        serde_json::json!({ "min_support": args.min_support }),
        &[&args.graph],
        &[&args.out],
        elapsed_ms(started),
    )?
    .write()?;
    println!(
        "wrote {} ({} surface forms, longest phrase {} tokens)",
        args.out.display(),
        dict.len(),
        dict.max_phrase_tokens()
    );
    Ok(())
}

fn cmd_featurize(seed: u64, args: &FeaturizeArgs) -> Result<()> {
    let started = Instant::now();
    for input in [&args.graph, &args.dict, &args.queries] {
        verify_input(input)?;
    }
    let kg = load_graph(&args.graph)?;
    let dict = load_dictionary(&args.dict)?;
    let queries = load_labeled_queries(&args.queries)?;

    let mut records = Vec::with_capacity(queries.len());
    for lq in &queries {
        let spans = extract_candidates(&Query::new(&lq.query), &dict);
        let fv = featurize(&kg, &spans, &lq.target, &lq.candidate_value)?;
        records.push(FeatureRecord {
            query: lq.query.clone(),
            target: lq.target.clone(),
            candidate_value: lq.candidate_value.clone(),
            dense: fv.dense,
            label: Some(lq.label),
        });
    }
    save_features(&records, &args.out)?;

    RunManifest::build(
        "featurize",
        seed,
        serde_json::Value::Null,
        &[&args.graph, &args.dict, &args.queries],
        &[&args.out],
        elapsed_ms(started),
    )?
    .write()?;
    println!("wrote {} ({} records)", args.out.display(), records.len());
    Ok(())
}

fn cmd_train(seed: u64, args: &TrainArgs) -> Result<()> {
    let started = Instant::now();
    for input in [&args.graph, &args.features] {
        verify_input(input)?;
    }
    let kg = load_graph(&args.graph)?;
    let schema = kg.schema();
    let records = load_features(&args.features)?;

    let mut examples = Vec::with_capacity(records.len());
    for (i, record) in records.into_iter().enumerate() {
        let Some(label) = record.label else {
            return Err(Error::MalformedRecord {
                line: i + 1,
                message: "feature record has no label".into(),
            });
        };
        let fv = FeatureVector::from_dense(
            schema,
            &record.target,
            &record.candidate_value,
            record.dense,
        )?;
        examples.push((fv, label));
    }

    let config = TrainConfig {
        learning_rate: args.learning_rate,
        l2: args.l2,
        epochs: args.epochs,
        seed,
        class_weighting: !args.no_class_weights,
        threshold: args.threshold,
    };
    let (model, history) = train_with_history(schema, &examples, &config)?;
    save_model(&model, &args.out)?;

    RunManifest::build(
        "train",
        seed,
        config_json(&config),
        &[&args.graph, &args.features],
        &[&args.out],
        elapsed_ms(started),
    )?
    .write()?;
    println!(
        "wrote {} ({} examples, final loss {:.6})",
        args.out.display(),
        examples.len(),
        history.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

/// Load model + graph together, apply a threshold override, and check
/// their schemas agree.
fn load_model_for(
    graph_path: &Path,
    model_path: &Path,
    threshold: Option<f64>,
) -> Result<(KnowledgeGraph, Model)> {
    verify_input(graph_path)?;
    verify_input(model_path)?;
    let kg = load_graph(graph_path)?;
    let mut model = load_model(model_path)?;
    model.verify_schema(kg.schema())?;
    if let Some(t) = threshold {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidConfig("threshold must be in (0, 1)".into()));
        }
        model.threshold = t;
    }
    Ok((kg, model))
}

#[derive(Serialize)]
struct CandidateScore {
    value: String,
    score: f64,
    present: bool,
}

#[derive(Serialize)]
struct PredictionRecord<'a> {
    query: &'a str,
    target: &'a str,
    candidates: Vec<CandidateScore>,
}

fn cmd_predict(seed: u64, args: &PredictArgs) -> Result<()> {
    let started = Instant::now();
    let (kg, model) = load_model_for(&args.graph, &args.model, args.threshold)?;
    verify_input(&args.dict)?;
    verify_input(&args.queries)?;
    let dict = load_dictionary(&args.dict)?;
    kg.schema().require(&args.target_attr)?;
    let lines = read_query_lines(&args.queries)?;

    let mut out = BufWriter::new(File::create(&args.out)?);
    for line in &lines {
        let spans = extract_candidates(&Query::new(line), &dict);
        let values: BTreeSet<&str> = spans
            .iter()
            .filter(|s| s.attribute == args.target_attr)
            .map(|s| s.value.as_str())
            .collect();
        let mut candidates = Vec::with_capacity(values.len());
        for value in values {
            let fv = featurize(&kg, &spans, &args.target_attr, value)?;
            let (score, present) = predict(&model, &fv)?;
            candidates.push(CandidateScore {
                value: value.to_string(),
                score,
                present,
            });
        }
        let record = PredictionRecord {
            query: line,
            target: &args.target_attr,
            candidates,
        };
        serde_json::to_writer(&mut out, &record)
            .map_err(|e| Error::corrupt(&args.out, e.to_string()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    drop(out);

    RunManifest::build(
        "predict",
        seed,
        serde_json::json!({
            "target_attr": args.target_attr,
            "threshold": model.threshold,
        }),
        &[&args.graph, &args.dict, &args.model, &args.queries],
        &[&args.out],
        elapsed_ms(started),
    )?
    .write()?;
    println!("wrote {} ({} queries)", args.out.display(), lines.len());
    Ok(())
}

fn read_query_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path)?;
    let mut lines = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            lines.push(line);
        }
    }
    Ok(lines)
}

/// Quality numbers for one system (framework or baseline).
#[derive(Debug, Serialize)]
pub struct SystemReport {
    #[serde(flatten)]
    pub prf1: PRF1Report,
    pub mean_ndcg: f64,
    pub conflict_mean_ndcg: f64,
}

#[derive(Debug, Serialize)]
pub struct DeltaReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mean_ndcg: f64,
    pub conflict_mean_ndcg: f64,
}

/// Machine-readable output of `eval`.
#[derive(Debug, Serialize)]
pub struct EvalReport {
    pub target: String,
    pub rank_mode: String,
    pub ndcg_k: usize,
    /// Labeled queries evaluated (matching the target attribute).
    pub query_count: usize,
    /// Queries whose spans contain at least one conflict group.
    pub conflict_query_count: usize,
    /// Queries contributing to nDCG means (those with judgments).
    pub judged_query_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub framework: Option<SystemReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<SystemReport>,
    /// framework minus baseline, present when both were evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaReport>,
}

/// Running nDCG aggregation for one system.
#[derive(Default)]
struct NdcgSums {
    total: f64,
    n: usize,
    conflict_total: f64,
    conflict_n: usize,
}

impl NdcgSums {
    fn add(&mut self, ndcg: f64, conflict: bool) {
        self.total += ndcg;
        self.n += 1;
        if conflict {
            self.conflict_total += ndcg;
            self.conflict_n += 1;
        }
    }

    fn means(&self) -> (f64, f64) {
        let mean = if self.n == 0 { 0.0 } else { self.total / self.n as f64 };
        let conflict_mean = if self.conflict_n == 0 {
            0.0
        } else {
            self.conflict_total / self.conflict_n as f64
        };
        (mean, conflict_mean)
    }
}

fn cmd_eval(seed: u64, args: &EvalArgs) -> Result<()> {
    let started = Instant::now();
    if args.model.is_none() && !args.baseline {
        return Err(Error::InvalidConfig(
            "nothing to evaluate: provide --model and/or --baseline".into(),
        ));
    }
    if args.ndcg_k == 0 {
        return Err(Error::InvalidConfig("ndcg_k must be at least 1".into()));
    }

    verify_input(&args.graph)?;
    let kg = load_graph(&args.graph)?;
    let model = args
        .model
        .as_deref()
        .map(|path| {
            verify_input(path)?;
            let mut model = load_model(path)?;
            model.verify_schema(kg.schema())?;
            if let Some(t) = args.threshold {
                if !(t > 0.0 && t < 1.0) {
                    return Err(Error::InvalidConfig("threshold must be in (0, 1)".into()));
                }
                model.threshold = t;
            }
            Ok(model)
        })
        .transpose()?;
    for input in [&args.dict, &args.catalog, &args.queries, &args.judgments] {
        verify_input(input)?;
    }
    let dict = load_dictionary(&args.dict)?;
    let items: Vec<Item> = load_catalog(&args.catalog, kg.schema())?.collect::<Result<_>>()?;
    let queries = load_labeled_queries(&args.queries)?;
    let judgments = crate::eval::load_judgments(&args.judgments)?;
    kg.schema().require(&args.target_attr)?;

    let mut judged: std::collections::HashMap<&str, Vec<Judgment>> =
        std::collections::HashMap::new();
    for j in &judgments {
        judged.entry(j.query.as_str()).or_default().push(j.clone());
    }

    let rank_mode: RankMode = args.rank_mode.into();
    let ranker = ItemRanker::new(&kg, &items);
    let mut labels = Vec::new();
    let mut fw_preds = Vec::new();
    let mut bl_preds = Vec::new();
    let mut fw_ndcg = NdcgSums::default();
    let mut bl_ndcg = NdcgSums::default();
    let mut conflict_query_count = 0;
    let mut judged_query_count = 0;

    for lq in queries.iter().filter(|lq| lq.target == args.target_attr) {
        let spans = extract_candidates(&Query::new(&lq.query), &dict);
        let conflict = !detect_conflicts(&spans).is_empty();
        if conflict {
            conflict_query_count += 1;
        }
        labels.push(lq.label);

        // attributes other than the target are taken at face value by
        // both systems; only the target decision differs
        let anchor_pairs: BTreeSet<(String, String)> = spans
            .iter()
            .filter(|s| s.attribute != args.target_attr)
            .map(|s| (s.attribute.clone(), s.value.clone()))
            .collect();

        let fw_present = match &model {
            Some(model) => {
                let fv = featurize(&kg, &spans, &args.target_attr, &lq.candidate_value)?;
                let (_, present) = predict(model, &fv)?;
                fw_preds.push(present);
                present
            }
            None => false,
        };
        let bl_present = baseline_predict(&spans, &args.target_attr);
        if args.baseline {
            bl_preds.push(bl_present);
        }

        let query_judgments = judged.get(lq.query.as_str());
        if let Some(query_judgments) = query_judgments {
            judged_query_count += 1;
            if model.is_some() {
                let mut resolved: Vec<(String, String)> =
                    anchor_pairs.iter().cloned().collect();
                if fw_present {
                    resolved.push((args.target_attr.clone(), lq.candidate_value.clone()));
                }
                let ranking = ranker.rank(&resolved, rank_mode);
                fw_ndcg.add(ndcg_at_k(&ranking, query_judgments, args.ndcg_k), conflict);
            }
            if args.baseline {
                let mut resolved: Vec<(String, String)> =
                    anchor_pairs.iter().cloned().collect();
                if bl_present {
                    // the baseline believes every target span it sees
                    let values: BTreeSet<&str> = spans
                        .iter()
                        .filter(|s| s.attribute == args.target_attr)
                        .map(|s| s.value.as_str())
                        .collect();
                    for value in values {
                        resolved.push((args.target_attr.clone(), value.to_string()));
                    }
                }
                let ranking = ranker.rank(&resolved, rank_mode);
                bl_ndcg.add(ndcg_at_k(&ranking, query_judgments, args.ndcg_k), conflict);
            }
        }
    }

    let framework = match &model {
        Some(_) => {
            let (mean_ndcg, conflict_mean_ndcg) = fw_ndcg.means();
            Some(SystemReport {
                prf1: prf1(&fw_preds, &labels)?,
                mean_ndcg,
                conflict_mean_ndcg,
            })
        }
        None => None,
    };
    let baseline = if args.baseline {
        let (mean_ndcg, conflict_mean_ndcg) = bl_ndcg.means();
        Some(SystemReport {
            prf1: prf1(&bl_preds, &labels)?,
            mean_ndcg,
            conflict_mean_ndcg,
        })
    } else {
        None
    };
    let delta = match (&framework, &baseline) {
        (Some(fw), Some(bl)) => Some(DeltaReport {
            precision: fw.prf1.precision - bl.prf1.precision,
            recall: fw.prf1.recall - bl.prf1.recall,
            f1: fw.prf1.f1 - bl.prf1.f1,
            mean_ndcg: fw.mean_ndcg - bl.mean_ndcg,
            conflict_mean_ndcg: fw.conflict_mean_ndcg - bl.conflict_mean_ndcg,
        }),
        _ => None,
    };

    let report = EvalReport {
        target: args.target_attr.clone(),
        rank_mode: format!("{:?}", rank_mode).to_lowercase(),
        ndcg_k: args.ndcg_k,
        query_count: labels.len(),
        conflict_query_count,
        judged_query_count,
        framework,
        baseline,
        delta,
    };

    let mut out = BufWriter::new(File::create(&args.out)?);
    serde_json::to_writer_pretty(&mut out, &report)
        .map_err(|e| Error::corrupt(&args.out, e.to_string()))?;
    out.write_all(b"\n")?;
    out.flush()?;
    drop(out);

    let mut manifest_inputs: Vec<&Path> = vec![
        &args.graph,
        &args.dict,
        &args.catalog,
        &args.queries,
        &args.judgments,
    ];
    if let Some(model_path) = args.model.as_deref() {
        manifest_inputs.push(model_path);
    }
    RunManifest::build(
        "eval",
        seed,
        serde_json::json!({
            "target_attr": args.target_attr,
            "rank_mode": report.rank_mode,
            "ndcg_k": args.ndcg_k,
            "baseline": args.baseline,
            "threshold": args.threshold,
        }),
        &manifest_inputs,
        &[&args.out],
        elapsed_ms(started),
    )?
    .write()?;

    print_eval_table(&report);
    println!("wrote {}", args.out.display());
    Ok(())
}

fn print_eval_table(report: &EvalReport) {
    println!(
        "evaluated {} queries ({} conflict-bearing, {} judged), target {:?}, nDCG@{}",
        report.query_count,
        report.conflict_query_count,
        report.judged_query_count,
        report.target,
        report.ndcg_k
    );
    println!(
        "{:<10} {:>9} {:>9} {:>9} {:>9} {:>13}",
        "system", "precision", "recall", "f1", "nDCG", "conflict-nDCG"
    );
    let row = |name: &str, s: &SystemReport| {
        println!(
            "{:<10} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>13.4}",
            name, s.prf1.precision, s.prf1.recall, s.prf1.f1, s.mean_ndcg, s.conflict_mean_ndcg
        );
    };
    if let Some(fw) = &report.framework {
        row("framework", fw);
    }
    if let Some(bl) = &report.baseline {
        row("baseline", bl);
    }
    if let Some(d) = &report.delta {
        println!(
            "{:<10} {:>+9.4} {:>+9.4} {:>+9.4} {:>+9.4} {:>+13.4}",
            "delta", d.precision, d.recall, d.f1, d.mean_ndcg, d.conflict_mean_ndcg
        );
    }
}

/// One measured thread-count run.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRun {
    pub threads: usize,
    pub samples: usize,
    pub elapsed_ms: f64,
    pub qps: f64,
    pub p50_us: f64,
    pub p90_us: f64,
    pub p99_us: f64,
    pub max_us: f64,
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub target: String,
    pub runs: Vec<BenchRun>,
}

fn percentile_us(sorted_nanos: &[u64], fraction: f64) -> f64 {
    if sorted_nanos.is_empty() {
        return 0.0;
    }
    let idx = ((sorted_nanos.len() - 1) as f64 * fraction).round() as usize;
    sorted_nanos[idx.min(sorted_nanos.len() - 1)] as f64 / 1_000.0
}

/// The measured unit of work: spans, then features and a prediction
/// for every distinct target value the spans propose.
fn process_query(
    kg: &KnowledgeGraph,
    dict: &Dictionary,
    model: &Model,
    target: &str,
    text: &str,
) -> Result<()> {
    let spans = extract_candidates(&Query::new(text), dict);
    let values: BTreeSet<&str> = spans
        .iter()
        .filter(|s| s.attribute == target)
        .map(|s| s.value.as_str())
        .collect();
    for value in values {
        let fv = featurize(kg, &spans, target, value)?;
        std::hint::black_box(predict(model, &fv)?);
    }
    Ok(())
}

fn bench_one(
    kg: &KnowledgeGraph,
    dict: &Dictionary,
    model: &Model,
    target: &str,
    queries: &[String],
    threads: usize,
) -> Result<BenchRun> {
    let chunk_size = queries.len().div_ceil(threads);
    let started = Instant::now();
    let mut latencies: Vec<u64> = Vec::with_capacity(queries.len());
    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::with_capacity(threads);
        for chunk in queries.chunks(chunk_size) {
            handles.push(scope.spawn(move || -> Result<Vec<u64>> {
                let mut chunk_latencies = Vec::with_capacity(chunk.len());
                for text in chunk {
                    let t0 = Instant::now();
                    process_query(kg, dict, model, target, text)?;
                    chunk_latencies.push(t0.elapsed().as_nanos() as u64);
                }
                Ok(chunk_latencies)
            }));
        }
        for handle in handles {
            latencies.extend(handle.join().expect("bench worker panicked")?);
        }
        Ok(())
    })?;
    let elapsed = started.elapsed();

    latencies.sort_unstable();
    Ok(BenchRun {
        threads,
        samples: queries.len(),
        elapsed_ms: elapsed.as_secs_f64() * 1_000.0,
        qps: queries.len() as f64 / elapsed.as_secs_f64(),
        p50_us: percentile_us(&latencies, 0.50),
        p90_us: percentile_us(&latencies, 0.90),
        p99_us: percentile_us(&latencies, 0.99),
        max_us: latencies.last().map_or(0.0, |&n| n as f64 / 1_000.0),
    })
}

fn cmd_bench(seed: u64, args: &BenchArgs) -> Result<()> {
    let started = Instant::now();
    if args.repeat == 0 {
        return Err(Error::InvalidConfig("repeat must be at least 1".into()));
    }
    if args.threads.is_empty() || args.threads.contains(&0) {
        return Err(Error::InvalidConfig(
            "threads must list positive worker counts".into(),
        ));
    }
    let (kg, model) = load_model_for(&args.graph, &args.model, None)?;
    verify_input(&args.dict)?;
    verify_input(&args.queries)?;
    let dict = load_dictionary(&args.dict)?;
    kg.schema().require(&args.target_attr)?;

    let base = read_query_lines(&args.queries)?;
    if base.is_empty() {
        println!("no samples: query file is empty");
        return Ok(());
    }
    let mut queries = Vec::with_capacity(base.len() * args.repeat);
    for _ in 0..args.repeat {
        queries.extend(base.iter().cloned());
    }

    let mut runs = Vec::with_capacity(args.threads.len());
    for &threads in &args.threads {
        let run = bench_one(&kg, &dict, &model, &args.target_attr, &queries, threads)?;
        println!(
            "{} threads: {} samples in {:.1} ms -> {:.0} qps (p50 {:.1} us, p90 {:.1} us, p99 {:.1} us, max {:.1} us)",
            run.threads, run.samples, run.elapsed_ms, run.qps, run.p50_us, run.p90_us, run.p99_us, run.max_us
        );
        runs.push(run);
    }

    if let Some(out) = &args.out {
        let report = BenchReport {
            target: args.target_attr.clone(),
            runs: runs.clone(),
        };
        let mut file = BufWriter::new(File::create(out)?);
        serde_json::to_writer_pretty(&mut file, &report)
            .map_err(|e| Error::corrupt(out, e.to_string()))?;
        file.write_all(b"\n")?;
        file.flush()?;
        drop(file);
        RunManifest::build(
            "bench",
            seed,
            serde_json::json!({
                "target_attr": args.target_attr,
                "threads": args.threads,
                "repeat": args.repeat,
            }),
            &[&args.graph, &args.dict, &args.model, &args.queries],
            &[out.as_path()],
            elapsed_ms(started),
        )?
        .write()?;
        println!("wrote {}", out.display());
    }
    Ok(())
}
