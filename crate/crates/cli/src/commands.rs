//! Subcommand arguments and their implementations.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use argpp_core::corpus::{
    balance_subsample, build_fullsentence_dataset, generate_pair_dataset, normalize_judgments,
    parse_verbnet, read_gradient_items, read_judgments_csv, read_pairs_tsv, read_sentences_tsv,
    read_verbnet_dir, stratified_split, write_pairs_tsv, write_sentences_tsv, BuildStats,
    FullSentenceMode, Labeled, Lemmatizer, SplitRatios, VerbNetOptions,
};
use argpp_core::embed::{load_embeddings, EmbeddingFormat, OovPolicy};
use argpp_core::eval::{
    ablation_sweep, approx_randomization, approx_randomization_by, classification_metrics,
    score_distribution_stats, standard_subsets, to_json, Table,
};
use argpp_core::models::{
    classify, cross_validate, predict, read_diagnostics_csv, train_classifier,
    ClassifierParams, CooccurrenceCounts, CvOutcome, DiagnosticsScore, EncoderInput,
    FeatureFlags, ItemFeatures, LabeledInput, RegressorKind,
};
use argpp_core::nn::Checkpoint;
use argpp_core::rng::derive_seed;
use argpp_core::{
    ArgLabel, EmbeddingTable, EncoderKind, FeaturalPrepMap, GradientExample, Preposition,
    RegressionReport, SentenceExample, VerbLemma,
};
use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{require, require_existing, DatasetTask, RunConfig, SigMetric};
use crate::error::{CliError, CliResult};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a pair or full-sentence dataset from VerbNet and split it.
    GenDataset(GenDatasetArgs),
    /// Train the pair classifier or the gradient regressor.
    Train(TrainArgs),
    /// Score a classifier checkpoint on a dataset split.
    Evaluate(EvaluateArgs),
    /// Feature ablation table for the gradient regressor.
    Ablate(AblateArgs),
    /// Approximate randomization test between two systems.
    Significance(SignificanceArgs),
    /// Classify one {verb, preposition} pair.
    Predict(PredictArgs),
    /// Normalize judgments and summarize the score distribution.
    Stats(StatsArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::GenDataset(_) => "gen-dataset",
            Command::Train(_) => "train",
            Command::Evaluate(_) => "evaluate",
            Command::Ablate(_) => "ablate",
            Command::Significance(_) => "significance",
            Command::Predict(_) => "predict",
            Command::Stats(_) => "stats",
        }
    }
}

#[derive(Debug, Args)]
pub struct EmbeddingArgs {
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long, value_parser = parse_from_str::<EmbeddingFormat>)]
    embedding_format: Option<EmbeddingFormat>,
    /// zero, error or lowercase.
    #[arg(long, value_parser = parse_from_str::<OovPolicy>)]
    oov: Option<OovPolicy>,
}

impl EmbeddingArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.paths.embeddings, &self.embeddings);
        if self.embedding_format.is_some() {
            cfg.paths.embedding_format = self.embedding_format;
        }
        if let Some(o) = self.oov {
            cfg.oov = o;
            cfg.regressor.oov = o;
        }
    }
}

#[derive(Debug, Args)]
pub struct GenDatasetArgs {
    #[arg(long, value_enum)]
    task: Option<DatasetTask>,
    /// Directory of VerbNet class XML files.
    #[arg(long)]
    verbnet: Option<PathBuf>,
    /// `feature<TAB>prep,prep,...` map replacing the bundled one.
    #[arg(long)]
    featural_map: Option<PathBuf>,
    /// JSON-lines corpus file; repeatable.
    #[arg(long)]
    corpus: Vec<PathBuf>,
    #[arg(long)]
    include_multi_class: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrainTask {
    Cls,
    Reg,
}

#[derive(Debug, Args)]
pub struct RegressionArgs {
    /// Gradient items TSV.
    #[arg(long)]
    items: Option<PathBuf>,
    /// `subject_id,item_id,rating` CSV.
    #[arg(long)]
    judgments: Option<PathBuf>,
    /// Verb/preposition co-occurrence counts.
    #[arg(long)]
    counts: Option<PathBuf>,
    /// `item_id,omissibility,pseudo_cleft` CSV.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    #[arg(long, value_parser = parse_from_str::<RegressorKind>)]
    regressor: Option<RegressorKind>,
    /// Skip the hyperparameter grid search.
    #[arg(long)]
    no_tune: bool,
    #[arg(long)]
    pca_k: Option<usize>,
}

impl RegressionArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.paths.items, &self.items);
        set(&mut cfg.paths.judgments, &self.judgments);
        set(&mut cfg.paths.counts, &self.counts);
        set(&mut cfg.paths.diagnostics, &self.diagnostics);
        if let Some(k) = self.regressor {
            cfg.regression.kind = k;
        }
        if self.no_tune {
            cfg.regression.tune = false;
        }
        if let Some(k) = self.pca_k {
            cfg.regressor.pca_k = k;
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value = "cls")]
    task: TrainTask,
    /// Dataset variant to train on (classifier only).
    #[arg(long, value_enum)]
    dataset: Option<DatasetTask>,
    #[arg(long)]
    dataset_dir: Option<PathBuf>,
    #[arg(long, value_parser = parse_from_str::<EncoderKind>)]
    encoder: Option<EncoderKind>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    proj_dim: Option<usize>,
    #[arg(long)]
    hidden_dim: Option<usize>,
    #[arg(long)]
    lstm_hidden: Option<usize>,
    /// Checkpoint path to write; defaults to `<out>/classifier.argm`.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Regressor features, e.g. `mi,dobj,diag,interactions`.
    #[arg(long, value_parser = parse_from_str::<FeatureFlags>)]
    features: Option<FeatureFlags>,
    #[command(flatten)]
    emb: EmbeddingArgs,
    #[command(flatten)]
    reg: RegressionArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "test")]
    split: Split,
    #[arg(long, value_enum)]
    dataset: Option<DatasetTask>,
    #[arg(long)]
    dataset_dir: Option<PathBuf>,
    #[command(flatten)]
    emb: EmbeddingArgs,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// Flags to sweep; `interactions`, if listed, is on in every row.
    #[arg(long, default_value = "mi,dobj,diag", value_parser = parse_from_str::<FeatureFlags>)]
    flags: FeatureFlags,
    #[command(flatten)]
    emb: EmbeddingArgs,
    #[command(flatten)]
    reg: RegressionArgs,
}

#[derive(Debug, Args)]
pub struct SignificanceArgs {
    /// System A: per-item scores (acc) or predicted labels (f1), one per line.
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Number of randomizations.
    #[arg(short = 'R', long = "R", visible_alias = "iterations")]
    iterations: Option<usize>,
    #[arg(long, value_enum)]
    metric: Option<SigMetric>,
    /// Gold labels, one per line; required for f1.
    #[arg(long)]
    gold: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    verb: String,
    #[arg(long)]
    prep: String,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[command(flatten)]
    emb: EmbeddingArgs,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    judgments: Option<PathBuf>,
}

fn parse_from_str<T>(s: &str) -> Result<T, String>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

fn set(slot: &mut Option<PathBuf>, flag: &Option<PathBuf>) {
    if flag.is_some() {
        slot.clone_from(flag);
    }
}

pub fn run(command: Command, mut cfg: RunConfig) -> CliResult<()> {
    let name = command.name();
    match command {
        Command::GenDataset(a) => {
            if let Some(t) = a.task {
                cfg.dataset.task = t;
            }
            set(&mut cfg.paths.verbnet_dir, &a.verbnet);
            set(&mut cfg.paths.featural_map, &a.featural_map);
            if !a.corpus.is_empty() {
                cfg.paths.corpus = a.corpus;
            }
            cfg.dataset.include_multi_class |= a.include_multi_class;
            require("VerbNet directory", &cfg.paths.verbnet_dir)?;
            if cfg.paths.featural_map.is_some() {
                require("featural map", &cfg.paths.featural_map)?;
            }
            if cfg.dataset.task != DatasetTask::Binary {
                if cfg.paths.corpus.is_empty() {
                    return Err(CliError::Validation(format!(
                        "task {} needs at least one --corpus file",
                        cfg.dataset.task.as_str()
                    )));
                }
                for p in &cfg.paths.corpus {
                    require_existing("corpus", p)?;
                }
            }
            echo_config(&cfg, name)?;
            gen_dataset(&cfg)
        }
        Command::Train(a) => {
            a.emb.apply(&mut cfg);
            a.reg.apply(&mut cfg);
            if let Some(t) = a.dataset {
                cfg.dataset.task = t;
            }
            set(&mut cfg.paths.dataset_dir, &a.dataset_dir);
            set(&mut cfg.paths.checkpoint, &a.checkpoint);
            let c = &mut cfg.classifier;
            if let Some(e) = a.encoder {
                c.encoder = e;
            }
            if let Some(v) = a.max_epochs {
                c.max_epochs = v;
                cfg.regressor.max_epochs = v;
            }
            if let Some(v) = a.patience {
                c.patience = v;
                cfg.regressor.patience = v;
            }
            if let Some(v) = a.proj_dim {
                c.proj_dim = v;
            }
            if let Some(v) = a.hidden_dim {
                c.hidden_dim = v;
            }
            if let Some(v) = a.lstm_hidden {
                c.lstm_hidden = v;
            }
            if let Some(f) = a.features {
                cfg.regressor.flags = f;
            }
            match a.task {
                TrainTask::Cls => {
                    require("embeddings", &cfg.paths.embeddings)?;
                    for split in [Split::Train, Split::Dev] {
                        require_existing("dataset split", &split_path(&cfg, split))?;
                    }
                    cfg.classifier.num_classes = cfg.dataset.task.num_classes();
                    cfg.classifier.seed = cfg.seed;
                    cfg.classifier.validate()?;
                    echo_config(&cfg, name)?;
                    train_cls(&cfg)
                }
                TrainTask::Reg => {
                    check_regression_inputs(&cfg, &cfg.regressor.flags)?;
                    cfg.regressor.seed = cfg.seed;
                    cfg.regression.cv.seed = cfg.seed;
                    cfg.regressor.validate()?;
                    echo_config(&cfg, name)?;
                    train_reg(&cfg)
                }
            }
        }
        Command::Evaluate(a) => {
            a.emb.apply(&mut cfg);
            if let Some(t) = a.dataset {
                cfg.dataset.task = t;
            }
            set(&mut cfg.paths.dataset_dir, &a.dataset_dir);
            set(&mut cfg.paths.checkpoint, &a.checkpoint);
            require("checkpoint", &cfg.paths.checkpoint)?;
            require("embeddings", &cfg.paths.embeddings)?;
            require_existing("dataset split", &split_path(&cfg, a.split))?;
            echo_config(&cfg, name)?;
            evaluate(&cfg, a.split)
        }
        Command::Ablate(a) => {
            a.emb.apply(&mut cfg);
            a.reg.apply(&mut cfg);
            let base = FeatureFlags {
                use_embeddings: cfg.regressor.flags.use_embeddings,
                use_mi: false,
                use_dobj: false,
                use_diag: false,
                use_interactions: a.flags.use_interactions,
            };
            let union = FeatureFlags {
                use_mi: a.flags.use_mi,
                use_dobj: a.flags.use_dobj,
                use_diag: a.flags.use_diag,
                ..base
            };
            if base.use_interactions && !base.use_embeddings {
                return Err(CliError::Validation(
                    "interaction features need the embedding features".into(),
                ));
            }
            check_regression_inputs(&cfg, &union)?;
            cfg.regressor.seed = cfg.seed;
            cfg.regression.cv.seed = cfg.seed;
            cfg.regressor.validate()?;
            echo_config(&cfg, name)?;
            ablate(&cfg, base, union)
        }
        Command::Significance(a) => {
            if let Some(r) = a.iterations {
                cfg.significance.iterations = r;
            }
            if let Some(m) = a.metric {
                cfg.significance.metric = m;
            }
            require_existing("system A file", &a.a)?;
            require_existing("system B file", &a.b)?;
            if cfg.significance.metric == SigMetric::F1 {
                match &a.gold {
                    Some(g) => require_existing("gold file", g)?,
                    None => return Err(CliError::Validation("--metric f1 needs --gold".into())),
                }
            }
            echo_config(&cfg, name)?;
            significance(&cfg, &a.a, &a.b, a.gold.as_deref())
        }
        Command::Predict(a) => {
            a.emb.apply(&mut cfg);
            set(&mut cfg.paths.checkpoint, &a.checkpoint);
            require("checkpoint", &cfg.paths.checkpoint)?;
            require("embeddings", &cfg.paths.embeddings)?;
            let verb = VerbLemma::new(&a.verb)?;
            let prep = Preposition::new(&a.prep)?;
            predict_pair(&cfg, &verb, &prep)
        }
        Command::Stats(a) => {
            set(&mut cfg.paths.judgments, &a.judgments);
            require("judgments", &cfg.paths.judgments)?;
            echo_config(&cfg, name)?;
            stats(&cfg)
        }
    }
}

fn out_path(cfg: &RunConfig, file: &str) -> PathBuf {
    cfg.output_dir.join(file)
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn echo_config(cfg: &RunConfig, command: &str) -> CliResult<()> {
    write_file(&out_path(cfg, &format!("{command}.config.json")), cfg.to_json()?)
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Validation(format!("cannot open {}: {e}", path.display())))
}

fn tsv_bytes(f: impl FnOnce(&mut Vec<u8>) -> argpp_core::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn split_path(cfg: &RunConfig, split: Split) -> PathBuf {
    cfg.dataset_dir()
        .join(format!("{}.{}.tsv", cfg.dataset.task.as_str(), split.as_str()))
}

fn load_table(cfg: &RunConfig) -> CliResult<EmbeddingTable> {
    let path = require("embeddings", &cfg.paths.embeddings)?;
    let format = cfg
        .paths
        .embedding_format
        .unwrap_or_else(|| EmbeddingFormat::from_path(path));
    let table = load_embeddings(path, format)?;
    log::info!("loaded {} vectors of width {} from {}", table.len(), table.dim(), path.display());
    Ok(table)
}

fn label_counts<T: Labeled>(items: &[T]) -> BTreeMap<ArgLabel, usize> {
    let mut m = BTreeMap::new();
    for it in items {
        *m.entry(it.label()).or_insert(0) += 1;
    }
    m
}

#[derive(Serialize)]
struct DatasetStats {
    task: DatasetTask,
    seed: u64,
    verbs: usize,
    prepositions: usize,
    pairs: usize,
    frame_total: usize,
    examples: usize,
    labels: BTreeMap<ArgLabel, usize>,
    splits: BTreeMap<&'static str, usize>,
    build: Option<BuildStats>,
}

fn gen_dataset(cfg: &RunConfig) -> CliResult<()> {
    let dir = cfg.paths.verbnet_dir.as_deref().expect("checked");
    let map = match &cfg.paths.featural_map {
        Some(p) => FeaturalPrepMap::parse(&fs::read_to_string(p)?)?,
        None => FeaturalPrepMap::default_map(),
    };
    let docs = read_verbnet_dir(dir)?;
    if docs.is_empty() {
        return Err(CliError::Validation(format!("no .xml files in {}", dir.display())));
    }
    let inventory = parse_verbnet(
        &docs,
        &map,
        VerbNetOptions {
            include_multi_class: cfg.dataset.include_multi_class,
        },
    )?;
    let verbs: Vec<VerbLemma> = inventory.verbs().cloned().collect();
    let mut preps: Vec<Preposition> = inventory.prep_universe().to_vec();
    let known: BTreeSet<Preposition> = preps.iter().cloned().collect();
    for p in &cfg.dataset.extra_preps {
        let p = Preposition::new(p)?;
        if !known.contains(&p) {
            preps.push(p);
        }
    }
    let pairs = generate_pair_dataset(&inventory, &verbs, &preps)?;
    log::info!("{} verbs × {} prepositions = {} pairs", verbs.len(), preps.len(), pairs.len());

    let task = cfg.dataset.task;
    let ratios = SplitRatios::default();
    let split_seed = derive_seed(cfg.seed, 1);
    let stem = task.as_str();
    let dd = cfg.dataset_dir();
    let mut splits = BTreeMap::new();
    let (examples, labels, build) = match task {
        DatasetTask::Binary => {
            let balanced = balance_subsample(&pairs, cfg.seed)?;
            let split = stratified_split(&balanced, ratios, split_seed)?;
            write_file(&dd.join(format!("{stem}.tsv")), tsv_bytes(|b| write_pairs_tsv(b, &balanced))?)?;
            for (name, part) in [("train", &split.train), ("dev", &split.dev), ("test", &split.test)] {
                write_file(&dd.join(format!("{stem}.{name}.tsv")), tsv_bytes(|b| write_pairs_tsv(b, part))?)?;
                splits.insert(name, part.len());
            }
            (balanced.len(), label_counts(&balanced), None)
        }
        DatasetTask::Fullsent | DatasetTask::Fullsent3 => {
            let (source, mode) = if task == DatasetTask::Fullsent {
                (balance_subsample(&pairs, cfg.seed)?, FullSentenceMode::KeepLabels)
            } else {
                (pairs.clone(), FullSentenceMode::Ternary)
            };
            let mut lines: Vec<io::Result<String>> = Vec::new();
            for p in &cfg.paths.corpus {
                lines.extend(open(p)?.lines());
            }
            let (examples, stats) =
                build_fullsentence_dataset(lines, &source, mode, &Lemmatizer::default())?;
            let split = stratified_split(&examples, ratios, split_seed)?;
            write_file(&dd.join(format!("{stem}.tsv")), tsv_bytes(|b| write_sentences_tsv(b, &examples))?)?;
            for (name, part) in [("train", &split.train), ("dev", &split.dev), ("test", &split.test)] {
                write_file(&dd.join(format!("{stem}.{name}.tsv")), tsv_bytes(|b| write_sentences_tsv(b, part))?)?;
                splits.insert(name, part.len());
            }
            (examples.len(), label_counts(&examples), Some(stats))
        }
    };
    let stats = DatasetStats {
        task,
        seed: cfg.seed,
        verbs: verbs.len(),
        prepositions: preps.len(),
        pairs: pairs.len(),
        frame_total: inventory.frame_total(),
        examples,
        labels,
        splits,
        build,
    };
    let json = to_json(&stats)?;
    write_file(&dd.join(format!("{stem}.stats.json")), &json)?;
    print!("{json}");
    Ok(())
}

fn read_split(cfg: &RunConfig, split: Split) -> CliResult<Vec<SentenceExample>> {
    let path = split_path(cfg, split);
    let r = open(&path)?;
    Ok(match cfg.dataset.task {
        DatasetTask::Binary => read_pairs_tsv(r)?
            .into_iter()
            .map(|p| SentenceExample::pair_only(p.verb, p.prep, p.label))
            .collect(),
        _ => read_sentences_tsv(r)?,
    })
}

fn to_inputs(
    examples: &[SentenceExample],
    table: &EmbeddingTable,
    oov: OovPolicy,
) -> CliResult<Vec<LabeledInput>> {
    examples
        .iter()
        .map(|ex| {
            Ok(LabeledInput {
                input: EncoderInput::from_example(ex, table, oov)?,
                label: ex.label.class_index(),
            })
        })
        .collect()
}

fn checkpoint_path(cfg: &RunConfig) -> PathBuf {
    cfg.paths
        .checkpoint
        .clone()
        .unwrap_or_else(|| out_path(cfg, "classifier.argm"))
}

fn train_cls(cfg: &RunConfig) -> CliResult<()> {
    let table = load_table(cfg)?;
    let mut config = cfg.classifier.clone();
    config.embedding = table.name().to_string();
    let train = to_inputs(&read_split(cfg, Split::Train)?, &table, cfg.oov)?;
    let dev = to_inputs(&read_split(cfg, Split::Dev)?, &table, cfg.oov)?;
    log::info!("training {} on {} examples, dev {}", config.encoder.as_str(), train.len(), dev.len());
    let (params, log) = train_classifier(&train, &dev, &config)?;
    let ck = params.to_checkpoint(&config)?;
    write_file(&checkpoint_path(cfg), ck.to_bytes())?;
    let mut jsonl = Vec::new();
    log.write_jsonl(&mut jsonl)?;
    write_file(&out_path(cfg, "train.log.jsonl"), jsonl)?;
    let summary = to_json(&log)?;
    write_file(&out_path(cfg, "train.summary.json"), &summary)?;
    println!(
        "best epoch {} dev accuracy {:.4} ({:?})",
        log.best_epoch, log.best_dev_accuracy, log.stop
    );
    Ok(())
}

fn load_checkpoint(cfg: &RunConfig) -> CliResult<(argpp_core::ClassifierConfig, ClassifierParams)> {
    let path = require("checkpoint", &cfg.paths.checkpoint)?;
    let ck = Checkpoint::read_from(open(path)?)?;
    Ok(ClassifierParams::from_checkpoint(&ck)?)
}

fn check_width(table: &EmbeddingTable, config: &argpp_core::ClassifierConfig, params: &ClassifierParams) -> CliResult<()> {
    let want = params.input_dim(config);
    if table.dim() != want {
        return Err(CliError::Validation(format!(
            "checkpoint expects {want}-d vectors, embeddings are {}-d",
            table.dim()
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct EvalOutput<'a> {
    split: &'a str,
    encoder: EncoderKind,
    report: argpp_core::ClassificationReport,
}

fn lines_of<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    let mut s = String::new();
    for x in xs {
        s.push_str(&x.to_string());
        s.push('\n');
    }
    s
}

fn evaluate(cfg: &RunConfig, split: Split) -> CliResult<()> {
    let (config, params) = load_checkpoint(cfg)?;
    if config.num_classes != cfg.dataset.task.num_classes() {
        return Err(CliError::Validation(format!(
            "checkpoint has {} classes but dataset {} has {}",
            config.num_classes,
            cfg.dataset.task.as_str(),
            cfg.dataset.task.num_classes()
        )));
    }
    let table = load_table(cfg)?;
    check_width(&table, &config, &params)?;
    let data = to_inputs(&read_split(cfg, split)?, &table, cfg.oov)?;
    let inputs: Vec<EncoderInput> = data.iter().map(|d| d.input.clone()).collect();
    let preds: Vec<usize> = predict(&config, &params, &inputs)?.into_iter().map(|(l, _)| l).collect();
    let golds: Vec<usize> = data.iter().map(|d| d.label).collect();
    let report = classification_metrics(&preds, &golds, config.num_classes, None)?;
    let s = split.as_str();
    let json = to_json(&EvalOutput {
        split: s,
        encoder: config.encoder,
        report,
    })?;
    write_file(&out_path(cfg, &format!("eval.{s}.json")), &json)?;
    write_file(
        &out_path(cfg, &format!("eval.{s}.scores")),
        lines_of(preds.iter().zip(&golds).map(|(p, g)| u8::from(p == g))),
    )?;
    write_file(&out_path(cfg, &format!("eval.{s}.pred")), lines_of(&preds))?;
    write_file(&out_path(cfg, &format!("eval.{s}.gold")), lines_of(&golds))?;
    print!("{json}");
    Ok(())
}

fn check_regression_inputs(cfg: &RunConfig, flags: &FeatureFlags) -> CliResult<()> {
    require("gradient items", &cfg.paths.items)?;
    require("judgments", &cfg.paths.judgments)?;
    if flags.use_embeddings {
        require("embeddings", &cfg.paths.embeddings)?;
    }
    if flags.use_mi {
        require("co-occurrence counts (needed by mi)", &cfg.paths.counts)?;
    }
    if flags.use_diag {
        require("diagnostics (needed by diag)", &cfg.paths.diagnostics)?;
    }
    Ok(())
}

struct RegressionData {
    examples: Vec<GradientExample>,
    table: EmbeddingTable,
    counts: Option<CooccurrenceCounts>,
    diagnostics: Option<BTreeMap<String, DiagnosticsScore>>,
}

fn load_regression(cfg: &RunConfig) -> CliResult<RegressionData> {
    let items = read_gradient_items(open(cfg.paths.items.as_deref().expect("checked"))?)?;
    let judgments = read_judgments_csv(open(cfg.paths.judgments.as_deref().expect("checked"))?)?;
    let scores: BTreeMap<String, f64> = normalize_judgments(&judgments)?.into_iter().collect();
    let mut seen = BTreeSet::new();
    let mut examples = Vec::with_capacity(items.len());
    for it in items {
        let score = *scores.get(&it.item_id).ok_or_else(|| {
            CliError::Validation(format!("item `{}` has no judgments", it.item_id))
        })?;
        seen.insert(it.item_id.clone());
        examples.push(GradientExample::new(it.item_id, it.sentence, score)?);
    }
    let unused = scores.keys().filter(|k| !seen.contains(*k)).count();
    if unused > 0 {
        log::warn!("{unused} judged items are not in the items file");
    }
    let table = match &cfg.paths.embeddings {
        Some(_) => load_table(cfg)?,
        // Without embedding features the table is never consulted.
        None => EmbeddingTable::new("none", 1)?,
    };
    let counts = match &cfg.paths.counts {
        Some(p) => Some(CooccurrenceCounts::parse(open(p)?)?),
        None => None,
    };
    let diagnostics = match &cfg.paths.diagnostics {
        Some(p) => Some(read_diagnostics_csv(open(p)?, cfg.regressor.diag_weights)?),
        None => None,
    };
    Ok(RegressionData {
        examples,
        table,
        counts,
        diagnostics,
    })
}

fn run_cv(cfg: &RunConfig, data: &RegressionData, flags: FeatureFlags) -> CliResult<CvOutcome> {
    let mut rc = cfg.regressor.clone();
    rc.flags = flags;
    let source = ItemFeatures::new(
        &data.examples,
        &data.table,
        data.counts.as_ref(),
        data.diagnostics.as_ref(),
        &rc,
    );
    let grid = cfg.regression.tune.then_some(&cfg.regression.grid);
    Ok(cross_validate(&source, cfg.regression.kind, &rc, grid, &cfg.regression.cv)?)
}

fn train_reg(cfg: &RunConfig) -> CliResult<()> {
    let data = load_regression(cfg)?;
    let outcome = run_cv(cfg, &data, cfg.regressor.flags)?;
    let json = to_json(&outcome)?;
    write_file(&out_path(cfg, "regression.json"), &json)?;
    let mut preds = outcome.predictions.clone();
    preds.sort_by_key(|&(i, _)| i);
    let mut tsv = String::from("item_id\tscore\tprediction\n");
    for (i, p) in preds {
        let ex = &data.examples[i];
        tsv.push_str(&format!("{}\t{}\t{}\n", ex.item_id, ex.score, p));
    }
    write_file(&out_path(cfg, "regression.predictions.tsv"), tsv)?;
    println!("{}", report_line(&cfg.regressor.flags.label(), &outcome.report));
    Ok(())
}

fn report_line(label: &str, r: &RegressionReport) -> String {
    format!("{label}: r={:.4} R2={:.4} R2adj={:.4} (n={}, p={})", r.pearson_r, r.r2, r.r2_adj, r.n, r.p)
}

fn ablate(cfg: &RunConfig, base: FeatureFlags, sweep: FeatureFlags) -> CliResult<()> {
    let data = load_regression(cfg)?;
    let mut subsets = standard_subsets(base, sweep);
    // With embeddings off the bare base row has no predictors at all.
    subsets.retain(|f| f.validate().is_ok());
    let mut failure = None;
    let rows = ablation_sweep(&subsets, |flags| {
        log::info!("ablation row {}", flags.label());
        match run_cv(cfg, &data, *flags) {
            Ok(o) => Ok(o.report),
            Err(e) => {
                let msg = e.to_string();
                failure = Some(e);
                Err(argpp_core::Error::NonFinite(msg))
            }
        }
    });
    let rows = match (rows, failure) {
        (Ok(r), _) => r,
        (Err(_), Some(e)) => return Err(e),
        (Err(e), None) => return Err(e.into()),
    };
    let mut table = Table::new(["features", "n", "p", "r", "R2", "R2_adj"]);
    for row in &rows {
        let r = &row.report;
        table.push([
            row.label.clone(),
            r.n.to_string(),
            r.p.to_string(),
            format!("{:.4}", r.pearson_r),
            format!("{:.4}", r.r2),
            format!("{:.4}", r.r2_adj),
        ]);
    }
    write_file(&out_path(cfg, "ablation.json"), to_json(&rows)?)?;
    write_file(&out_path(cfg, "ablation.tsv"), table.to_tsv())?;
    print!("{}", table.to_text());
    Ok(())
}

fn read_column<T: std::str::FromStr>(path: &Path) -> CliResult<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        out.push(t.parse().map_err(|e: T::Err| {
            CliError::Validation(format!("{} line {}: `{t}`: {e}", path.display(), i + 1))
        })?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct SignificanceOutput {
    metric: SigMetric,
    n: usize,
    metric_a: f64,
    metric_b: f64,
    #[serde(flatten)]
    result: argpp_core::SignificanceResult,
}

fn significance(cfg: &RunConfig, a: &Path, b: &Path, gold: Option<&Path>) -> CliResult<()> {
    let iters = cfg.significance.iterations;
    let out = match cfg.significance.metric {
        SigMetric::Acc => {
            let sa: Vec<f64> = read_column(a)?;
            let sb: Vec<f64> = read_column(b)?;
            let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len().max(1) as f64;
            let result = approx_randomization(&sa, &sb, iters, cfg.seed)?;
            SignificanceOutput {
                metric: SigMetric::Acc,
                n: sa.len(),
                metric_a: mean(&sa),
                metric_b: mean(&sb),
                result,
            }
        }
        SigMetric::F1 => {
            let la: Vec<usize> = read_column(a)?;
            let lb: Vec<usize> = read_column(b)?;
            let g: Vec<usize> = read_column(gold.expect("checked"))?;
            if la.len() != g.len() || lb.len() != g.len() {
                return Err(CliError::Validation(format!(
                    "label files have {}, {} and {} (gold) lines",
                    la.len(),
                    lb.len(),
                    g.len()
                )));
            }
            let k = la.iter().chain(&lb).chain(&g).max().map_or(2, |&m| (m + 1).max(2));
            let f1 = |items: &[(usize, usize)]| {
                let (p, g): (Vec<usize>, Vec<usize>) = items.iter().copied().unzip();
                classification_metrics(&p, &g, k, None).map_or(f64::NAN, |r| r.f1)
            };
            let ta: Vec<(usize, usize)> = la.iter().copied().zip(g.iter().copied()).collect();
            let tb: Vec<(usize, usize)> = lb.iter().copied().zip(g.iter().copied()).collect();
            let result = approx_randomization_by(&ta, &tb, iters, cfg.seed, f1)?;
            SignificanceOutput {
                metric: SigMetric::F1,
                n: ta.len(),
                metric_a: f1(&ta),
                metric_b: f1(&tb),
                result,
            }
        }
    };
    let json = to_json(&out)?;
    write_file(&out_path(cfg, "significance.json"), &json)?;
    print!("{json}");
    Ok(())
}

#[derive(Serialize)]
struct Prediction {
    verb: String,
    prep: String,
    label: ArgLabel,
    class_index: usize,
    probabilities: Vec<f64>,
}

fn predict_pair(cfg: &RunConfig, verb: &VerbLemma, prep: &Preposition) -> CliResult<()> {
    let (config, params) = load_checkpoint(cfg)?;
    let table = load_table(cfg)?;
    check_width(&table, &config, &params)?;
    let input = EncoderInput::Pair {
        verb: table.lookup(verb.as_str(), cfg.oov)?,
        prep: table.lookup(prep.as_str(), cfg.oov)?,
    };
    let (class_index, probabilities) = classify(&config, &params, &input)?;
    let out = Prediction {
        verb: verb.as_str().to_string(),
        prep: prep.as_str().to_string(),
        label: ArgLabel::from_class_index(class_index)?,
        class_index,
        probabilities,
    };
    print!("{}", to_json(&out)?);
    Ok(())
}

fn stats(cfg: &RunConfig) -> CliResult<()> {
    let path = cfg.paths.judgments.as_deref().expect("checked");
    let scores = normalize_judgments(&read_judgments_csv(open(path)?)?)?;
    let values: Vec<f64> = scores.iter().map(|(_, s)| *s).collect();
    let dist = score_distribution_stats(&values)?;
    let mut tsv = String::from("item_id\tscore\n");
    for (item, s) in &scores {
        tsv.push_str(&format!("{item}\t{s}\n"));
    }
    write_file(&out_path(cfg, "scores.tsv"), tsv)?;
    let json = to_json(&dist)?;
    write_file(&out_path(cfg, "stats.json"), &json)?;
    let mut stdout = io::stdout().lock();
    write!(stdout, "{json}")?;
    Ok(())
}
