//! Run configuration: one JSON document, overridden by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use argpp_core::embed::{EmbeddingFormat, OovPolicy};
use argpp_core::models::{CvProtocol, RegressorGrid, RegressorKind};
use argpp_core::{ClassifierConfig, RegressorConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DatasetTask {
    /// Balanced {verb, prep} pairs.
    #[default]
    Binary,
    /// Corpus sentences; unmatched pairs keep their label.
    Fullsent,
    /// Corpus sentences; unmatched pairs become UNOBSERVED.
    Fullsent3,
}

impl DatasetTask {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetTask::Binary => "binary",
            DatasetTask::Fullsent => "fullsent",
            DatasetTask::Fullsent3 => "fullsent3",
        }
    }

    pub fn num_classes(self) -> usize {
        match self {
            DatasetTask::Fullsent3 => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SigMetric {
    /// Mean of per-item scores (accuracy for 0/1 correctness files).
    #[default]
    Acc,
    /// Positive-class F1 recomputed on every shuffle; files hold labels.
    F1,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub verbnet_dir: Option<PathBuf>,
    /// Replaces the bundled feature → preposition map.
    pub featural_map: Option<PathBuf>,
    /// NLI corpus JSONL files for the full-sentence datasets.
    pub corpus: Vec<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub embedding_format: Option<EmbeddingFormat>,
    pub counts: Option<PathBuf>,
    pub diagnostics: Option<PathBuf>,
    pub judgments: Option<PathBuf>,
    /// Gradient items TSV.
    pub items: Option<PathBuf>,
    /// Directory holding generated dataset files; defaults to the output dir.
    pub dataset_dir: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetOptions {
    pub task: DatasetTask,
    pub include_multi_class: bool,
    /// Prepositions added to the universe beyond those seen in VerbNet.
    pub extra_preps: Vec<String>,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        DatasetOptions {
            task: DatasetTask::Binary,
            include_multi_class: false,
            extra_preps: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionOptions {
    pub kind: RegressorKind,
    /// Grid-search hidden units, activation and learning rate on dev.
    pub tune: bool,
    pub grid: RegressorGrid,
    pub cv: CvProtocol,
}

impl Default for RegressionOptions {
    fn default() -> Self {
        RegressionOptions {
            kind: RegressorKind::Mlp,
            tune: true,
            grid: RegressorGrid::default(),
            cv: CvProtocol::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignificanceOptions {
    pub iterations: usize,
    pub metric: SigMetric,
}

impl Default for SignificanceOptions {
    fn default() -> Self {
        SignificanceOptions {
            iterations: 1000,
            metric: SigMetric::Acc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Out-of-vocabulary handling for the classifier commands.
    pub oov: OovPolicy,
    pub paths: Paths,
    pub dataset: DatasetOptions,
    pub classifier: ClassifierConfig,
    pub regressor: RegressorConfig,
    pub regression: RegressionOptions,
    pub significance: SignificanceOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output_dir: PathBuf::from("out"),
            seed: 0,
            oov: OovPolicy::Zero,
            paths: Paths::default(),
            dataset: DatasetOptions::default(),
            classifier: ClassifierConfig::default(),
            regressor: RegressorConfig::default(),
            regression: RegressionOptions::default(),
            significance: SignificanceOptions::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("invalid config {}: {e}", path.display())))
    }

    pub fn dataset_dir(&self) -> &Path {
        self.paths.dataset_dir.as_deref().unwrap_or(&self.output_dir)
    }

    /// Effective config as pretty JSON.
    pub fn to_json(&self) -> CliResult<String> {
        Ok(argpp_core::eval::to_json(self)?)
    }
}

pub fn require<'a>(what: &str, path: &'a Option<PathBuf>) -> CliResult<&'a Path> {
    let p = path
        .as_deref()
        .ok_or_else(|| CliError::Validation(format!("no {what} path configured")))?;
    if !p.exists() {
        return Err(CliError::Validation(format!("{what} {} does not exist", p.display())));
    }
    Ok(p)
}

pub fn require_existing(what: &str, p: &Path) -> CliResult<()> {
    if p.exists() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{what} {} does not exist", p.display())))
    }
}
