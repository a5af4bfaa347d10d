//! Cross-validated evaluation of the regressors: a held-out dev portion for
//! tuning and early stopping, k-fold CV on the rest.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::features::{
    build_feature_vector, CooccurrenceCounts, DiagnosticsScore, FeatureResources, FeatureVector,
    RolePca,
};
use super::linear::train_linear;
use super::regressor::{grid_search, predict_scores, train_regressor, GridOutcome, RegressorConfig, RegressorGrid};
use crate::corpus::GradientExample;
use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::eval::{kfold, RegressionReport};
use crate::nn::Matrix;
use crate::rng::{derive_seed, derived};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressorKind {
    Mlp,
    Linear,
}

impl fmt::Display for RegressorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegressorKind::Mlp => "mlp",
            RegressorKind::Linear => "linear",
        })
    }
}

impl FromStr for RegressorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mlp" => Ok(RegressorKind::Mlp),
            "linear" | "ols" => Ok(RegressorKind::Linear),
            other => Err(Error::validation(format!("unknown regressor `{other}`"))),
        }
    }
}

/// Supplies feature vectors for item subsets. Transforms with fitted state
/// (PCA) are estimated on `fit_on` only.
pub trait FeatureSource {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn targets(&self) -> &[f64];

    fn feature_count(&self) -> usize;

    fn features(&self, fit_on: &[usize], sets: &[&[usize]]) -> Result<Vec<Vec<FeatureVector>>>;
}

/// Fixed feature vectors.
#[derive(Debug, Clone)]
pub struct PrecomputedFeatures {
    pub xs: Vec<FeatureVector>,
    pub ys: Vec<f64>,
}

impl FeatureSource for PrecomputedFeatures {
    fn len(&self) -> usize {
        self.xs.len()
    }

    fn targets(&self) -> &[f64] {
        &self.ys
    }

    fn feature_count(&self) -> usize {
        self.xs.first().map_or(0, FeatureVector::len)
    }

    fn features(&self, _fit_on: &[usize], sets: &[&[usize]]) -> Result<Vec<Vec<FeatureVector>>> {
        Ok(sets
            .iter()
            .map(|s| s.iter().map(|&i| self.xs[i].clone()).collect())
            .collect())
    }
}

/// Gradient items turned into features with a PCA fitted per training set.
pub struct ItemFeatures<'a> {
    pub examples: &'a [GradientExample],
    pub targets: Vec<f64>,
    pub table: &'a EmbeddingTable,
    pub counts: Option<&'a CooccurrenceCounts>,
    pub diagnostics: Option<&'a BTreeMap<String, DiagnosticsScore>>,
    pub config: RegressorConfig,
}

impl<'a> ItemFeatures<'a> {
    pub fn new(
        examples: &'a [GradientExample],
        table: &'a EmbeddingTable,
        counts: Option<&'a CooccurrenceCounts>,
        diagnostics: Option<&'a BTreeMap<String, DiagnosticsScore>>,
        config: &RegressorConfig,
    ) -> Self {
        ItemFeatures {
            examples,
            targets: examples.iter().map(|e| e.score).collect(),
            table,
            counts,
            diagnostics,
            config: config.clone(),
        }
    }
}

impl FeatureSource for ItemFeatures<'_> {
    fn len(&self) -> usize {
        self.examples.len()
    }

    fn targets(&self) -> &[f64] {
        &self.targets
    }

    fn feature_count(&self) -> usize {
        self.config.flags.feature_count(self.config.pca_k)
    }

    fn features(&self, fit_on: &[usize], sets: &[&[usize]]) -> Result<Vec<Vec<FeatureVector>>> {
        let c = &self.config;
        let pca = RolePca::fit(
            fit_on.iter().map(|&i| &self.examples[i]),
            self.table,
            c.oov,
            c.pca_k,
            c.pca_mode,
        )?;
        let res = FeatureResources {
            table: self.table,
            pca: &pca,
            counts: self.counts,
            oov: c.oov,
        };
        sets.iter()
            .map(|s| {
                s.iter()
                    .map(|&i| {
                        let ex = &self.examples[i];
                        let diag = self.diagnostics.and_then(|d| d.get(&ex.item_id));
                        build_feature_vector(ex, &res, diag, &c.flags)
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvProtocol {
    pub folds: usize,
    /// Share of items held out for tuning and early stopping.
    pub dev_fraction: f64,
    pub seed: u64,
}

impl Default for CvProtocol {
    fn default() -> Self {
        CvProtocol {
            folds: 10,
            dev_fraction: 0.15,
            seed: 0,
        }
    }
}

impl CvProtocol {
    /// Item indices `(dev, pool)`; dev has `n − floor(n·(1 − dev_fraction))`.
    pub fn partition(&self, n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        if !(self.dev_fraction > 0.0 && self.dev_fraction < 1.0) {
            return Err(Error::validation("dev_fraction must be in (0, 1)"));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut derived(self.seed, 0));
        let pool_n = (n as f64 * (1.0 - self.dev_fraction) + 1e-9).floor() as usize;
        let dev = order[..n - pool_n].to_vec();
        let pool = order[n - pool_n..].to_vec();
        if dev.is_empty() || pool.len() < self.folds {
            return Err(Error::validation(format!(
                "{n} items are too few for a dev portion and {} folds",
                self.folds
            )));
        }
        Ok((dev, pool))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub kind: RegressorKind,
    pub config: RegressorConfig,
    pub grid: Option<GridOutcome>,
    pub report: RegressionReport,
    pub dev_items: Vec<usize>,
    /// Out-of-fold `(item index, prediction)` in fold order.
    pub predictions: Vec<(usize, f64)>,
}

fn matrix_of(xs: &[FeatureVector]) -> Result<Matrix> {
    Matrix::from_rows(&xs.iter().map(|x| x.values.as_slice()).collect::<Vec<_>>())
}

fn pick(ys: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| ys[i]).collect()
}

pub fn cross_validate(
    source: &dyn FeatureSource,
    kind: RegressorKind,
    config: &RegressorConfig,
    grid: Option<&RegressorGrid>,
    protocol: &CvProtocol,
) -> Result<CvOutcome> {
    config.validate()?;
    let ys = source.targets();
    let (dev, pool) = protocol.partition(source.len())?;
    let dev_y = pick(ys, &dev);

    let mut chosen = config.clone();
    let mut grid_outcome = None;
    if let (RegressorKind::Mlp, Some(grid)) = (kind, grid) {
        let sets = source.features(&pool, &[&pool, &dev])?;
        let outcome = grid_search(&sets[0], &pick(ys, &pool), &sets[1], &dev_y, config, grid)?;
        log::info!(
            "grid search: m={} {:?} lr={} dev r={:.4}",
            outcome.best.hidden_units,
            outcome.best.activation,
            outcome.best.optimizer.learning_rate,
            outcome.best_dev_metric
        );
        chosen = outcome.best.clone();
        grid_outcome = Some(outcome);
    }

    let folds = kfold(pool.len(), protocol.folds, derive_seed(protocol.seed, 1))?;
    let mut fold_results = Vec::with_capacity(folds.len());
    let mut predictions = Vec::new();
    for (f, fold) in folds.iter().enumerate() {
        let train: Vec<usize> = fold.train.iter().map(|&i| pool[i]).collect();
        let test: Vec<usize> = fold.test.iter().map(|&i| pool[i]).collect();
        let sets = source.features(&train, &[&train, &test, &dev])?;
        let train_y = pick(ys, &train);
        let preds = match kind {
            RegressorKind::Mlp => {
                let mut c = chosen.clone();
                c.seed = derive_seed(chosen.seed, f as u64);
                let (params, _) = train_regressor(&sets[0], &train_y, &sets[2], &dev_y, &c)?;
                predict_scores(&params, &sets[1])?
            }
            RegressorKind::Linear => {
                let model = train_linear(&matrix_of(&sets[0])?, &train_y)?;
                sets[1].iter().map(|x| model.predict(&x.values)).collect()
            }
        };
        predictions.extend(test.iter().copied().zip(preds.iter().copied()));
        fold_results.push((preds, pick(ys, &test)));
    }
    let report = RegressionReport::from_folds(&fold_results, source.feature_count())?;
    Ok(CvOutcome {
        kind,
        config: chosen,
        grid: grid_outcome,
        report,
        dev_items: dev,
        predictions,
    })
}
