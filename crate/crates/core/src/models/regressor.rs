//! MLP regressor `n → m → 1` trained with smooth L1 loss.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::classifier::StopReason;
use super::features::{FeatureFlags, FeatureVector, PcaMode};
use crate::embed::OovPolicy;
use crate::error::{Error, Result};
use crate::eval::pearson_r;
use crate::nn::{
    adadelta_step, affine_backward, affine_forward, smooth_l1, Activation, Matrix,
    OptimizerConfig, Parameter,
};
use crate::rng::{derive_seed, derived};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegressorConfig {
    pub flags: FeatureFlags,
    pub pca_k: usize,
    pub pca_mode: PcaMode,
    pub hidden_units: usize,
    pub activation: Activation,
    pub optimizer: OptimizerConfig,
    /// One update per epoch over the whole training set.
    pub full_batch: bool,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub oov: OovPolicy,
    pub diag_weights: (f64, f64),
    /// z-score features with training-set statistics before the first layer.
    pub standardize: bool,
}

impl Default for RegressorConfig {
    fn default() -> Self {
        RegressorConfig {
            flags: FeatureFlags::default(),
            pca_k: 5,
            pca_mode: PcaMode::Shared,
            hidden_units: 32,
            activation: Activation::Tanh,
            optimizer: OptimizerConfig::default(),
            full_batch: false,
            max_epochs: 100,
            patience: 10,
            seed: 0,
            oov: OovPolicy::Error,
            diag_weights: (0.5, 0.5),
            standardize: true,
        }
    }
}

impl RegressorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pca_k == 0 || self.hidden_units == 0 || self.patience == 0 {
            return Err(Error::validation("pca_k, hidden_units and patience must be positive"));
        }
        self.flags.validate()?;
        self.optimizer.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressorParams {
    pub activation: Activation,
    pub w1: Parameter,
    pub b1: Parameter,
    pub w2: Parameter,
    pub b2: Parameter,
    pub feature_mean: Vec<f64>,
    pub feature_scale: Vec<f64>,
}

impl RegressorParams {
    fn parameters_mut(&mut self) -> [&mut Parameter; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn input_dim(&self) -> usize {
        self.w1.value.rows()
    }

    fn inputs(&self, xs: &[&FeatureVector]) -> Result<Matrix> {
        let n = self.input_dim();
        let mut m = Matrix::zeros(xs.len(), n);
        for (r, x) in xs.iter().enumerate() {
            if x.len() != n {
                return Err(Error::shape(format!(
                    "feature vector has {} values, the regressor expects {n}",
                    x.len()
                )));
            }
            for (c, (dst, v)) in m.row_mut(r).iter_mut().zip(&x.values).enumerate() {
                *dst = (v - self.feature_mean[c]) / self.feature_scale[c];
            }
        }
        Ok(m)
    }

    fn forward(&self, x: &Matrix) -> Result<(Matrix, Matrix)> {
        let hidden = self
            .activation
            .forward(&affine_forward(x, &self.w1.value, &self.b1.value)?);
        let out = affine_forward(&hidden, &self.w2.value, &self.b2.value)?;
        Ok((hidden, out))
    }
}

pub fn predict_score(params: &RegressorParams, x: &FeatureVector) -> Result<f64> {
    Ok(predict_scores(params, std::slice::from_ref(x))?[0])
}

pub fn predict_scores(params: &RegressorParams, xs: &[FeatureVector]) -> Result<Vec<f64>> {
    let refs: Vec<&FeatureVector> = xs.iter().collect();
    let (_, out) = params.forward(&params.inputs(&refs)?)?;
    Ok(out.into_vec())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorEpoch {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_metric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorLog {
    pub best_epoch: usize,
    /// Dev Pearson r, or negative dev loss when dev targets are constant.
    pub best_dev_metric: f64,
    pub stop: StopReason,
    pub epochs: Vec<RegressorEpoch>,
}

fn check_schema(xs: &[FeatureVector]) -> Result<()> {
    let first = &xs[0];
    for x in xs {
        if x.schema != first.schema || x.len() != first.len() {
            return Err(Error::validation("feature vectors do not share one schema"));
        }
    }
    Ok(())
}

fn dev_metric(params: &RegressorParams, x: &Matrix, y: &[f64], constant_y: bool) -> Result<f64> {
    let (_, out) = params.forward(x)?;
    let pred = out.as_slice();
    if constant_y {
        return Ok(-smooth_l1(pred, y)?.0);
    }
    Ok(pearson_r(pred, y).unwrap_or(f64::NEG_INFINITY))
}

/// Trains one MLP, selecting the epoch with the best dev metric.
pub fn train_regressor(
    train_x: &[FeatureVector],
    train_y: &[f64],
    dev_x: &[FeatureVector],
    dev_y: &[f64],
    config: &RegressorConfig,
) -> Result<(RegressorParams, RegressorLog)> {
    config.validate()?;
    if train_x.is_empty() || dev_x.is_empty() {
        return Err(Error::validation("training and dev sets must be non-empty"));
    }
    if train_x.len() != train_y.len() || dev_x.len() != dev_y.len() {
        return Err(Error::shape("feature and target counts differ"));
    }
    check_schema(train_x)?;
    if train_y.iter().chain(dev_y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("regression targets must be finite".into()));
    }
    let n = train_x[0].len();
    let (mut mean, mut scale) = (vec![0.0; n], vec![1.0; n]);
    if config.standardize {
        let rows = train_x.len() as f64;
        for c in 0..n {
            let m = train_x.iter().map(|x| x.values[c]).sum::<f64>() / rows;
            let var = train_x.iter().map(|x| (x.values[c] - m).powi(2)).sum::<f64>() / rows;
            mean[c] = m;
            scale[c] = if var > 1e-24 { var.sqrt() } else { 1.0 };
        }
    }
    let mut rng = derived(config.seed, 0);
    let m = config.hidden_units;
    let mut params = RegressorParams {
        activation: config.activation,
        w1: Parameter::glorot("w1", n, m, &mut rng),
        b1: Parameter::zeros("b1", 1, m),
        w2: Parameter::glorot("w2", m, 1, &mut rng),
        b2: Parameter::zeros("b2", 1, 1),
        feature_mean: mean,
        feature_scale: scale,
    };
    let x = params.inputs(&train_x.iter().collect::<Vec<_>>())?;
    let dx = params.inputs(&dev_x.iter().collect::<Vec<_>>())?;
    let constant_dev = dev_y.iter().all(|&v| v == dev_y[0]);
    let mut log = RegressorLog {
        best_epoch: 0,
        best_dev_metric: dev_metric(&params, &dx, dev_y, constant_dev)?,
        stop: StopReason::MaxEpochs,
        epochs: Vec::new(),
    };
    let mut best = params.clone();
    let mut stale = 0;
    let batch_size = if config.full_batch {
        train_x.len()
    } else {
        config.optimizer.batch_size
    };
    let mut order: Vec<usize> = (0..train_x.len()).collect();
    'epochs: for epoch in 1..=config.max_epochs {
        order.sort_unstable();
        order.shuffle(&mut derived(config.seed, epoch as u64));
        let mut loss_sum = 0.0;
        for batch in order.chunks(batch_size) {
            let mut xb = Matrix::zeros(batch.len(), n);
            for (r, &i) in batch.iter().enumerate() {
                xb.row_mut(r).copy_from_slice(x.row(i));
            }
            let yb: Vec<f64> = batch.iter().map(|&i| train_y[i]).collect();
            let (hidden, out) = params.forward(&xb)?;
            let (loss, grad) = smooth_l1(out.as_slice(), &yb)?;
            if !loss.is_finite() {
                log.stop = StopReason::NonFinite(format!("loss {loss} in epoch {epoch}"));
                break 'epochs;
            }
            loss_sum += loss * batch.len() as f64;
            let d_out = Matrix::from_vec(batch.len(), 1, grad)?;
            let g2 = affine_backward(&hidden, &params.w2.value, &d_out)?;
            let d_act = params.activation.backward(&hidden, &g2.dx)?;
            let g1 = affine_backward(&xb, &params.w1.value, &d_act)?;
            params.w2.accumulate(&g2.dw);
            params.b2.accumulate(&g2.db);
            params.w1.accumulate(&g1.dw);
            params.b1.accumulate(&g1.db);
            if let Err(e) = adadelta_step(&mut params.parameters_mut(), &config.optimizer) {
                log.stop = StopReason::NonFinite(e.to_string());
                break 'epochs;
            }
        }
        let metric = dev_metric(&params, &dx, dev_y, constant_dev)?;
        log.epochs.push(RegressorEpoch {
            epoch,
            train_loss: loss_sum / train_x.len() as f64,
            dev_metric: metric,
        });
        if metric > log.best_dev_metric {
            log.best_dev_metric = metric;
            log.best_epoch = epoch;
            best = params.clone();
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                log.stop = StopReason::Patience;
                break;
            }
        }
    }
    for p in best.parameters_mut() {
        p.zero_grad();
        p.accum_sq_grad.fill(0.0);
        p.accum_sq_update.fill(0.0);
    }
    Ok((best, log))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegressorGrid {
    pub hidden_units: Vec<usize>,
    pub activations: Vec<Activation>,
    /// Multipliers on the Adadelta step.
    pub learning_rates: Vec<f64>,
}

impl Default for RegressorGrid {
    fn default() -> Self {
        RegressorGrid {
            hidden_units: vec![8, 16, 32, 64],
            activations: Activation::ALL.to_vec(),
            learning_rates: vec![1.0, 5.0, 20.0],
        }
    }
}

impl RegressorGrid {
    /// Grid points in a fixed order with seeds derived from `base.seed`.
    pub fn configs(&self, base: &RegressorConfig) -> Vec<RegressorConfig> {
        let mut out = Vec::new();
        for &m in &self.hidden_units {
            for &activation in &self.activations {
                for &lr in &self.learning_rates {
                    let mut c = base.clone();
                    c.hidden_units = m;
                    c.activation = activation;
                    c.optimizer.learning_rate = lr;
                    c.seed = derive_seed(base.seed, out.len() as u64);
                    out.push(c);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridTrial {
    pub hidden_units: usize,
    pub activation: Activation,
    pub learning_rate: f64,
    pub dev_metric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    pub best: RegressorConfig,
    pub best_dev_metric: f64,
    pub trials: Vec<GridTrial>,
}

/// Picks the grid point with the best dev metric; earlier points win ties.
pub fn grid_search(
    train_x: &[FeatureVector],
    train_y: &[f64],
    dev_x: &[FeatureVector],
    dev_y: &[f64],
    base: &RegressorConfig,
    grid: &RegressorGrid,
) -> Result<GridOutcome> {
    let configs = grid.configs(base);
    if configs.is_empty() {
        return Err(Error::validation("empty hyperparameter grid"));
    }
    let mut trials = Vec::with_capacity(configs.len());
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in configs.iter().enumerate() {
        let (_, log) = train_regressor(train_x, train_y, dev_x, dev_y, c)?;
        trials.push(GridTrial {
            hidden_units: c.hidden_units,
            activation: c.activation,
            learning_rate: c.optimizer.learning_rate,
            dev_metric: log.best_dev_metric,
        });
        if best.is_none_or(|(_, m)| log.best_dev_metric > m) {
            best = Some((i, log.best_dev_metric));
        }
    }
    let (i, metric) = best.expect("non-empty grid");
    Ok(GridOutcome {
        best: configs[i].clone(),
        best_dev_metric: metric,
        trials,
    })
}
