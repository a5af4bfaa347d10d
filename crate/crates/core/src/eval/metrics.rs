use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum F1Kind {
    /// F1 of one designated class.
    Positive(usize),
    /// Micro-averaged over all classes.
    Micro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub n: usize,
    pub accuracy: f64,
    pub f1: f64,
    pub f1_kind: F1Kind,
    /// `confusion[gold][pred]`.
    pub confusion: Vec<Vec<usize>>,
}

/// Binary tasks (`num_classes == 2`) report F1 of `positive_class`, default
/// class 1 (ARG). Larger tasks report micro-F1 unless a positive class is
/// given.
pub fn classification_metrics(
    preds: &[usize],
    golds: &[usize],
    num_classes: usize,
    positive_class: Option<usize>,
) -> Result<ClassificationReport> {
    if preds.len() != golds.len() {
        return Err(Error::shape(format!(
            "{} predictions for {} gold labels",
            preds.len(),
            golds.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::validation("classification metrics of an empty set"));
    }
    if let Some(&bad) = preds.iter().chain(golds).find(|&&l| l >= num_classes) {
        return Err(Error::validation(format!(
            "label {bad} is out of range for {num_classes} classes"
        )));
    }
    let mut confusion = vec![vec![0usize; num_classes]; num_classes];
    for (&p, &g) in preds.iter().zip(golds) {
        confusion[g][p] += 1;
    }
    let n = preds.len();
    let hits: usize = (0..num_classes).map(|c| confusion[c][c]).sum();
    let accuracy = hits as f64 / n as f64;
    let f1_kind = match (positive_class, num_classes) {
        (Some(c), _) => F1Kind::Positive(c),
        (None, 2) => F1Kind::Positive(1),
        (None, _) => F1Kind::Micro,
    };
    let f1 = match f1_kind {
        F1Kind::Positive(c) => {
            if c >= num_classes {
                return Err(Error::validation(format!("positive class {c} is out of range")));
            }
            let tp = confusion[c][c] as f64;
            let predicted: usize = (0..num_classes).map(|g| confusion[g][c]).sum();
            let actual: usize = confusion[c].iter().sum();
            if tp == 0.0 {
                0.0
            } else {
                let precision = tp / predicted as f64;
                let recall = tp / actual as f64;
                2.0 * precision * recall / (precision + recall)
            }
        }
        // Every item is one prediction, so micro precision = recall = accuracy.
        F1Kind::Micro => accuracy,
    };
    Ok(ClassificationReport {
        n,
        accuracy,
        f1,
        f1_kind,
        confusion,
    })
}

/// Sample correlation coefficient.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::shape(format!("{} vs {} values", xs.len(), ys.len())));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::Degenerate("Pearson r needs at least two points".into()));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("Pearson r of a constant sequence".into()));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    if !r.is_finite() {
        return Err(Error::NonFinite("Pearson r is not finite".into()));
    }
    Ok(r.clamp(-1.0, 1.0))
}

const FISHER_CLAMP: f64 = 1.0 - 1e-7;

/// `tanh(mean(atanh(r)))`, clamping |r| = 1 to 1 − 1e-7.
pub fn fisher_average(rs: &[f64]) -> Result<f64> {
    if rs.is_empty() {
        return Err(Error::validation("Fisher average of no correlations"));
    }
    let mut sum = 0.0;
    for &r in rs {
        if !(r.is_finite() && r.abs() <= 1.0) {
            return Err(Error::validation(format!("{r} is not a correlation")));
        }
        let c = r.clamp(-FISHER_CLAMP, FISHER_CLAMP);
        if c != r {
            log::warn!("correlation {r} clamped for the Fisher transform");
        }
        sum += c.atanh();
    }
    Ok((sum / rs.len() as f64).tanh())
}

/// `1 − SS_res/SS_tot`.
pub fn r2_score(preds: &[f64], golds: &[f64]) -> Result<f64> {
    if preds.len() != golds.len() {
        return Err(Error::shape(format!("{} vs {} values", preds.len(), golds.len())));
    }
    let n = golds.len();
    if n < 2 {
        return Err(Error::Degenerate("R² needs at least two points".into()));
    }
    let mean = golds.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = golds.iter().map(|g| (g - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Degenerate("R² of constant gold values".into()));
    }
    let ss_res: f64 = preds.iter().zip(golds).map(|(p, g)| (g - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// `1 − (1 − r2)(n − 1)/(n − p − 1)`.
pub fn adjusted_r2(r2: f64, n: usize, p: usize) -> Result<f64> {
    if n < p + 2 {
        return Err(Error::Degenerate(format!(
            "adjusted R² needs n − p − 1 ≥ 1 (n={n}, p={p})"
        )));
    }
    Ok(1.0 - (1.0 - r2) * (n - 1) as f64 / (n - p - 1) as f64)
}

pub fn r2_scores(preds: &[f64], golds: &[f64], p: usize) -> Result<(f64, f64)> {
    let r2 = r2_score(preds, golds)?;
    Ok((r2, adjusted_r2(r2, golds.len(), p)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffle of `0..n`, cut into `k` contiguous parts; the first
/// `n mod k` parts are one larger.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::validation(format!("k-fold needs k ≥ 2, got {k}")));
    }
    if n < k {
        return Err(Error::validation(format!("{n} items cannot fill {k} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded(seed));
    let (base, extra) = (n / k, n % k);
    let mut bounds = Vec::with_capacity(k + 1);
    bounds.push(0);
    for i in 0..k {
        bounds.push(bounds[i] + base + usize::from(i < extra));
    }
    Ok((0..k)
        .map(|i| Fold {
            test: order[bounds[i]..bounds[i + 1]].to_vec(),
            train: order[..bounds[i]]
                .iter()
                .chain(&order[bounds[i + 1]..])
                .copied()
                .collect(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub n: usize,
    /// Predictor count used for adjusted R².
    pub p: usize,
    /// Fisher-averaged over folds.
    pub pearson_r: f64,
    /// On pooled out-of-fold predictions.
    pub r2: f64,
    pub r2_adj: f64,
    pub fold_rs: Vec<f64>,
    pub fold_r2: Vec<f64>,
    /// Mean of the per-fold R² values.
    pub r2_fold_mean: f64,
    /// Mean per-fold adjusted R², when every fold is large enough.
    pub r2_adj_fold_mean: Option<f64>,
}

impl RegressionReport {
    /// `folds` holds `(predictions, golds)` per test fold.
    pub fn from_folds(folds: &[(Vec<f64>, Vec<f64>)], p: usize) -> Result<Self> {
        if folds.is_empty() {
            return Err(Error::validation("no folds"));
        }
        let mut fold_rs = Vec::with_capacity(folds.len());
        let mut fold_r2 = Vec::with_capacity(folds.len());
        let mut adj = Some(0.0);
        let (mut all_p, mut all_g) = (Vec::new(), Vec::new());
        for (pred, gold) in folds {
            fold_rs.push(pearson_r(pred, gold)?);
            let r2 = r2_score(pred, gold)?;
            fold_r2.push(r2);
            adj = match (adj, adjusted_r2(r2, gold.len(), p)) {
                (Some(s), Ok(a)) => Some(s + a),
                _ => None,
            };
            all_p.extend_from_slice(pred);
            all_g.extend_from_slice(gold);
        }
        let k = folds.len() as f64;
        let (r2, r2_adj) = r2_scores(&all_p, &all_g, p)?;
        Ok(RegressionReport {
            n: all_g.len(),
            p,
            pearson_r: fisher_average(&fold_rs)?,
            r2,
            r2_adj,
            r2_fold_mean: fold_r2.iter().sum::<f64>() / k,
            r2_adj_fold_mean: adj.map(|s| s / k),
            fold_rs,
            fold_r2,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionStats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub n_positive: usize,
    pub n_negative: usize,
    /// `(n_pos − m/2)/√(m/4)` over the m non-zero scores.
    pub positive_share_z: f64,
}

pub fn score_distribution_stats(scores: &[f64]) -> Result<DistributionStats> {
    let n = scores.len();
    if n < 2 {
        return Err(Error::validation("score statistics need at least two scores"));
    }
    let mean = scores.iter().sum::<f64>() / n as f64;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let n_positive = scores.iter().filter(|&&s| s > 0.0).count();
    let n_negative = scores.iter().filter(|&&s| s < 0.0).count();
    let m = (n_positive + n_negative) as f64;
    let positive_share_z = if m == 0.0 {
        0.0
    } else {
        (n_positive as f64 - m / 2.0) / (m / 4.0).sqrt()
    };
    Ok(DistributionStats {
        n,
        mean,
        sd: var.sqrt(),
        n_positive,
        n_negative,
        positive_share_z,
    })
}
