//! Ordinary least squares baseline.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{dot, Matrix};

/// Ridge jitter added to the normal equations.
pub const RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + dot(&self.weights, x)
    }
}

/// Solves `(XcᵀXc + λI) w = Xcᵀyc` on centered data; the intercept restores
/// the means.
pub fn train_linear(features: &Matrix, targets: &[f64]) -> Result<LinearModel> {
    let (n, p) = features.shape();
    if targets.len() != n {
        return Err(Error::shape(format!("{n} feature rows for {} targets", targets.len())));
    }
    if n <= p {
        return Err(Error::validation(format!(
            "least squares needs more rows than predictors ({n} ≤ {p})"
        )));
    }
    if !features.is_finite() || targets.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("least-squares input is not finite".into()));
    }
    let x_mean: Vec<f64> = features
        .sum_rows()
        .as_slice()
        .iter()
        .map(|s| s / n as f64)
        .collect();
    let y_mean = targets.iter().sum::<f64>() / n as f64;
    let xc = DMatrix::from_fn(n, p, |r, c| features[(r, c)] - x_mean[c]);
    let yc = DVector::from_iterator(n, targets.iter().map(|y| y - y_mean));
    let mut a = xc.transpose() * &xc;
    for i in 0..p {
        a[(i, i)] += RIDGE;
    }
    let b = xc.transpose() * yc;
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::Degenerate("normal equations are singular".into()))?;
    let w = chol.solve(&b);
    let weights: Vec<f64> = w.iter().copied().collect();
    if weights.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("normal equations are singular".into()));
    }
    let intercept = y_mean - dot(&weights, &x_mean);
    Ok(LinearModel { weights, intercept })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_fit() {
        let x = Matrix::from_rows(&[[0.0], [2.0]]).unwrap();
        let m = train_linear(&x, &[1.0, 3.0]).unwrap();
        assert!((m.weights[0] - 1.0).abs() < 1e-8);
        assert!((m.intercept - 1.0).abs() < 1e-8);
    }

    #[test]
    fn exact_linear_data_has_zero_residuals() {
        let rows: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, ((i * i) % 7) as f64]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = rows.iter().map(|r| 2.0 - 3.0 * r[0] + 0.5 * r[1]).collect();
        let m = train_linear(&x, &y).unwrap();
        for (r, t) in rows.iter().zip(&y) {
            assert!((m.predict(r) - t).abs() < 1e-8);
        }
    }

    #[test]
    fn orthogonal_targets() {
        let x = Matrix::from_rows(&[[1.0], [-1.0], [1.0], [-1.0]]).unwrap();
        let y = [5.0, 5.0, 3.0, 3.0];
        let m = train_linear(&x, &y).unwrap();
        assert!(m.weights[0].abs() < 1e-12);
        assert!((m.intercept - 4.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_rows() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert!(train_linear(&x, &[1.0, 2.0]).is_err());
    }
}
