//! Stateless forward/backward kernels for the closed set of layers used by
//! the classifier and the regressor.

use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};

/// `x·W + b` with the bias broadcast across rows.
pub fn affine_forward(x: &Matrix, w: &Matrix, b: &Matrix) -> Result<Matrix> {
    if x.cols() != w.rows() {
        return Err(Error::shape(format!(
            "affine input has {} columns but weight has {} rows",
            x.cols(),
            w.rows()
        )));
    }
    if b.shape() != (1, w.cols()) {
        return Err(Error::shape(format!(
            "affine bias is {}x{}, expected 1x{}",
            b.rows(),
            b.cols(),
            w.cols()
        )));
    }
    let mut out = x.matmul(w);
    out.add_row_broadcast(b);
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct AffineGrads {
    pub dx: Matrix,
    pub dw: Matrix,
    pub db: Matrix,
}

pub fn affine_backward(x: &Matrix, w: &Matrix, upstream: &Matrix) -> Result<AffineGrads> {
    if upstream.rows() != x.rows() || upstream.cols() != w.cols() || x.cols() != w.rows() {
        return Err(Error::shape(format!(
            "affine backward: x {:?}, w {:?}, upstream {:?}",
            x.shape(),
            w.shape(),
            upstream.shape()
        )));
    }
    Ok(AffineGrads {
        dx: upstream.matmul_t(w),
        dw: x.t_matmul(upstream),
        db: upstream.sum_rows(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
    Sigmoid,
}

impl Activation {
    pub const ALL: [Activation; 3] = [Activation::Relu, Activation::Tanh, Activation::Sigmoid];

    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Tanh => v.tanh(),
            Activation::Relu => v.max(0.0),
            Activation::Sigmoid => sigmoid(v),
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            // y > 0 iff x > 0; the subgradient at 0 is 0.
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
        }
    }

    pub fn forward(self, x: &Matrix) -> Matrix {
        x.map(|v| self.apply(v))
    }

    /// Gradient with respect to the input, given the stored forward output.
    pub fn backward(self, output: &Matrix, upstream: &Matrix) -> Result<Matrix> {
        if output.shape() != upstream.shape() {
            return Err(Error::shape("activation backward shape mismatch"));
        }
        Ok(output.zip_map(upstream, |y, g| g * self.derivative_from_output(y)))
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(Error::validation(format!("unknown activation `{other}`"))),
        }
    }
}

#[inline]
pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Mean softmax cross-entropy and its gradient with respect to the logits.
pub fn softmax_xent(logits: &Matrix, labels: &[usize]) -> Result<(f64, Matrix)> {
    let (n, c) = logits.shape();
    if labels.len() != n {
        return Err(Error::shape(format!(
            "{} labels for {n} rows of logits",
            labels.len()
        )));
    }
    if n == 0 {
        return Err(Error::shape("softmax_xent on an empty batch"));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= c) {
        return Err(Error::validation(format!(
            "label {bad} is out of range for {c} classes"
        )));
    }
    let mut grad = Matrix::zeros(n, c);
    let mut total = 0.0;
    for (r, &label) in labels.iter().enumerate() {
        let row = logits.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|v| (v - max).exp()).sum();
        let log_z = max + sum.ln();
        total += (max - row[label]) + sum.ln();
        let g = grad.row_mut(r);
        for (j, gv) in g.iter_mut().enumerate() {
            *gv = (row[j] - log_z).exp();
        }
        g[label] -= 1.0;
    }
    let inv_n = 1.0 / n as f64;
    grad.scale(inv_n);
    Ok((total * inv_n, grad))
}

/// Mean smooth-L1 loss and its gradient with respect to `pred`.
pub fn smooth_l1(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != target.len() {
        return Err(Error::shape(format!(
            "smooth_l1: {} predictions vs {} targets",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::shape("smooth_l1 on empty input"));
    }
    let inv_n = 1.0 / pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let r = p - t;
            loss += if r.abs() < 1.0 {
                0.5 * r * r
            } else {
                r.abs() - 0.5
            };
            r.clamp(-1.0, 1.0) * inv_n
        })
        .collect();
    Ok((loss * inv_n, grad))
}

/// Column-wise maximum over time plus the winning row per column.
/// Ties go to the earliest row.
pub fn max_pool_time(states: &Matrix) -> Result<(Matrix, Vec<usize>)> {
    let (t, k) = states.shape();
    if t == 0 {
        return Err(Error::shape("max_pool_time needs at least one timestep"));
    }
    let mut pooled = states.row_matrix(0);
    let mut argmax = vec![0usize; k];
    for r in 1..t {
        for (c, &v) in states.row(r).iter().enumerate() {
            if v > pooled[(0, c)] {
                pooled[(0, c)] = v;
                argmax[c] = r;
            }
        }
    }
    Ok((pooled, argmax))
}

pub fn max_pool_time_backward(argmax: &[usize], timesteps: usize, upstream: &Matrix) -> Result<Matrix> {
    if upstream.shape() != (1, argmax.len()) {
        return Err(Error::shape("max-pool backward width mismatch"));
    }
    let mut out = Matrix::zeros(timesteps, argmax.len());
    for (c, &r) in argmax.iter().enumerate() {
        out[(r, c)] = upstream[(0, c)];
    }
    Ok(out)
}
