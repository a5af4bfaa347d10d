use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// A trainable weight matrix with its gradient buffer and Adadelta state.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub value: Matrix,
    pub grad: Matrix,
    /// Running average of squared gradients, E[g²].
    pub accum_sq_grad: Matrix,
    /// Running average of squared updates, E[Δx²].
    pub accum_sq_update: Matrix,
}

impl Parameter {
    pub fn new(name: impl Into<String>, value: Matrix) -> Self {
        let (r, c) = value.shape();
        Parameter {
            name: name.into(),
            value,
            grad: Matrix::zeros(r, c),
            accum_sq_grad: Matrix::zeros(r, c),
            accum_sq_update: Matrix::zeros(r, c),
        }
    }

    pub fn zeros(name: impl Into<String>, rows: usize, cols: usize) -> Self {
        Parameter::new(name, Matrix::zeros(rows, cols))
    }

    /// Glorot-uniform initialization.
    pub fn glorot(name: impl Into<String>, fan_in: usize, fan_out: usize, rng: &mut Rng) -> Self {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let data = (0..fan_in * fan_out)
            .map(|_| rng.random_range(-limit..=limit))
            .collect();
        Parameter::new(name, Matrix::from_vec(fan_in, fan_out, data).expect("shape"))
    }

    pub fn shape(&self) -> (usize, usize) {
        self.value.shape()
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }

    pub fn accumulate(&mut self, g: &Matrix) {
        self.grad.add_assign(g);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub rho: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    /// Multiplier on the Adadelta update (1.0 is the plain method).
    pub learning_rate: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            rho: 0.95,
            epsilon: 1e-6,
            batch_size: 32,
            learning_rate: 1.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::validation(format!("rho {} is outside (0,1)", self.rho)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::validation("epsilon must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::validation("batch_size must be positive"));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::validation("learning_rate must be positive"));
        }
        Ok(())
    }
}

fn check_grads<'a>(params: impl IntoIterator<Item = &'a Parameter>) -> Result<()> {
    for p in params {
        if let Some(pos) = p.grad.as_slice().iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!(
                "gradient of `{}` is {} at flat index {pos}",
                p.name,
                p.grad.as_slice()[pos]
            )));
        }
    }
    Ok(())
}

/// One Adadelta update over every parameter, then zeroes the gradients.
///
/// ```text
/// E[g²]  ← ρ·E[g²] + (1−ρ)·g²
/// Δ      ← −sqrt(E[Δx²] + ε) / sqrt(E[g²] + ε) · g
/// E[Δx²] ← ρ·E[Δx²] + (1−ρ)·Δ²
/// x      ← x + lr·Δ
/// ```
///
/// Gradients are checked for finiteness before anything is modified.
pub fn adadelta_step(params: &mut [&mut Parameter], config: &OptimizerConfig) -> Result<()> {
    check_grads(params.iter().map(|p| &**p))?;
    let rho = config.rho;
    let eps = config.epsilon;
    let lr = config.learning_rate;
    for p in params.iter_mut() {
        let Parameter {
            value,
            grad,
            accum_sq_grad,
            accum_sq_update,
            ..
        } = &mut **p;
        for (((x, g), eg), ed) in value
            .as_mut_slice()
            .iter_mut()
            .zip(grad.as_mut_slice().iter_mut())
            .zip(accum_sq_grad.as_mut_slice().iter_mut())
            .zip(accum_sq_update.as_mut_slice().iter_mut())
        {
            // Zero gradient entries leave value and state untouched.
            if *g == 0.0 {
                continue;
            }
            *eg = rho * *eg + (1.0 - rho) * *g * *g;
            let delta = -((*ed + eps).sqrt() / (*eg + eps).sqrt()) * *g;
            *ed = rho * *ed + (1.0 - rho) * delta * delta;
            *x += lr * delta;
            *g = 0.0;
        }
    }
    Ok(())
}

/// Plain gradient descent, then zeroes the gradients.
pub fn sgd_step(params: &mut [&mut Parameter], learning_rate: f64) -> Result<()> {
    check_grads(params.iter().map(|p| &**p))?;
    for p in params.iter_mut() {
        let Parameter { value, grad, .. } = &mut **p;
        for (x, g) in value.as_mut_slice().iter_mut().zip(grad.as_mut_slice().iter_mut()) {
            *x -= learning_rate * *g;
            *g = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = OptimizerConfig::default();
        assert_eq!((c.rho, c.epsilon, c.batch_size), (0.95, 1e-6, 32));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn zero_gradient_is_noop() {
        let mut p = Parameter::new("w", Matrix::filled(2, 2, 0.3));
        let before = p.clone();
        adadelta_step(&mut [&mut p], &OptimizerConfig::default()).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn zero_gradient_with_warm_state_is_noop() {
        let mut p = Parameter::new("w", Matrix::filled(1, 1, 0.3));
        p.grad.fill(1.0);
        adadelta_step(&mut [&mut p], &OptimizerConfig::default()).unwrap();
        let before = p.clone();
        adadelta_step(&mut [&mut p], &OptimizerConfig::default()).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn first_step_magnitude() {
        let mut p = Parameter::zeros("w", 1, 1);
        p.grad.fill(1.0);
        adadelta_step(&mut [&mut p], &OptimizerConfig::default()).unwrap();
        let expected = -(1e-6f64).sqrt() / (0.05f64 + 1e-6).sqrt();
        assert!((p.value[(0, 0)] - expected).abs() < 1e-15);
        assert!((p.value[(0, 0)] + 0.0044721).abs() < 1e-7);
        assert_eq!(p.grad[(0, 0)], 0.0);
        assert!(p.accum_sq_grad[(0, 0)] > 0.0 && p.accum_sq_update[(0, 0)] > 0.0);
    }

    #[test]
    fn non_finite_gradient_aborts_without_update() {
        let mut a = Parameter::zeros("a", 1, 1);
        let mut b = Parameter::zeros("b", 1, 2);
        a.grad.fill(1.0);
        b.grad[(0, 1)] = f64::NAN;
        let err = adadelta_step(&mut [&mut a, &mut b], &OptimizerConfig::default()).unwrap_err();
        assert!(err.to_string().contains("`b`"));
        assert_eq!(a.value[(0, 0)], 0.0);
    }

    #[test]
    fn sgd_moves_against_gradient() {
        let mut p = Parameter::zeros("w", 1, 2);
        p.grad = Matrix::row_vector(&[1.0, -2.0]);
        sgd_step(&mut [&mut p], 0.5).unwrap();
        assert_eq!(p.value, Matrix::row_vector(&[-0.5, 1.0]));
    }
}
