//! Single-layer LSTM with backpropagation through time.
//!
//! Gate pre-activations are computed in one product per timestep. The four
//! gates are stacked column-wise in the order input, forget, candidate,
//! output, so `w_x` is `d×4h`, `w_h` is `h×4h` and `bias` is `1×4h`.

use serde::{Deserialize, Serialize};

use super::layers::sigmoid;
use super::{Matrix, Parameter};
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Reverse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmCellParams {
    pub w_x: Parameter,
    pub w_h: Parameter,
    pub bias: Parameter,
}

impl LstmCellParams {
    pub fn zeros(prefix: &str, input_dim: usize, hidden: usize) -> Self {
        LstmCellParams {
            w_x: Parameter::zeros(format!("{prefix}.w_x"), input_dim, 4 * hidden),
            w_h: Parameter::zeros(format!("{prefix}.w_h"), hidden, 4 * hidden),
            bias: Parameter::zeros(format!("{prefix}.bias"), 1, 4 * hidden),
        }
    }

    /// Glorot weights, forget-gate bias 1, other biases 0.
    pub fn init(prefix: &str, input_dim: usize, hidden: usize, rng: &mut Rng) -> Self {
        let mut bias = Parameter::zeros(format!("{prefix}.bias"), 1, 4 * hidden);
        for j in hidden..2 * hidden {
            bias.value[(0, j)] = 1.0;
        }
        LstmCellParams {
            w_x: Parameter::glorot(format!("{prefix}.w_x"), input_dim, 4 * hidden, rng),
            w_h: Parameter::glorot(format!("{prefix}.w_h"), hidden, 4 * hidden, rng),
            bias,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_x.value.rows()
    }

    pub fn hidden(&self) -> usize {
        self.w_h.value.rows()
    }

    pub fn parameters_mut(&mut self) -> [&mut Parameter; 3] {
        [&mut self.w_x, &mut self.w_h, &mut self.bias]
    }

    pub fn parameters(&self) -> [&Parameter; 3] {
        [&self.w_x, &self.w_h, &self.bias]
    }

    fn check(&self) -> Result<()> {
        let h = self.hidden();
        if self.w_x.value.cols() != 4 * h
            || self.w_h.value.cols() != 4 * h
            || self.bias.value.shape() != (1, 4 * h)
        {
            return Err(Error::shape("inconsistent LSTM gate shapes"));
        }
        Ok(())
    }
}

/// Values kept from the forward pass, in processing order.
#[derive(Debug, Clone)]
pub struct LstmCache {
    direction: Direction,
    /// Input rows in processing order.
    inputs: Matrix,
    /// Gate activations per step, `T×4h` (i, f, g, o after nonlinearity).
    gates: Matrix,
    /// Cell states per step, `T×h`.
    cells: Matrix,
    /// Hidden states per step in processing order, `T×h`.
    hidden: Matrix,
}

pub fn lstm_forward(
    sequence: &Matrix,
    params: &LstmCellParams,
    direction: Direction,
) -> Result<(Matrix, LstmCache)> {
    params.check()?;
    let (t_len, d) = sequence.shape();
    if t_len == 0 {
        return Err(Error::shape("LSTM input must have at least one timestep"));
    }
    if d != params.input_dim() {
        return Err(Error::shape(format!(
            "LSTM input width {d} does not match parameter input dim {}",
            params.input_dim()
        )));
    }
    let h = params.hidden();
    let inputs = match direction {
        Direction::Forward => sequence.clone(),
        Direction::Reverse => sequence.reversed_rows(),
    };
    // Input contributions for every step in one product.
    let mut pre = inputs.matmul(&params.w_x.value);
    pre.add_row_broadcast(&params.bias.value);

    let mut gates = Matrix::zeros(t_len, 4 * h);
    let mut cells = Matrix::zeros(t_len, h);
    let mut hidden = Matrix::zeros(t_len, h);
    let w_h = &params.w_h.value;
    for t in 0..t_len {
        let z = gates.row_mut(t);
        z.copy_from_slice(pre.row(t));
        if t > 0 {
            for (k, &hv) in hidden.row(t - 1).iter().enumerate() {
                if hv == 0.0 {
                    continue;
                }
                for (zv, &w) in z.iter_mut().zip(w_h.row(k)) {
                    *zv += hv * w;
                }
            }
        }
        for j in 0..h {
            z[j] = sigmoid(z[j]);
            z[h + j] = sigmoid(z[h + j]);
            z[2 * h + j] = z[2 * h + j].tanh();
            z[3 * h + j] = sigmoid(z[3 * h + j]);
        }
        for j in 0..h {
            let prev_c = if t > 0 { cells[(t - 1, j)] } else { 0.0 };
            let c = gates[(t, h + j)] * prev_c + gates[(t, j)] * gates[(t, 2 * h + j)];
            cells[(t, j)] = c;
            hidden[(t, j)] = gates[(t, 3 * h + j)] * c.tanh();
        }
    }
    let out = match direction {
        Direction::Forward => hidden.clone(),
        Direction::Reverse => hidden.reversed_rows(),
    };
    Ok((
        out,
        LstmCache {
            direction,
            inputs,
            gates,
            cells,
            hidden,
        },
    ))
}

/// Backpropagation through time. `d_states` is the upstream gradient for the
/// returned states (in original time order). Parameter gradients are added
/// to `params`; the gradient with respect to the input sequence is returned.
pub fn lstm_backward(
    cache: &LstmCache,
    params: &mut LstmCellParams,
    d_states: &Matrix,
) -> Result<Matrix> {
    let (t_len, h) = cache.hidden.shape();
    if d_states.shape() != (t_len, h) {
        return Err(Error::shape(format!(
            "LSTM upstream gradient is {:?}, expected {:?}",
            d_states.shape(),
            (t_len, h)
        )));
    }
    let d_hidden = match cache.direction {
        Direction::Forward => d_states.clone(),
        Direction::Reverse => d_states.reversed_rows(),
    };
    let mut dz = Matrix::zeros(t_len, 4 * h);
    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let w_h = &params.w_h.value;
    for t in (0..t_len).rev() {
        let g = cache.gates.row(t);
        let row = dz.row_mut(t);
        for j in 0..h {
            let (i_g, f_g, c_g, o_g) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
            let c = cache.cells[(t, j)];
            let tc = c.tanh();
            let prev_c = if t > 0 { cache.cells[(t - 1, j)] } else { 0.0 };
            let dh = d_hidden[(t, j)] + dh_next[j];
            let dc = dh * o_g * (1.0 - tc * tc) + dc_next[j];
            let d_o = dh * tc;
            let d_i = dc * c_g;
            let d_g = dc * i_g;
            let d_f = dc * prev_c;
            dc_next[j] = dc * f_g;
            row[j] = d_i * i_g * (1.0 - i_g);
            row[h + j] = d_f * f_g * (1.0 - f_g);
            row[2 * h + j] = d_g * (1.0 - c_g * c_g);
            row[3 * h + j] = d_o * o_g * (1.0 - o_g);
        }
        for (k, dh) in dh_next.iter_mut().enumerate() {
            *dh = super::matrix::dot(row, w_h.row(k));
        }
    }
    // Recurrent weights see h_{t-1}, which is zero at t = 0.
    let mut prev_hidden = Matrix::zeros(t_len, h);
    for t in 1..t_len {
        prev_hidden.row_mut(t).copy_from_slice(cache.hidden.row(t - 1));
    }
    params.w_x.accumulate(&cache.inputs.t_matmul(&dz));
    params.w_h.accumulate(&prev_hidden.t_matmul(&dz));
    params.bias.accumulate(&dz.sum_rows());
    let dx = dz.matmul_t(&params.w_x.value);
    Ok(match cache.direction {
        Direction::Forward => dx,
        Direction::Reverse => dx.reversed_rows(),
    })
}

#[derive(Debug, Clone)]
pub struct BiLstmCache {
    forward: LstmCache,
    backward: LstmCache,
    hidden: usize,
}

/// Forward and reverse states concatenated per timestep, `T×2h`.
pub fn bilstm_encode(
    sequence: &Matrix,
    fwd: &LstmCellParams,
    bwd: &LstmCellParams,
) -> Result<(Matrix, BiLstmCache)> {
    if fwd.hidden() != bwd.hidden() {
        return Err(Error::shape("BiLSTM directions must share the hidden size"));
    }
    let (f_states, f_cache) = lstm_forward(sequence, fwd, Direction::Forward)?;
    let (b_states, b_cache) = lstm_forward(sequence, bwd, Direction::Reverse)?;
    Ok((
        Matrix::hstack(&[&f_states, &b_states]),
        BiLstmCache {
            forward: f_cache,
            backward: b_cache,
            hidden: fwd.hidden(),
        },
    ))
}

pub fn bilstm_backward(
    cache: &BiLstmCache,
    fwd: &mut LstmCellParams,
    bwd: &mut LstmCellParams,
    d_states: &Matrix,
) -> Result<Matrix> {
    let h = cache.hidden;
    if d_states.cols() != 2 * h {
        return Err(Error::shape("BiLSTM upstream width mismatch"));
    }
    let mut dx = lstm_backward(&cache.forward, fwd, &d_states.columns(0, h))?;
    dx.add_assign(&lstm_backward(&cache.backward, bwd, &d_states.columns(h, 2 * h))?);
    Ok(dx)
}
