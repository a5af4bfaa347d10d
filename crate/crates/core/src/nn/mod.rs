//! Minimal dense neural-network core: matrices, layer kernels with analytic
//! backward passes, LSTM/BiLSTM, Adadelta, gradient checking and checkpoints.
//!
//! All arithmetic is `f64`.

pub mod checkpoint;
pub mod gradcheck;
pub mod layers;
pub mod lstm;
mod matrix;
pub mod optim;

pub use checkpoint::Checkpoint;
pub use gradcheck::{grad_check, relative_error};
pub use layers::{
    affine_backward, affine_forward, max_pool_time, max_pool_time_backward, sigmoid, smooth_l1,
    softmax, softmax_xent, Activation, AffineGrads,
};
pub use lstm::{
    bilstm_backward, bilstm_encode, lstm_backward, lstm_forward, BiLstmCache, Direction,
    LstmCache, LstmCellParams,
};
pub use matrix::{dot, Matrix};
pub use optim::{adadelta_step, sgd_step, OptimizerConfig, Parameter};
