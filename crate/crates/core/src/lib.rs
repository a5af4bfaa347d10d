//! Prepositional-phrase argumenthood toolkit.
//!
//! The crate is split along the pipeline:
//!
//! * [`corpus`] reads VerbNet class files and parsed corpora and produces the
//!   binary, full-sentence and gradient datasets.
//! * [`embed`] loads static word vectors and fits PCA reductions.
//! * [`nn`] is a small dense-layer/LSTM core with analytic gradients and the
//!   Adadelta optimizer.
//! * [`models`] assembles the pair classifier and the gradient regressor.
//! * [`eval`] holds metrics, cross-validation and significance testing.

pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod models;
pub mod nn;
pub mod rng;

pub use corpus::{
    ArgLabel, DatasetSplit, FeaturalPrepMap, FrameInventory, GradientExample, JudgmentMatrix,
    LabeledPair, ParseTree, Preposition, SentenceExample, VerbLemma,
};
pub use embed::{EmbeddingFormat, EmbeddingTable, OovPolicy, PcaModel};
pub use error::{Error, Result};
pub use eval::{ClassificationReport, RegressionReport, SignificanceResult};
pub use models::{ClassifierConfig, EncoderKind, FeatureVector, RegressorConfig};
pub use nn::{Matrix, OptimizerConfig, Parameter};
