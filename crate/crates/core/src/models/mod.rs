//! Classifier for binary/ternary argumenthood and regressors for gradient
//! argumenthood scores.

mod classifier;
mod experiment;
mod features;
mod linear;
mod regressor;

pub use classifier::{
    accuracy, classify, encode_pair, predict, train_classifier, ClassifierConfig,
    ClassifierParams, EncoderInput, EncoderKind, EpochLog, LabeledInput, StopReason, TrainingLog,
};
pub use experiment::{
    cross_validate, CvOutcome, CvProtocol, FeatureSource, ItemFeatures, PrecomputedFeatures,
    RegressorKind,
};
pub use features::{
    build_feature_vector, mutual_information, read_diagnostics_csv, CooccurrenceCounts,
    DiagnosticsScore, FeatureFlags, FeatureGroup, FeatureResources, FeatureVector, PcaMode, Role,
    RolePca,
};
pub use linear::{train_linear, LinearModel, RIDGE};
pub use regressor::{
    grid_search, predict_score, predict_scores, train_regressor, GridOutcome, GridTrial,
    RegressorConfig, RegressorEpoch, RegressorGrid, RegressorLog, RegressorParams,
};
