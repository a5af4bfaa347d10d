//! Metrics, cross-validation, significance testing and report rendering.

mod ablation;
mod metrics;
mod report;
mod significance;

pub use ablation::{ablation_sweep, standard_subsets, AblationRow};
pub use metrics::{
    adjusted_r2, classification_metrics, fisher_average, kfold, pearson_r, r2_score, r2_scores,
    score_distribution_stats, ClassificationReport, DistributionStats, F1Kind, Fold,
    RegressionReport,
};
pub use report::{to_json, Table};
pub use significance::{approx_randomization, approx_randomization_by, SignificanceResult};
