use serde::{Deserialize, Serialize};

use super::metrics::RegressionReport;
use crate::error::Result;
use crate::models::FeatureFlags;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub label: String,
    pub flags: FeatureFlags,
    pub report: RegressionReport,
}

/// Rows of an ablation table: `base` alone, then `base` plus every non-empty
/// subset of the MI / D.O. / diag flags set in `sweep`, singletons first,
/// then pairs, then all.
pub fn standard_subsets(base: FeatureFlags, sweep: FeatureFlags) -> Vec<FeatureFlags> {
    let extras: Vec<usize> = [sweep.use_mi, sweep.use_dobj, sweep.use_diag]
        .iter()
        .enumerate()
        .filter(|(_, &on)| on)
        .map(|(i, _)| i)
        .collect();
    let mut masks: Vec<u32> = (0..1u32 << extras.len()).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
        .into_iter()
        .map(|mask| {
            let mut f = base;
            f.use_mi = false;
            f.use_dobj = false;
            f.use_diag = false;
            for (bit, &which) in extras.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    match which {
                        0 => f.use_mi = true,
                        1 => f.use_dobj = true,
                        _ => f.use_diag = true,
                    }
                }
            }
            f
        })
        .collect()
}

/// Evaluates each subset with the same protocol; `evaluate` is expected to
/// use identical folds and seeds for every call.
pub fn ablation_sweep<F>(subsets: &[FeatureFlags], mut evaluate: F) -> Result<Vec<AblationRow>>
where
    F: FnMut(&FeatureFlags) -> Result<RegressionReport>,
{
    subsets
        .iter()
        .map(|flags| {
            flags.validate()?;
            Ok(AblationRow {
                label: flags.label(),
                flags: *flags,
                report: evaluate(flags)?,
            })
        })
        .collect()
}
