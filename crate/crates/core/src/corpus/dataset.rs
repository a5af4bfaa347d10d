use std::collections::{BTreeMap, HashSet};

use rand::seq::{index, SliceRandom};

use super::types::{
    ArgLabel, DatasetSplit, FrameInventory, Labeled, LabeledPair, Preposition, VerbLemma,
};
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Every verb × preposition combination, verb-major, labeled ARG when the
/// inventory lists the preposition for the verb.
pub fn generate_pair_dataset(
    inventory: &FrameInventory,
    verbs: &[VerbLemma],
    preps: &[Preposition],
) -> Result<Vec<LabeledPair>> {
    if verbs.is_empty() || preps.is_empty() {
        return Err(Error::validation("verb and preposition lists must be non-empty"));
    }
    if let Some(v) = first_duplicate(verbs) {
        return Err(Error::validation(format!("verb `{v}` listed twice")));
    }
    if let Some(p) = first_duplicate(preps) {
        return Err(Error::validation(format!("preposition `{p}` listed twice")));
    }
    let mut pairs = Vec::with_capacity(verbs.len() * preps.len());
    for verb in verbs {
        let frames = inventory.preps_for(verb);
        for prep in preps {
            let label = if frames.is_some_and(|f| f.contains(prep)) {
                ArgLabel::Arg
            } else {
                ArgLabel::Adj
            };
            pairs.push(LabeledPair {
                verb: verb.clone(),
                prep: prep.clone(),
                label,
            });
        }
    }
    Ok(pairs)
}

fn first_duplicate<T: Eq + std::hash::Hash>(items: &[T]) -> Option<&T> {
    let mut seen = HashSet::with_capacity(items.len());
    items.iter().find(|item| !seen.insert(*item))
}

/// Keeps every ARG pair and an equal-size uniform sample of ADJ pairs, then
/// shuffles the result.
pub fn balance_subsample(pairs: &[LabeledPair], seed: u64) -> Result<Vec<LabeledPair>> {
    let (args, adjs): (Vec<usize>, Vec<usize>) = {
        let mut args = Vec::new();
        let mut adjs = Vec::new();
        for (i, p) in pairs.iter().enumerate() {
            match p.label {
                ArgLabel::Arg => args.push(i),
                ArgLabel::Adj => adjs.push(i),
                ArgLabel::Unobserved => {
                    return Err(Error::validation(
                        "binary pair datasets cannot carry UNOBSERVED labels",
                    ))
                }
            }
        }
        (args, adjs)
    };
    if args.len() > adjs.len() {
        return Err(Error::validation(format!(
            "{} ARG pairs exceed {} ADJ pairs; only the negative class can be subsampled",
            args.len(),
            adjs.len()
        )));
    }
    let mut rng = seeded(seed);
    let mut chosen = args;
    let mut sampled: Vec<usize> = index::sample(&mut rng, adjs.len(), chosen.len())
        .into_iter()
        .map(|k| adjs[k])
        .collect();
    sampled.sort_unstable();
    chosen.extend(sampled);
    chosen.shuffle(&mut rng);
    Ok(chosen.into_iter().map(|i| pairs[i].clone()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.70,
            dev: 0.15,
            test: 0.15,
        }
    }
}

impl SplitRatios {
    fn validate(&self) -> Result<()> {
        if !(self.train > 0.0 && self.dev > 0.0 && self.test > 0.0) {
            return Err(Error::validation("split ratios must all be positive"));
        }
        if (self.train + self.dev + self.test - 1.0).abs() > 1e-9 {
            return Err(Error::validation("split ratios must sum to 1"));
        }
        Ok(())
    }

    /// `floor(n·train)`, `floor(n·dev)`, remainder to test.
    pub fn sizes(&self, n: usize) -> [usize; 3] {
        // The slack absorbs representation error such as 10 × 0.7.
        let train = ((n as f64) * self.train + 1e-9).floor() as usize;
        let dev = (((n as f64) * self.dev + 1e-9).floor() as usize).min(n - train);
        [train, dev, n - train - dev]
    }
}

/// Label-stratified train/dev/test split.
///
/// Part sizes follow [`SplitRatios::sizes`]. Each label's count in each part
/// is the floor or ceiling of its proportional quota, chosen so that row
/// (label) and column (part) totals are both met exactly.
pub fn stratified_split<T: Labeled + Clone>(
    examples: &[T],
    ratios: SplitRatios,
    seed: u64,
) -> Result<DatasetSplit<T>> {
    ratios.validate()?;
    let n = examples.len();
    if n < 3 {
        return Err(Error::validation(format!(
            "{n} examples cannot fill three split parts"
        )));
    }
    let sizes = ratios.sizes(n);
    let mut strata: BTreeMap<ArgLabel, Vec<usize>> = BTreeMap::new();
    for (i, e) in examples.iter().enumerate() {
        strata.entry(e.label()).or_default().push(i);
    }
    let counts: Vec<usize> = strata.values().map(Vec::len).collect();
    let alloc = apportion(&counts, &sizes, n);

    let mut rng = seeded(seed);
    let mut parts: [Vec<usize>; 3] = Default::default();
    for (s, members) in strata.values_mut().enumerate() {
        members.shuffle(&mut rng);
        let mut cursor = 0;
        for (p, part) in parts.iter_mut().enumerate() {
            part.extend_from_slice(&members[cursor..cursor + alloc[s][p]]);
            cursor += alloc[s][p];
        }
    }
    let mut take = |mut idx: Vec<usize>| {
        idx.shuffle(&mut rng);
        idx.into_iter().map(|i| examples[i].clone()).collect::<Vec<_>>()
    };
    let [train, dev, test] = parts;
    Ok(DatasetSplit {
        train: take(train),
        dev: take(dev),
        test: take(test),
        seed,
    })
}

/// Integer matrix `x[s][p]` with row sums `rows[s]`, column sums `cols[p]`
/// and every entry equal to the floor or ceiling of `rows[s]·cols[p]/total`.
fn apportion(rows: &[usize], cols: &[usize], total: usize) -> Vec<Vec<usize>> {
    let (ns, np) = (rows.len(), cols.len());
    let mut x = vec![vec![0usize; np]; ns];
    let mut remainder = vec![vec![0u128; np]; ns];
    for s in 0..ns {
        for p in 0..np {
            let prod = rows[s] as u128 * cols[p] as u128;
            x[s][p] = (prod / total as u128) as usize;
            remainder[s][p] = prod % total as u128;
        }
    }
    let mut row_need: Vec<usize> = (0..ns).map(|s| rows[s] - x[s].iter().sum::<usize>()).collect();
    let mut col_need: Vec<usize> = (0..np)
        .map(|p| cols[p] - (0..ns).map(|s| x[s][p]).sum::<usize>())
        .collect();

    // Unit-capacity bipartite flow on cells with a fractional quota; larger
    // remainders are tried first.
    let order: Vec<Vec<usize>> = (0..ns)
        .map(|s| {
            let mut ps: Vec<usize> = (0..np).filter(|&p| remainder[s][p] > 0).collect();
            ps.sort_by(|&a, &b| remainder[s][b].cmp(&remainder[s][a]).then(a.cmp(&b)));
            ps
        })
        .collect();
    let mut used = vec![vec![false; np]; ns];

    fn augment(
        s: usize,
        order: &[Vec<usize>],
        used: &mut [Vec<bool>],
        col_need: &mut [usize],
        seen: &mut [bool],
    ) -> bool {
        for &p in &order[s] {
            if used[s][p] || seen[p] {
                continue;
            }
            seen[p] = true;
            if col_need[p] > 0 {
                col_need[p] -= 1;
                used[s][p] = true;
                return true;
            }
            // Reroute a row already holding column p.
            for s2 in 0..used.len() {
                if s2 != s && used[s2][p] {
                    used[s2][p] = false;
                    if augment(s2, order, used, col_need, seen) {
                        used[s][p] = true;
                        return true;
                    }
                    used[s2][p] = true;
                }
            }
        }
        false
    }

    for s in 0..ns {
        while row_need[s] > 0 {
            let mut seen = vec![false; np];
            if !augment(s, &order, &mut used, &mut col_need, &mut seen) {
                break;
            }
            row_need[s] -= 1;
        }
    }
    for s in 0..ns {
        for p in 0..np {
            if used[s][p] {
                x[s][p] += 1;
            }
        }
    }
    debug_assert!(row_need.iter().all(|&r| r == 0));
    x
}
