//! Feature vectors for the gradient argumenthood regressor.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{GradientExample, Preposition, VerbLemma};
use crate::embed::{pca_fit, EmbeddingTable, OovPolicy, PcaModel};
use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Verb–preposition co-occurrence counts.
///
/// File format: a `#N=<int> alpha=<float>` header, optional further `#`
/// comment lines, then `verb<TAB>prep<TAB>count` rows. `_` in either column
/// is a wildcard marking a marginal row; a verb or preposition without one
/// gets the sum of its joint rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceCounts {
    total: u64,
    alpha: f64,
    joint: HashMap<(String, String), u64>,
    verbs: BTreeMap<String, u64>,
    preps: BTreeMap<String, u64>,
}

impl CooccurrenceCounts {
    pub fn from_joint(rows: impl IntoIterator<Item = (String, String, u64)>, alpha: f64) -> Self {
        let mut joint = HashMap::new();
        let mut verbs = BTreeMap::new();
        let mut preps = BTreeMap::new();
        let mut total = 0;
        for (v, p, c) in rows {
            *joint.entry((v.clone(), p.clone())).or_insert(0) += c;
            *verbs.entry(v).or_insert(0) += c;
            *preps.entry(p).or_insert(0) += c;
            total += c;
        }
        CooccurrenceCounts {
            total,
            alpha,
            joint,
            verbs,
            preps,
        }
    }

    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        let (total, alpha) = parse_header(&header)?;
        let mut joint = HashMap::new();
        let mut verb_marg = BTreeMap::new();
        let mut prep_marg = BTreeMap::new();
        let mut verb_sum: BTreeMap<String, u64> = BTreeMap::new();
        let mut prep_sum: BTreeMap<String, u64> = BTreeMap::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let lineno = i + 2;
            if f.len() != 3 {
                return Err(Error::format(format!("counts line {lineno}: expected 3 fields")));
            }
            let c: u64 = f[2]
                .parse()
                .map_err(|_| Error::format(format!("counts line {lineno}: bad count `{}`", f[2])))?;
            let v = f[0].to_lowercase();
            let p = f[1].to_lowercase();
            match (v.as_str(), p.as_str()) {
                ("_", "_") => {
                    return Err(Error::format(format!("counts line {lineno}: `_\\t_` row")))
                }
                ("_", _) => {
                    prep_marg.insert(p, c);
                }
                (_, "_") => {
                    verb_marg.insert(v, c);
                }
                _ => {
                    *verb_sum.entry(v.clone()).or_default() += c;
                    *prep_sum.entry(p.clone()).or_default() += c;
                    *joint.entry((v, p)).or_default() += c;
                }
            }
        }
        verb_sum.extend(verb_marg);
        prep_sum.extend(prep_marg);
        Ok(CooccurrenceCounts {
            total,
            alpha,
            joint,
            verbs: verb_sum,
            preps: prep_sum,
        })
    }

    /// Writes joint rows and marginals in sorted order.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "#N={} alpha={}", self.total, self.alpha)?;
        writeln!(
            w,
            "# pmi(v,p) = ln[(c(v,p)+a)(N+a*V*P) / ((c(v)+a*P)(c(p)+a*V))], V/P = verb/prep types"
        )?;
        let mut rows: Vec<_> = self.joint.iter().collect();
        rows.sort();
        for ((v, p), c) in rows {
            writeln!(w, "{v}\t{p}\t{c}")?;
        }
        for (v, c) in &self.verbs {
            writeln!(w, "{v}\t_\t{c}")?;
        }
        for (p, c) in &self.preps {
            writeln!(w, "_\t{p}\t{c}")?;
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Smoothing constant declared in the header.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn verb_types(&self) -> usize {
        self.verbs.len()
    }

    pub fn prep_types(&self) -> usize {
        self.preps.len()
    }

    pub fn joint(&self, v: &str, p: &str) -> u64 {
        self.joint
            .get(&(v.to_string(), p.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn verb_count(&self, v: &str) -> u64 {
        self.verbs.get(v).copied().unwrap_or(0)
    }

    pub fn prep_count(&self, p: &str) -> u64 {
        self.preps.get(p).copied().unwrap_or(0)
    }
}

fn parse_header(line: &str) -> Result<(u64, f64)> {
    let bad = || Error::format(format!("counts header must be `#N=<int> alpha=<float>`, got `{line}`"));
    let rest = line.strip_prefix("#N=").ok_or_else(bad)?;
    let mut it = rest.split_whitespace();
    let total = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let alpha = it
        .next()
        .and_then(|s| s.strip_prefix("alpha="))
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|a| a.is_finite() && *a >= 0.0)
        .ok_or_else(bad)?;
    Ok((total, alpha))
}

/// Add-α smoothed PMI:
/// `ln[(c(v,p)+α)(N+α·V·P) / ((c(v)+α·P)(c(p)+α·V))]`
/// with `V`, `P` the verb and preposition type counts.
pub fn mutual_information(
    counts: &CooccurrenceCounts,
    v: &VerbLemma,
    p: &Preposition,
    alpha: f64,
) -> Result<f64> {
    if counts.total == 0 {
        return Err(Error::Degenerate("co-occurrence counts have N=0".into()));
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::validation(format!("smoothing α must be ≥ 0, got {alpha}")));
    }
    let vt = counts.verb_types() as f64;
    let pt = counts.prep_types() as f64;
    let joint = counts.joint(v.as_str(), p.as_str()) as f64 + alpha;
    let cv = counts.verb_count(v.as_str()) as f64 + alpha * pt;
    let cp = counts.prep_count(p.as_str()) as f64 + alpha * vt;
    let n = counts.total as f64 + alpha * vt * pt;
    if joint == 0.0 || cv == 0.0 || cp == 0.0 {
        return Err(Error::Degenerate(format!(
            "PMI of ({v}, {p}) is undefined with zero counts; use smoothing α > 0"
        )));
    }
    Ok((joint * n / (cv * cp)).ln())
}

/// Weighted combination of two diagnostic test results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsScore {
    pub omissibility: f64,
    pub pseudo_cleft: f64,
    pub weights: (f64, f64),
}

impl DiagnosticsScore {
    pub fn new(omissibility: f64, pseudo_cleft: f64, weights: (f64, f64)) -> Result<Self> {
        for (name, v) in [("omissibility", omissibility), ("pseudo_cleft", pseudo_cleft)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(format!("{name} {v} is outside [0, 1]")));
            }
        }
        if weights.0 < 0.0 || weights.1 < 0.0 || (weights.0 + weights.1 - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!(
                "diagnostic weights {weights:?} must be non-negative and sum to 1"
            )));
        }
        Ok(DiagnosticsScore {
            omissibility,
            pseudo_cleft,
            weights,
        })
    }

    pub fn combined(&self) -> f64 {
        self.weights.0 * self.omissibility + self.weights.1 * self.pseudo_cleft
    }
}

#[derive(Deserialize)]
struct DiagRow {
    item_id: String,
    omissibility: f64,
    pseudo_cleft: f64,
}

/// Reads `item_id,omissibility,pseudo_cleft` CSV with a header row.
pub fn read_diagnostics_csv<R: Read>(
    reader: R,
    weights: (f64, f64),
) -> Result<BTreeMap<String, DiagnosticsScore>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = BTreeMap::new();
    for row in rdr.deserialize() {
        let row: DiagRow = row?;
        let score = DiagnosticsScore::new(row.omissibility, row.pseudo_cleft, weights)?;
        if out.insert(row.item_id.clone(), score).is_some() {
            return Err(Error::validation(format!(
                "duplicate diagnostics row for `{}`",
                row.item_id
            )));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureFlags {
    /// PCA-reduced verb, preposition and head noun vectors.
    pub use_embeddings: bool,
    pub use_mi: bool,
    pub use_dobj: bool,
    pub use_diag: bool,
    /// Product and difference of the verb and preposition projections.
    pub use_interactions: bool,
}

impl Default for FeatureFlags {
    fn default() -> Self {
        FeatureFlags {
            use_embeddings: true,
            use_mi: false,
            use_dobj: false,
            use_diag: false,
            use_interactions: false,
        }
    }
}

impl FeatureFlags {
    pub fn all() -> Self {
        FeatureFlags {
            use_embeddings: true,
            use_mi: true,
            use_dobj: true,
            use_diag: true,
            use_interactions: true,
        }
    }

    pub fn schema(&self, pca_k: usize) -> Vec<FeatureGroup> {
        let mut s = Vec::new();
        let mut push = |name: &str, len| s.push(FeatureGroup { name: name.into(), len });
        if self.use_embeddings {
            push("verb-pca", pca_k);
            push("prep-pca", pca_k);
            push("head-pca", pca_k);
        }
        if self.use_mi {
            push("mi", 1);
        }
        if self.use_dobj {
            push("dobj", 1);
        }
        if self.use_diag {
            push("diag", 1);
        }
        if self.use_interactions && self.use_embeddings {
            push("verb*prep", pca_k);
            push("verb-prep", pca_k);
        }
        s
    }

    pub fn feature_count(&self, pca_k: usize) -> usize {
        self.schema(pca_k).iter().map(|g| g.len).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.use_interactions && !self.use_embeddings {
            return Err(Error::validation("interaction features need the embedding features"));
        }
        if !(self.use_embeddings || self.use_mi || self.use_dobj || self.use_diag) {
            return Err(Error::validation("feature set is empty: no predictors"));
        }
        Ok(())
    }

    /// A short label such as `emb+mi+dobj`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        for (on, name) in [
            (self.use_embeddings, "emb"),
            (self.use_mi, "mi"),
            (self.use_dobj, "dobj"),
            (self.use_diag, "diag"),
            (self.use_interactions, "interactions"),
        ] {
            if on {
                parts.push(name);
            }
        }
        if parts.is_empty() {
            "none".into()
        } else {
            parts.join("+")
        }
    }
}

/// Parses a comma list drawn from `emb,mi,dobj,diag,interactions`. `emb` is
/// implied unless the list contains `noemb`.
impl FromStr for FeatureFlags {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut f = FeatureFlags::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.to_ascii_lowercase().as_str() {
                "emb" | "embeddings" => f.use_embeddings = true,
                "noemb" => f.use_embeddings = false,
                "mi" => f.use_mi = true,
                "dobj" | "do" => f.use_dobj = true,
                "diag" => f.use_diag = true,
                "interactions" | "int" => f.use_interactions = true,
                other => return Err(Error::validation(format!("unknown feature flag `{other}`"))),
            }
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureGroup {
    pub name: String,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub schema: Vec<FeatureGroup>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaMode {
    /// One fit over the verb, preposition and head tokens together.
    #[default]
    Shared,
    /// Separate fits per token role.
    PerRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RolePca {
    Shared(PcaModel),
    PerRole {
        verb: PcaModel,
        prep: PcaModel,
        head: PcaModel,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Verb,
    Prep,
    Head,
}

impl RolePca {
    /// Fits on the distinct tokens of `examples` (the training portion).
    pub fn fit<'a>(
        examples: impl IntoIterator<Item = &'a GradientExample>,
        table: &EmbeddingTable,
        policy: OovPolicy,
        k: usize,
        mode: PcaMode,
    ) -> Result<Self> {
        let mut verbs = BTreeSet::new();
        let mut preps = BTreeSet::new();
        let mut heads = BTreeSet::new();
        for ex in examples {
            verbs.insert(ex.sentence.verb.as_str().to_string());
            preps.insert(ex.sentence.prep.as_str().to_string());
            if let Some(h) = &ex.sentence.head_noun {
                heads.insert(h.clone());
            }
        }
        let fit = |tokens: &BTreeSet<String>| -> Result<PcaModel> {
            let rows = tokens
                .iter()
                .map(|t| table.lookup(t, policy))
                .collect::<Result<Vec<_>>>()?;
            if rows.is_empty() {
                return Err(Error::validation("no tokens to fit PCA on"));
            }
            pca_fit(&Matrix::from_rows(&rows)?, k)
        };
        match mode {
            PcaMode::Shared => {
                let all: BTreeSet<String> = verbs.into_iter().chain(preps).chain(heads).collect();
                Ok(RolePca::Shared(fit(&all)?))
            }
            PcaMode::PerRole => Ok(RolePca::PerRole {
                verb: fit(&verbs)?,
                prep: fit(&preps)?,
                head: fit(&heads)?,
            }),
        }
    }

    pub fn model(&self, role: Role) -> &PcaModel {
        match (self, role) {
            (RolePca::Shared(m), _) => m,
            (RolePca::PerRole { verb, .. }, Role::Verb) => verb,
            (RolePca::PerRole { prep, .. }, Role::Prep) => prep,
            (RolePca::PerRole { head, .. }, Role::Head) => head,
        }
    }

    pub fn k(&self) -> usize {
        self.model(Role::Verb).k()
    }
}

/// Shared lookup state for [`build_feature_vector`].
#[derive(Debug, Clone, Copy)]
pub struct FeatureResources<'a> {
    pub table: &'a EmbeddingTable,
    pub pca: &'a RolePca,
    pub counts: Option<&'a CooccurrenceCounts>,
    pub oov: OovPolicy,
}

/// Concatenates the enabled feature groups in schema order.
pub fn build_feature_vector(
    example: &GradientExample,
    res: &FeatureResources<'_>,
    diag: Option<&DiagnosticsScore>,
    flags: &FeatureFlags,
) -> Result<FeatureVector> {
    flags.validate()?;
    let s = &example.sentence;
    let k = res.pca.k();
    let mut values = Vec::with_capacity(flags.feature_count(k));
    let mut verb_z = Vec::new();
    let mut prep_z = Vec::new();
    if flags.use_embeddings {
        let project = |token: &str, role| -> Result<Vec<f64>> {
            res.pca.model(role).project(&res.table.lookup(token, res.oov)?)
        };
        let head = s.head_noun.as_deref().ok_or_else(|| {
            Error::validation(format!("item `{}` has no head noun", example.item_id))
        })?;
        verb_z = project(s.verb.as_str(), Role::Verb)?;
        prep_z = project(s.prep.as_str(), Role::Prep)?;
        values.extend_from_slice(&verb_z);
        values.extend_from_slice(&prep_z);
        values.extend(project(head, Role::Head)?);
    }
    if flags.use_mi {
        let counts = res
            .counts
            .ok_or_else(|| Error::validation("MI features need a counts file"))?;
        values.push(mutual_information(counts, &s.verb, &s.prep, counts.alpha())?);
    }
    if flags.use_dobj {
        values.push(if s.has_direct_object { 1.0 } else { 0.0 });
    }
    if flags.use_diag {
        let d = diag.ok_or_else(|| {
            Error::validation(format!("no diagnostics row for item `{}`", example.item_id))
        })?;
        values.push(d.combined());
    }
    if flags.use_interactions {
        values.extend(verb_z.iter().zip(&prep_z).map(|(a, b)| a * b));
        values.extend(verb_z.iter().zip(&prep_z).map(|(a, b)| a - b));
    }
    Ok(FeatureVector {
        values,
        schema: flags.schema(k),
    })
}
