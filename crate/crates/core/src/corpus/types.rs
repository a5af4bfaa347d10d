use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowercase verb lemma without whitespace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct VerbLemma(String);

impl VerbLemma {
    pub fn new(text: impl AsRef<str>) -> Result<Self> {
        let text = text.as_ref();
        if text.is_empty() {
            return Err(Error::validation("verb lemma is empty"));
        }
        if text.chars().any(char::is_whitespace) {
            return Err(Error::validation(format!("verb lemma `{text}` contains whitespace")));
        }
        Ok(VerbLemma(text.to_lowercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Lowercase single-word preposition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Preposition(String);

impl Preposition {
    pub fn new(text: impl AsRef<str>) -> Result<Self> {
        let text = text.as_ref();
        if text.is_empty() {
            return Err(Error::validation("preposition is empty"));
        }
        if !is_single_word(text) {
            return Err(Error::validation(format!(
                "`{text}` is a multi-word preposition"
            )));
        }
        Ok(Preposition(text.to_lowercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// VerbNet joins multi-word prepositions with spaces, underscores or hyphens.
pub(crate) fn is_single_word(text: &str) -> bool {
    !text.chars().any(|c| c.is_whitespace() || c == '_' || c == '-')
}

macro_rules! string_newtype_impls {
    ($ty:ident) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                $ty::new(s)
            }
        }

        impl TryFrom<String> for $ty {
            type Error = Error;

            fn try_from(s: String) -> Result<Self> {
                $ty::new(s)
            }
        }

        impl From<$ty> for String {
            fn from(v: $ty) -> String {
                v.0
            }
        }

        impl AsRef<str> for $ty {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

string_newtype_impls!(VerbLemma);
string_newtype_impls!(Preposition);

/// Argumenthood label. The numeric class index is what the classifier sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ArgLabel {
    Adj,
    Arg,
    Unobserved,
}

impl ArgLabel {
    pub fn class_index(self) -> usize {
        match self {
            ArgLabel::Adj => 0,
            ArgLabel::Arg => 1,
            ArgLabel::Unobserved => 2,
        }
    }

    pub fn from_class_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(ArgLabel::Adj),
            1 => Ok(ArgLabel::Arg),
            2 => Ok(ArgLabel::Unobserved),
            _ => Err(Error::validation(format!("class index {i} has no label"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ArgLabel::Adj => "ADJ",
            ArgLabel::Arg => "ARG",
            ArgLabel::Unobserved => "UNOBSERVED",
        }
    }
}

impl fmt::Display for ArgLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ArgLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ARG" | "1" => Ok(ArgLabel::Arg),
            "ADJ" | "0" => Ok(ArgLabel::Adj),
            "UNOBSERVED" | "2" => Ok(ArgLabel::Unobserved),
            other => Err(Error::format(format!("unknown label `{other}`"))),
        }
    }
}

/// Anything that can be stratified by label.
pub trait Labeled {
    fn label(&self) -> ArgLabel;
}

/// Verb → subcategorized prepositions, plus the ordered preposition universe.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameInventory {
    entries: BTreeMap<VerbLemma, BTreeSet<Preposition>>,
    prep_universe: Vec<Preposition>,
}

impl FrameInventory {
    /// Builds an inventory; the universe is the sorted union of `extra_preps`
    /// and every preposition in `entries`.
    pub fn new(
        entries: BTreeMap<VerbLemma, BTreeSet<Preposition>>,
        extra_preps: impl IntoIterator<Item = Preposition>,
    ) -> Self {
        let mut universe: BTreeSet<Preposition> = extra_preps.into_iter().collect();
        for preps in entries.values() {
            universe.extend(preps.iter().cloned());
        }
        FrameInventory {
            entries,
            prep_universe: universe.into_iter().collect(),
        }
    }

    pub fn entries(&self) -> &BTreeMap<VerbLemma, BTreeSet<Preposition>> {
        &self.entries
    }

    pub fn prep_universe(&self) -> &[Preposition] {
        &self.prep_universe
    }

    pub fn verbs(&self) -> impl Iterator<Item = &VerbLemma> {
        self.entries.keys()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn preps_for(&self, verb: &VerbLemma) -> Option<&BTreeSet<Preposition>> {
        self.entries.get(verb)
    }

    pub fn subcategorizes(&self, verb: &VerbLemma, prep: &Preposition) -> bool {
        self.entries.get(verb).is_some_and(|s| s.contains(prep))
    }

    /// Total number of (verb, preposition) frame entries.
    pub fn frame_total(&self) -> usize {
        self.entries.values().map(BTreeSet::len).sum()
    }
}

/// Feature name (without the leading `+`) → preposition set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeaturalPrepMap {
    mapping: BTreeMap<String, BTreeSet<Preposition>>,
}

impl FeaturalPrepMap {
    pub fn new() -> Self {
        FeaturalPrepMap::default()
    }

    pub fn insert(&mut self, feature: &str, preps: impl IntoIterator<Item = Preposition>) {
        let key = normalize_feature(feature);
        self.mapping.entry(key).or_default().extend(preps);
    }

    pub fn get(&self, feature: &str) -> Option<&BTreeSet<Preposition>> {
        self.mapping.get(&normalize_feature(feature))
    }

    pub fn features(&self) -> impl Iterator<Item = (&String, &BTreeSet<Preposition>)> {
        self.mapping.iter()
    }

    /// Parses `feature<TAB>prep1,prep2,...` lines. Blank lines and `#`
    /// comments are ignored; multi-word entries are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = FeaturalPrepMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (feature, preps) = line.split_once('\t').ok_or_else(|| {
                Error::format(format!(
                    "featural map line {} has no tab separator",
                    lineno + 1
                ))
            })?;
            let preps = preps
                .split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty() && is_single_word(p))
                .map(Preposition::new)
                .collect::<Result<Vec<_>>>()?;
            map.insert(feature.trim(), preps);
        }
        Ok(map)
    }

    /// The map shipped with the crate.
    pub fn default_map() -> Self {
        FeaturalPrepMap::parse(include_str!("../../data/featural_map.tsv"))
            .expect("bundled featural map parses")
    }
}

fn normalize_feature(feature: &str) -> String {
    feature.trim().trim_start_matches(['+', '-']).to_lowercase()
}

/// A {verb, preposition} tuple with a binary label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledPair {
    pub verb: VerbLemma,
    pub prep: Preposition,
    pub label: ArgLabel,
}

impl Labeled for LabeledPair {
    fn label(&self) -> ArgLabel {
        self.label
    }
}

/// A sentence containing a {verb, preposition} construction, or a pair-only
/// example with an empty token list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SentenceExample {
    pub tokens: Vec<String>,
    pub verb: VerbLemma,
    pub prep: Preposition,
    pub head_noun: Option<String>,
    pub has_direct_object: bool,
    pub label: ArgLabel,
}

impl SentenceExample {
    pub fn pair_only(verb: VerbLemma, prep: Preposition, label: ArgLabel) -> Self {
        SentenceExample {
            tokens: Vec::new(),
            verb,
            prep,
            head_noun: None,
            has_direct_object: false,
            label,
        }
    }

    pub fn has_sentence(&self) -> bool {
        !self.tokens.is_empty()
    }
}

impl Labeled for SentenceExample {
    fn label(&self) -> ArgLabel {
        self.label
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit<T> {
    pub train: Vec<T>,
    pub dev: Vec<T>,
    pub test: Vec<T>,
    pub seed: u64,
}

impl<T> DatasetSplit<T> {
    pub fn len(&self) -> usize {
        self.train.len() + self.dev.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Likert ratings keyed by (subject, item).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentMatrix {
    ratings: BTreeMap<(String, String), u8>,
    items: Vec<String>,
    subjects: Vec<String>,
}

impl JudgmentMatrix {
    pub fn new() -> Self {
        JudgmentMatrix::default()
    }

    /// Adds one rating. Items and subjects keep first-seen order.
    pub fn insert(&mut self, subject: &str, item: &str, rating: u8) -> Result<()> {
        if !(1..=7).contains(&rating) {
            return Err(Error::validation(format!(
                "rating {rating} by `{subject}` for `{item}` is outside [1,7]"
            )));
        }
        let key = (subject.to_string(), item.to_string());
        if self.ratings.contains_key(&key) {
            return Err(Error::validation(format!(
                "subject `{subject}` rated item `{item}` more than once"
            )));
        }
        if !self.items.iter().any(|i| i == item) {
            self.items.push(item.to_string());
        }
        if !self.subjects.iter().any(|s| s == subject) {
            self.subjects.push(subject.to_string());
        }
        self.ratings.insert(key, rating);
        Ok(())
    }

    /// Declares an item even if nobody rated it.
    pub fn add_item(&mut self, item: &str) {
        if !self.items.iter().any(|i| i == item) {
            self.items.push(item.to_string());
        }
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn subjects(&self) -> &[String] {
        &self.subjects
    }

    pub fn get(&self, subject: &str, item: &str) -> Option<u8> {
        self.ratings
            .get(&(subject.to_string(), item.to_string()))
            .copied()
    }

    pub fn ratings(&self) -> impl Iterator<Item = (&str, &str, u8)> {
        self.ratings
            .iter()
            .map(|((s, i), &r)| (s.as_str(), i.as_str(), r))
    }
}

/// A sentence with a continuous argumenthood score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientExample {
    pub item_id: String,
    pub sentence: SentenceExample,
    pub score: f64,
}

impl GradientExample {
    pub fn new(item_id: impl Into<String>, sentence: SentenceExample, score: f64) -> Result<Self> {
        let item_id = item_id.into();
        if !score.is_finite() {
            return Err(Error::validation(format!("score for `{item_id}` is not finite")));
        }
        Ok(GradientExample {
            item_id,
            sentence,
            score,
        })
    }
}
