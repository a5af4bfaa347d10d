//! Heuristic {verb, preposition} construction search over parse trees.

use std::collections::{HashMap, HashSet};

use super::ptb::ParseTree;
use super::types::{Preposition, VerbLemma};
use crate::error::{Error, Result};

/// Rule-based verb lemmatizer with an exceptions table for irregular forms.
#[derive(Debug, Clone)]
pub struct Lemmatizer {
    exceptions: HashMap<String, String>,
    lemmas: HashSet<String>,
}

impl Default for Lemmatizer {
    fn default() -> Self {
        Lemmatizer::from_exceptions(include_str!("../../data/verb_exceptions.tsv"))
            .expect("bundled exceptions parse")
    }
}

const VOWELS: &[u8] = b"aeiou";

fn is_vowel(c: u8) -> bool {
    VOWELS.contains(&c)
}

impl Lemmatizer {
    /// Parses `form<TAB>lemma` lines; `#` starts a comment line.
    pub fn from_exceptions(text: &str) -> Result<Self> {
        let mut exceptions = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (form, lemma) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(format!("exceptions line {} has no tab", i + 1)))?;
            exceptions.insert(form.trim().to_lowercase(), lemma.trim().to_lowercase());
        }
        let lemmas = exceptions.values().cloned().collect();
        Ok(Lemmatizer { exceptions, lemmas })
    }

    /// Lemma for `form` carrying the POS tag `tag` (VB, VBD, VBG, VBN, VBP, VBZ).
    pub fn lemmatize(&self, form: &str, tag: &str) -> String {
        let lower = form.to_lowercase();
        match tag {
            "VB" => lower,
            "VBP" if self.lemmas.contains(&lower) => lower,
            _ => {
                if let Some(lemma) = self.exceptions.get(&lower) {
                    return lemma.clone();
                }
                match tag {
                    "VBZ" => strip_s(&lower),
                    "VBD" | "VBN" => strip_ed(&lower),
                    "VBG" => strip_ing(&lower),
                    _ => lower,
                }
            }
        }
    }
}

fn strip_s(w: &str) -> String {
    if w.len() > 4 && w.ends_with("ies") {
        return format!("{}y", &w[..w.len() - 3]);
    }
    for suffix in ["ches", "shes", "sses", "xes", "zzes", "oes"] {
        if w.len() > suffix.len() && w.ends_with(suffix) {
            return w[..w.len() - 2].to_string();
        }
    }
    if w.len() > 2 && w.ends_with('s') && !w.ends_with("ss") {
        return w[..w.len() - 1].to_string();
    }
    w.to_string()
}

fn strip_ed(w: &str) -> String {
    if w.len() > 4 && w.ends_with("ied") {
        return format!("{}y", &w[..w.len() - 3]);
    }
    if w.len() > 4 && w.ends_with("eed") {
        return w[..w.len() - 1].to_string();
    }
    if w.len() > 3 && w.ends_with("ed") {
        return restore(&w[..w.len() - 2]);
    }
    w.to_string()
}

fn strip_ing(w: &str) -> String {
    if w.len() > 4 && w.ends_with("ing") {
        return restore(&w[..w.len() - 3]);
    }
    w.to_string()
}

/// Undo consonant doubling or restore a dropped final `e`.
fn restore(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 3 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) {
        let c = b[n - 1];
        let undoubled = &stem[..n - 1];
        let keep_double = matches!(c, b's' | b'f' | b'z') || (c == b'l' && n <= 5);
        if !keep_double && undoubled.len() >= 3 {
            return undoubled.to_string();
        }
        return stem.to_string();
    }
    if needs_final_e(b) {
        return format!("{stem}e");
    }
    stem.to_string()
}

fn needs_final_e(b: &[u8]) -> bool {
    let n = b.len();
    if n < 2 || !b.iter().all(u8::is_ascii_lowercase) {
        return false;
    }
    let last = b[n - 1];
    let prev = b[n - 2];
    if matches!(last, b'v' | b'c') {
        return true;
    }
    if last == b'z' && matches!(prev, b'i' | b'y' | b'u') {
        return true;
    }
    if last == b'l' && !is_vowel(prev) && !matches!(prev, b'l' | b'r' | b'w') {
        return true;
    }
    if last == b'g' && (matches!(prev, b'd' | b'r') || (prev == b'n' && n > 4 && b[n - 3] == b'a')) {
        return true;
    }
    if last == b's' && (matches!(prev, b'r' | b'p' | b'n') || (prev == b'u' && (n == 2 || !is_vowel(b[n - 3])))) {
        return true;
    }
    // Single-syllable consonant-vowel-consonant stems: hop → hope.
    let vowel_groups = b
        .iter()
        .enumerate()
        .filter(|&(i, &c)| is_vowel(c) && (i == 0 || !is_vowel(b[i - 1])))
        .count();
    n >= 3
        && vowel_groups == 1
        && !is_vowel(last)
        && !matches!(last, b'w' | b'x' | b'y')
        && is_vowel(prev)
        && !is_vowel(b[n - 3])
}

/// One verb + PP construction found under a VP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VpConstruction {
    pub verb: VerbLemma,
    pub prep: Preposition,
    pub head_noun: Option<String>,
    pub has_direct_object: bool,
}

fn base_label(label: &str) -> &str {
    label.split(['-', '=']).next().unwrap_or(label)
}

fn is_noun_tag(tag: &str) -> bool {
    matches!(tag, "NN" | "NNS" | "NNP" | "NNPS")
}

fn np_head(np: &ParseTree) -> Option<String> {
    if let Some(leaf) = np
        .children
        .iter()
        .rev()
        .find(|c| c.is_leaf() && is_noun_tag(&c.label))
    {
        return leaf.token.as_ref().map(|t| t.to_lowercase());
    }
    np.children
        .iter()
        .find(|c| !c.is_leaf() && base_label(&c.label) == "NP")
        .and_then(np_head)
}

/// Records every (head verb, sister PP) pair under each VP. The head verb is
/// the first `VB*` preterminal child of the VP; the PP must open with an
/// `IN`/`TO` preterminal.
pub fn extract_vp_constructions(tree: &ParseTree, lemmatizer: &Lemmatizer) -> Vec<VpConstruction> {
    let mut out = Vec::new();
    for node in tree.nodes() {
        if node.is_leaf() || base_label(&node.label) != "VP" {
            continue;
        }
        let Some(head) = node
            .children
            .iter()
            .find(|c| c.is_leaf() && c.label.starts_with("VB"))
        else {
            continue;
        };
        let form = head.token.as_deref().unwrap_or_default();
        let Ok(verb) = VerbLemma::new(lemmatizer.lemmatize(form, &head.label)) else {
            continue;
        };
        let mut seen_np = false;
        for child in &node.children {
            match base_label(&child.label) {
                "NP" if !child.is_leaf() => seen_np = true,
                "PP" if !child.is_leaf() => {
                    let Some(p_leaf) = child
                        .children
                        .iter()
                        .find(|c| c.is_leaf() && matches!(c.label.as_str(), "IN" | "TO"))
                    else {
                        continue;
                    };
                    let Ok(prep) = Preposition::new(p_leaf.token.as_deref().unwrap_or_default())
                    else {
                        continue;
                    };
                    let head_noun = child
                        .children
                        .iter()
                        .find(|c| !c.is_leaf() && base_label(&c.label) == "NP")
                        .and_then(np_head);
                    out.push(VpConstruction {
                        verb: verb.clone(),
                        prep,
                        head_noun,
                        has_direct_object: seen_np,
                    });
                }
                _ => {}
            }
        }
    }
    out
}
