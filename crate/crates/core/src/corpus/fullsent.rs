//! Full-sentence dataset variants mined from NLI-style JSON-lines corpora.

use std::collections::{HashMap, HashSet};
use std::io;

use log::warn;
use serde::{Deserialize, Serialize};

use super::extract::{extract_vp_constructions, Lemmatizer};
use super::ptb::parse_ptb_tree;
use super::types::{ArgLabel, LabeledPair, SentenceExample};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FullSentenceMode {
    /// Sentences inherit the pair label; pairs never seen keep their label
    /// as pair-only examples.
    KeepLabels,
    /// Pairs never seen become pair-only UNOBSERVED examples.
    Ternary,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildStats {
    pub lines: usize,
    pub skipped_lines: usize,
    pub sentences_scanned: usize,
    pub matched_sentences: usize,
    pub duplicate_sentences: usize,
    pub unmatched_pairs: usize,
}

#[derive(Deserialize)]
struct CorpusLine {
    sentence1: Option<String>,
    sentence2: Option<String>,
    sentence1_parse: Option<String>,
    sentence2_parse: Option<String>,
}

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Scans both sentences of every corpus line for constructions matching a
/// pair. Output is grouped by pair (input order), sentences in corpus order;
/// a pair keeps a sentence only once by whitespace-normalized text.
pub fn build_fullsentence_dataset<I>(
    corpus_lines: I,
    pairs: &[LabeledPair],
    mode: FullSentenceMode,
    lemmatizer: &Lemmatizer,
) -> Result<(Vec<SentenceExample>, BuildStats)>
where
    I: IntoIterator<Item = io::Result<String>>,
{
    let index: HashMap<(&str, &str), usize> = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| ((p.verb.as_str(), p.prep.as_str()), i))
        .collect();
    let mut found: Vec<Vec<SentenceExample>> = vec![Vec::new(); pairs.len()];
    let mut seen: Vec<HashSet<String>> = vec![HashSet::new(); pairs.len()];
    let mut stats = BuildStats::default();

    for (lineno, line) in corpus_lines.into_iter().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        stats.lines += 1;
        let record: CorpusLine = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                warn!("corpus line {}: invalid JSON ({e}); skipped", lineno + 1);
                stats.skipped_lines += 1;
                continue;
            }
        };
        let fields = [
            (record.sentence1, record.sentence1_parse),
            (record.sentence2, record.sentence2_parse),
        ];
        let mut usable = Vec::new();
        let mut bad = false;
        for (sentence, parse) in fields {
            match (sentence, parse) {
                (Some(s), Some(p)) => match parse_ptb_tree(&p) {
                    Ok(tree) => usable.push((s, tree)),
                    Err(e) => {
                        warn!("corpus line {}: {e}", lineno + 1);
                        bad = true;
                    }
                },
                (None, None) => {}
                _ => {
                    warn!("corpus line {}: sentence and parse fields do not pair up", lineno + 1);
                    bad = true;
                }
            }
        }
        if bad || usable.is_empty() {
            stats.skipped_lines += 1;
            continue;
        }
        for (sentence, tree) in usable {
            stats.sentences_scanned += 1;
            let norm = normalize_ws(&sentence);
            let tokens: Vec<String> = tree.tokens().into_iter().map(str::to_string).collect();
            for c in extract_vp_constructions(&tree, lemmatizer) {
                let Some(&i) = index.get(&(c.verb.as_str(), c.prep.as_str())) else {
                    continue;
                };
                if !seen[i].insert(norm.clone()) {
                    stats.duplicate_sentences += 1;
                    continue;
                }
                stats.matched_sentences += 1;
                found[i].push(SentenceExample {
                    tokens: tokens.clone(),
                    verb: c.verb,
                    prep: c.prep,
                    head_noun: c.head_noun,
                    has_direct_object: c.has_direct_object,
                    label: pairs[i].label,
                });
            }
        }
    }

    let mut out = Vec::new();
    for (pair, examples) in pairs.iter().zip(found) {
        if examples.is_empty() {
            stats.unmatched_pairs += 1;
            let label = match mode {
                FullSentenceMode::KeepLabels => pair.label,
                FullSentenceMode::Ternary => ArgLabel::Unobserved,
            };
            out.push(SentenceExample::pair_only(
                pair.verb.clone(),
                pair.prep.clone(),
                label,
            ));
        } else {
            out.extend(examples);
        }
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Preposition, VerbLemma};

    fn pair(v: &str, p: &str, label: ArgLabel) -> LabeledPair {
        LabeledPair {
            verb: VerbLemma::new(v).unwrap(),
            prep: Preposition::new(p).unwrap(),
            label,
        }
    }

    fn line(s1: &str, p1: &str, s2: &str, p2: &str) -> io::Result<String> {
        Ok(serde_json::json!({
            "sentence1": s1, "sentence1_parse": p1,
            "sentence2": s2, "sentence2_parse": p2,
        })
        .to_string())
    }

    const HID: &str = "(ROOT (S (NP (DT The) (NNS children)) (VP (VBD hid) (PP (IN in) (NP (DT a) (NN hurry)))) (. .)))";
    const OPENED: &str = "(ROOT (S (NP (NNP John)) (VP (VBD opened) (NP (DT the) (NN window)) (PP (IN with) (NP (NNP Mary)))) (. .)))";

    #[test]
    fn empty_corpus_ternary_marks_everything_unobserved() {
        let pairs = vec![pair("hide", "in", ArgLabel::Adj), pair("open", "with", ArgLabel::Arg)];
        let (out, stats) = build_fullsentence_dataset(
            Vec::<io::Result<String>>::new(),
            &pairs,
            FullSentenceMode::Ternary,
            &Lemmatizer::default(),
        )
        .unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|e| e.label == ArgLabel::Unobserved && e.tokens.is_empty()));
        assert_eq!(stats.unmatched_pairs, 2);
    }

    #[test]
    fn matches_dedups_and_keeps_labels() {
        let pairs = vec![
            pair("hide", "in", ArgLabel::Adj),
            pair("open", "with", ArgLabel::Arg),
            pair("open", "on", ArgLabel::Arg),
        ];
        let lines = vec![
            line("The children hid in a hurry .", HID, "John opened the window with Mary .", OPENED),
            // Same sentence again, extra whitespace: deduplicated.
            line("The  children hid in a hurry .", HID, "John opened the window with Mary .", OPENED),
            Ok("{not json".into()),
            Ok(serde_json::json!({"sentence1": "x", "sentence2": "y", "sentence2_parse": "(S (VB y))"}).to_string()),
        ];
        let (out, stats) = build_fullsentence_dataset(
            lines.iter().map(|l| Ok(l.as_ref().unwrap().clone())),
            &pairs,
            FullSentenceMode::KeepLabels,
            &Lemmatizer::default(),
        )
        .unwrap();
        assert_eq!(stats.lines, 4);
        assert_eq!(stats.skipped_lines, 2);
        assert_eq!(stats.matched_sentences, 2);
        assert_eq!(stats.duplicate_sentences, 2);
        assert_eq!(out.len(), 3);
        assert_eq!(out[0].head_noun.as_deref(), Some("hurry"));
        assert_eq!(out[0].label, ArgLabel::Adj);
        assert!(out[1].has_direct_object);
        assert!(out[1].tokens.iter().any(|t| t == "opened"));
        assert_eq!(out[2].label, ArgLabel::Arg);
        assert!(out[2].tokens.is_empty());

        let (ternary, _) =
            build_fullsentence_dataset(lines, &pairs, FullSentenceMode::Ternary, &Lemmatizer::default())
                .unwrap();
        assert_eq!(ternary[2].label, ArgLabel::Unobserved);
        assert_eq!(ternary[1].label, ArgLabel::Arg);
    }
}
