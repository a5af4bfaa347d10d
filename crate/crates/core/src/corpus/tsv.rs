//! Tab-separated dataset files (UTF-8, LF line endings, no header).
//!
//! * pairs: `verb<TAB>prep<TAB>label`
//! * sentences: `verb<TAB>prep<TAB>head_noun<TAB>has_dobj<TAB>label<TAB>tokens`
//! * gradient items: `item_id<TAB>verb<TAB>prep<TAB>head_noun<TAB>has_dobj<TAB>tokens`
//!
//! `has_dobj` is `1` or `0`; tokens are space-joined; an empty `head_noun`
//! field means none.

use std::io::{BufRead, Write};

use super::types::{ArgLabel, LabeledPair, Preposition, SentenceExample, VerbLemma};
use crate::error::{Error, Result};

pub fn write_pairs_tsv<W: Write>(mut w: W, pairs: &[LabeledPair]) -> Result<()> {
    for p in pairs {
        writeln!(w, "{}\t{}\t{}", p.verb, p.prep, p.label)?;
    }
    Ok(())
}

fn fields(line: &str, expected: usize, lineno: usize) -> Result<Vec<&str>> {
    let f: Vec<&str> = line.split('\t').collect();
    if f.len() != expected {
        return Err(Error::format(format!(
            "line {lineno}: {} fields, expected {expected}",
            f.len()
        )));
    }
    Ok(f)
}

fn parse_flag(s: &str, lineno: usize) -> Result<bool> {
    match s {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(Error::format(format!(
            "line {lineno}: has_dobj must be 0 or 1, got `{other}`"
        ))),
    }
}

fn lines<R: BufRead>(r: R) -> impl Iterator<Item = (usize, Result<String>)> {
    r.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.map_err(Error::from)))
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.is_empty()))
}

pub fn read_pairs_tsv<R: BufRead>(r: R) -> Result<Vec<LabeledPair>> {
    lines(r)
        .map(|(n, line)| {
            let line = line?;
            let f = fields(&line, 3, n)?;
            Ok(LabeledPair {
                verb: VerbLemma::new(f[0])?,
                prep: Preposition::new(f[1])?,
                label: f[2].parse()?,
            })
        })
        .collect()
}

pub fn write_sentences_tsv<W: Write>(mut w: W, examples: &[SentenceExample]) -> Result<()> {
    for e in examples {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}",
            e.verb,
            e.prep,
            e.head_noun.as_deref().unwrap_or(""),
            u8::from(e.has_direct_object),
            e.label,
            e.tokens.join(" ")
        )?;
    }
    Ok(())
}

pub fn read_sentences_tsv<R: BufRead>(r: R) -> Result<Vec<SentenceExample>> {
    lines(r)
        .map(|(n, line)| {
            let line = line?;
            let f = fields(&line, 6, n)?;
            Ok(SentenceExample {
                verb: VerbLemma::new(f[0])?,
                prep: Preposition::new(f[1])?,
                head_noun: (!f[2].is_empty()).then(|| f[2].to_string()),
                has_direct_object: parse_flag(f[3], n)?,
                label: f[4].parse()?,
                tokens: f[5].split_whitespace().map(str::to_string).collect(),
            })
        })
        .collect()
}

/// One sentence of the gradient judgment set, before scores are attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradientItem {
    pub item_id: String,
    /// Carries [`ArgLabel::Unobserved`]; gradient items have no class label.
    pub sentence: SentenceExample,
}

pub fn read_gradient_items<R: BufRead>(r: R) -> Result<Vec<GradientItem>> {
    lines(r)
        .map(|(n, line)| {
            let line = line?;
            let f = fields(&line, 6, n)?;
            Ok(GradientItem {
                item_id: f[0].to_string(),
                sentence: SentenceExample {
                    verb: VerbLemma::new(f[1])?,
                    prep: Preposition::new(f[2])?,
                    head_noun: (!f[3].is_empty()).then(|| f[3].to_lowercase()),
                    has_direct_object: parse_flag(f[4], n)?,
                    label: ArgLabel::Unobserved,
                    tokens: f[5].split_whitespace().map(str::to_string).collect(),
                },
            })
        })
        .collect()
}
