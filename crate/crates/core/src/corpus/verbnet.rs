//! VerbNet class files → [`FrameInventory`].
//!
//! A verb's frames are those of the class node listing it as a member plus
//! those of every ancestor node; frames of a subclass never flow up to the
//! parent's members. A PREP restriction is read from its literal `value`
//! list when present, otherwise from its `SELRESTRS` features expanded
//! through the [`FeaturalPrepMap`].

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use roxmltree::{Document, Node, ParsingOptions};

use super::types::{is_single_word, FeaturalPrepMap, FrameInventory, Preposition, VerbLemma};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerbNetOptions {
    /// Keep verbs that are members of more than one class, unioning frames.
    pub include_multi_class: bool,
}

/// Reads every `.xml` file in `dir`, sorted by file name.
pub fn read_verbnet_dir(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut docs = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("xml") {
            continue;
        }
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        docs.push((name, bytes));
    }
    docs.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(docs)
}

struct Membership {
    classes: BTreeSet<String>,
    preps: BTreeSet<Preposition>,
}

pub fn parse_verbnet(
    documents: &[(String, Vec<u8>)],
    featural_map: &FeaturalPrepMap,
    options: VerbNetOptions,
) -> Result<FrameInventory> {
    let mut members: BTreeMap<VerbLemma, Membership> = BTreeMap::new();
    let mut universe = BTreeSet::new();
    for (doc_id, bytes) in documents {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Xml {
            document: doc_id.clone(),
            offset: e.valid_up_to(),
            message: "invalid UTF-8".into(),
        })?;
        let opts = ParsingOptions {
            allow_dtd: true,
            ..ParsingOptions::default()
        };
        let doc = Document::parse_with_options(text, opts).map_err(|e| {
            let pos = e.pos();
            Error::Xml {
                document: doc_id.clone(),
                offset: byte_offset(text, pos.row as usize, pos.col as usize),
                message: e.to_string(),
            }
        })?;
        let root = doc.root_element();
        if root.tag_name().name() != "VNCLASS" {
            return Err(Error::Xml {
                document: doc_id.clone(),
                offset: root.range().start,
                message: format!("root element is <{}>, expected <VNCLASS>", root.tag_name().name()),
            });
        }
        let mut ctx = Walk {
            doc_id,
            featural_map,
            members: &mut members,
            universe: &mut universe,
        };
        ctx.visit(root, &BTreeSet::new())?;
    }

    let entries = members
        .into_iter()
        .filter(|(_, m)| options.include_multi_class || m.classes.len() == 1)
        .map(|(verb, m)| (verb, m.preps))
        .collect();
    Ok(FrameInventory::new(entries, universe))
}

struct Walk<'a> {
    doc_id: &'a str,
    featural_map: &'a FeaturalPrepMap,
    members: &'a mut BTreeMap<VerbLemma, Membership>,
    universe: &'a mut BTreeSet<Preposition>,
}

impl Walk<'_> {
    fn visit(&mut self, class: Node<'_, '_>, inherited: &BTreeSet<Preposition>) -> Result<()> {
        let class_id = class.attribute("ID").unwrap_or("").to_string();
        let mut preps = inherited.clone();
        for frames in children(class, "FRAMES") {
            for frame in children(frames, "FRAME") {
                for syntax in children(frame, "SYNTAX") {
                    for prep in syntax.descendants().filter(|n| n.has_tag_name("PREP")) {
                        let found = self.prep_set(prep)?;
                        self.universe.extend(found.iter().cloned());
                        preps.extend(found);
                    }
                }
            }
        }
        for list in children(class, "MEMBERS") {
            for member in children(list, "MEMBER") {
                let Some(name) = member.attribute("name") else {
                    continue;
                };
                let Ok(verb) = VerbLemma::new(name.trim()) else {
                    continue;
                };
                let entry = self.members.entry(verb).or_insert_with(|| Membership {
                    classes: BTreeSet::new(),
                    preps: BTreeSet::new(),
                });
                entry.classes.insert(class_id.clone());
                entry.preps.extend(preps.iter().cloned());
            }
        }
        for subs in children(class, "SUBCLASSES") {
            for sub in children(subs, "VNSUBCLASS") {
                self.visit(sub, &preps)?;
            }
        }
        Ok(())
    }

    fn prep_set(&self, prep: Node<'_, '_>) -> Result<BTreeSet<Preposition>> {
        if let Some(value) = prep.attribute("value").filter(|v| !v.trim().is_empty()) {
            return Ok(value
                .split_whitespace()
                .filter(|p| is_single_word(p))
                .filter_map(|p| Preposition::new(p).ok())
                .collect());
        }
        match children(prep, "SELRESTRS").next() {
            Some(restrs) => self.restriction_set(restrs),
            None => Ok(BTreeSet::new()),
        }
    }

    /// `logic="or"` unions the positive features; otherwise the positive
    /// features are intersected. Negative features are subtracted.
    fn restriction_set(&self, restrs: Node<'_, '_>) -> Result<BTreeSet<Preposition>> {
        let is_or = restrs.attribute("logic") == Some("or");
        let mut positive: Option<BTreeSet<Preposition>> = None;
        let mut negative = BTreeSet::new();
        for child in restrs.children().filter(Node::is_element) {
            let (set, plus) = match child.tag_name().name() {
                "SELRESTR" => {
                    let Some(feature) = child.attribute("type") else {
                        continue;
                    };
                    let set = self.featural_map.get(feature).cloned().ok_or_else(|| {
                        Error::UnmappedFeature {
                            feature: feature.to_string(),
                            document: self.doc_id.to_string(),
                        }
                    })?;
                    (set, child.attribute("Value") != Some("-"))
                }
                "SELRESTRS" => (self.restriction_set(child)?, true),
                _ => continue,
            };
            if plus {
                positive = Some(match positive {
                    None => set,
                    Some(acc) if is_or => acc.union(&set).cloned().collect(),
                    Some(acc) => acc.intersection(&set).cloned().collect(),
                });
            } else {
                negative.extend(set);
            }
        }
        let mut out = positive.unwrap_or_default();
        out.retain(|p| !negative.contains(p));
        Ok(out)
    }
}

fn children<'a, 'input>(
    node: Node<'a, 'input>,
    tag: &'static str,
) -> impl Iterator<Item = Node<'a, 'input>> {
    node.children().filter(move |n| n.has_tag_name(tag))
}

/// 1-based row/column (in characters) → byte offset.
fn byte_offset(text: &str, row: usize, col: usize) -> usize {
    let mut offset = 0;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if i + 1 == row {
            let within: usize = line
                .char_indices()
                .nth(col.saturating_sub(1))
                .map_or(line.len(), |(b, _)| b);
            return offset + within;
        }
        offset += line.len();
    }
    text.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map() -> FeaturalPrepMap {
        FeaturalPrepMap::parse("spatial\tin,on,under\nsrc\tfrom,off\nloc\tin,on,at\n").unwrap()
    }

    fn doc(id: &str, xml: &str) -> (String, Vec<u8>) {
        (id.to_string(), xml.as_bytes().to_vec())
    }

    fn preps(inv: &FrameInventory, verb: &str) -> Vec<String> {
        inv.preps_for(&VerbLemma::new(verb).unwrap())
            .unwrap()
            .iter()
            .map(|p| p.to_string())
            .collect()
    }

    const RUMMAGE: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<!DOCTYPE VNCLASS SYSTEM "vn_class-3.dtd">
<VNCLASS ID="search-35.2">
  <MEMBERS>
    <MEMBER name="rummage" wn="" grouping=""/>
    <MEMBER name="Search" wn="" grouping=""/>
  </MEMBERS>
  <FRAMES>
    <FRAME>
      <SYNTAX>
        <NP value="Agent"/><VERB/>
        <PREP value="about under for"><SELRESTRS/></PREP>
        <NP value="Location"/>
      </SYNTAX>
    </FRAME>
    <FRAME>
      <SYNTAX><NP value="Agent"/><VERB/><PREP value="all_over"/><NP value="Location"/></SYNTAX>
    </FRAME>
  </FRAMES>
  <SUBCLASSES>
    <VNSUBCLASS ID="search-35.2-1">
      <MEMBERS><MEMBER name="poke"/></MEMBERS>
      <FRAMES><FRAME><SYNTAX>
        <PREP><SELRESTRS><SELRESTR Value="+" type="spatial"/></SELRESTRS></PREP>
      </SYNTAX></FRAME></FRAMES>
    </VNSUBCLASS>
  </SUBCLASSES>
</VNCLASS>"#;

    #[test]
    fn literal_preps_and_subclass_inheritance() {
        let inv = parse_verbnet(&[doc("search.xml", RUMMAGE)], &map(), Default::default()).unwrap();
        assert_eq!(preps(&inv, "rummage"), vec!["about", "for", "under"]);
        assert_eq!(preps(&inv, "search"), vec!["about", "for", "under"]);
        // Subclass member inherits parent frames plus featural expansion.
        assert_eq!(
            preps(&inv, "poke"),
            vec!["about", "for", "in", "on", "under"]
        );
        let universe: Vec<_> = inv.prep_universe().iter().map(|p| p.as_str()).collect();
        assert_eq!(universe, vec!["about", "for", "in", "on", "under"]);
    }

    #[test]
    fn empty_document_list_gives_empty_inventory() {
        let inv = parse_verbnet(&[], &map(), Default::default()).unwrap();
        assert!(inv.is_empty());
        assert!(inv.prep_universe().is_empty());
    }

    #[test]
    fn featural_logic_and_negation() {
        let xml = r#"<VNCLASS ID="x-1"><MEMBERS><MEMBER name="go"/></MEMBERS><FRAMES>
          <FRAME><SYNTAX><PREP><SELRESTRS logic="or">
            <SELRESTR Value="+" type="src"/><SELRESTR Value="+" type="loc"/>
          </SELRESTRS></PREP></SYNTAX></FRAME>
          <FRAME><SYNTAX><PREP><SELRESTRS>
            <SELRESTR Value="+" type="spatial"/><SELRESTR Value="-" type="loc"/>
          </SELRESTRS></PREP></SYNTAX></FRAME>
        </FRAMES></VNCLASS>"#;
        let inv = parse_verbnet(&[doc("x.xml", xml)], &map(), Default::default()).unwrap();
        assert_eq!(preps(&inv, "go"), vec!["at", "from", "in", "off", "on", "under"]);
    }

    #[test]
    fn unmapped_feature_is_named() {
        let xml = r#"<VNCLASS ID="x-1"><MEMBERS><MEMBER name="go"/></MEMBERS><FRAMES>
          <FRAME><SYNTAX><PREP><SELRESTRS><SELRESTR Value="+" type="dest_conf"/></SELRESTRS></PREP></SYNTAX></FRAME>
        </FRAMES></VNCLASS>"#;
        let err = parse_verbnet(&[doc("x.xml", xml)], &map(), Default::default()).unwrap_err();
        match err {
            Error::UnmappedFeature { feature, .. } => assert_eq!(feature, "dest_conf"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_xml_reports_document_and_offset() {
        let xml = "<VNCLASS ID=\"a\">\n  <MEMBERS>\n</VNCLASS>";
        let err = parse_verbnet(&[doc("bad.xml", xml)], &map(), Default::default()).unwrap_err();
        match err {
            Error::Xml { document, offset, .. } => {
                assert_eq!(document, "bad.xml");
                assert!(offset > 0 && offset <= xml.len());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn multi_class_verbs_excluded_unless_requested() {
        let a = r#"<VNCLASS ID="a-1"><MEMBERS><MEMBER name="run"/><MEMBER name="jog"/></MEMBERS>
          <FRAMES><FRAME><SYNTAX><PREP value="to"/></SYNTAX></FRAME></FRAMES></VNCLASS>"#;
        let b = r#"<VNCLASS ID="b-1"><MEMBERS><MEMBER name="run"/></MEMBERS>
          <FRAMES><FRAME><SYNTAX><PREP value="for"/></SYNTAX></FRAME></FRAMES></VNCLASS>"#;
        let docs = [doc("a.xml", a), doc("b.xml", b)];
        let inv = parse_verbnet(&docs, &map(), Default::default()).unwrap();
        assert!(inv.preps_for(&VerbLemma::new("run").unwrap()).is_none());
        assert_eq!(preps(&inv, "jog"), vec!["to"]);
        // The universe still counts prepositions seen in any frame.
        assert_eq!(inv.prep_universe().len(), 2);

        let all = parse_verbnet(
            &docs,
            &map(),
            VerbNetOptions {
                include_multi_class: true,
            },
        )
        .unwrap();
        assert_eq!(preps(&all, "run"), vec!["for", "to"]);
    }

    #[test]
    fn byte_offset_handles_multibyte() {
        let text = "ab\ncé\nx";
        assert_eq!(byte_offset(text, 2, 3), 3 + 1 + 2);
        assert_eq!(byte_offset(text, 1, 1), 0);
    }
}
