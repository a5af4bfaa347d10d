//! Penn-Treebank style bracketings.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A constituent. Leaves (preterminals) carry a token and no children.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseTree {
    pub label: String,
    pub children: Vec<ParseTree>,
    pub token: Option<String>,
}

impl ParseTree {
    pub fn leaf(label: impl Into<String>, token: impl Into<String>) -> Self {
        ParseTree {
            label: label.into(),
            children: Vec::new(),
            token: Some(token.into()),
        }
    }

    pub fn node(label: impl Into<String>, children: Vec<ParseTree>) -> Self {
        ParseTree {
            label: label.into(),
            children,
            token: None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.token.is_some()
    }

    /// Preterminals in left-to-right order.
    pub fn leaves(&self) -> Vec<&ParseTree> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a ParseTree>) {
        if self.is_leaf() {
            out.push(self);
        } else {
            for c in &self.children {
                c.collect_leaves(out);
            }
        }
    }

    pub fn tokens(&self) -> Vec<&str> {
        self.leaves()
            .into_iter()
            .filter_map(|l| l.token.as_deref())
            .collect()
    }

    /// Pre-order traversal.
    pub fn nodes(&self) -> Vec<&ParseTree> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }
}

impl fmt::Display for ParseTree {
    /// Single-space normalized bracketing.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.label)?;
        if let Some(tok) = &self.token {
            write!(f, " {tok}")?;
        }
        for c in &self.children {
            write!(f, " {c}")?;
        }
        write!(f, ")")
    }
}

pub fn parse_ptb_tree(text: &str) -> Result<ParseTree> {
    let mut p = Parser {
        src: text.as_bytes(),
        text,
        pos: 0,
    };
    p.skip_ws();
    let tree = p.tree()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input after the tree"));
    }
    Ok(tree)
}

struct Parser<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn atom(&mut self) -> &str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() || c == b'(' || c == b')' {
                break;
            }
            self.pos += 1;
        }
        &self.text[start..self.pos]
    }

    fn tree(&mut self) -> Result<ParseTree> {
        match self.peek() {
            Some(b'(') => self.pos += 1,
            Some(_) => return Err(self.error("expected `(`")),
            None => return Err(self.error("unexpected end of input")),
        }
        self.skip_ws();
        let label = match self.peek() {
            Some(b'(') | Some(b')') | None => String::new(),
            Some(_) => self.atom().to_string(),
        };
        self.skip_ws();
        let mut children = Vec::new();
        let mut token = None;
        loop {
            match self.peek() {
                None => return Err(self.error("unexpected end of input")),
                Some(b')') => {
                    if children.is_empty() && token.is_none() {
                        return Err(self.error("empty constituent"));
                    }
                    self.pos += 1;
                    break;
                }
                Some(b'(') => {
                    if token.is_some() {
                        return Err(self.error("constituent mixes a token with subtrees"));
                    }
                    children.push(self.tree()?);
                }
                Some(_) => {
                    if token.is_some() || !children.is_empty() {
                        return Err(self.error("constituent mixes a token with subtrees"));
                    }
                    token = Some(self.atom().to_string());
                }
            }
            self.skip_ws();
        }
        Ok(ParseTree {
            label,
            children,
            token,
        })
    }
}
