use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use flate2::read::GzDecoder;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingFormat {
    /// `"<vocab> <dim>\n"` then `token 0x20 <dim little-endian f32>` records.
    Word2VecBin,
    /// `token v1 ... vd` per line with an optional `"<count> <dim>"` header.
    TextVec,
}

impl EmbeddingFormat {
    /// `.bin` (optionally `.bin.gz`) is binary, anything else text.
    pub fn from_path(path: &Path) -> Self {
        let name = path.to_string_lossy();
        let name = name.strip_suffix(".gz").unwrap_or(&name);
        if name.ends_with(".bin") {
            EmbeddingFormat::Word2VecBin
        } else {
            EmbeddingFormat::TextVec
        }
    }
}

impl FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "word2vec_bin" | "bin" | "binary" => Ok(EmbeddingFormat::Word2VecBin),
            "text_vec" | "text" | "txt" | "vec" => Ok(EmbeddingFormat::TextVec),
            other => Err(Error::validation(format!("unknown embedding format `{other}`"))),
        }
    }
}

impl fmt::Display for EmbeddingFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingFormat::Word2VecBin => "word2vec_bin",
            EmbeddingFormat::TextVec => "text_vec",
        })
    }
}

/// What [`EmbeddingTable::lookup`] does when a token is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OovPolicy {
    #[default]
    Zero,
    Error,
    LowercaseFallback,
}

impl FromStr for OovPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(OovPolicy::Zero),
            "error" => Ok(OovPolicy::Error),
            "lowercase_fallback" | "lowercase" => Ok(OovPolicy::LowercaseFallback),
            other => Err(Error::validation(format!("unknown OOV policy `{other}`"))),
        }
    }
}

/// Token vectors in file order, stored as `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    name: String,
    dim: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    duplicates: usize,
}

impl EmbeddingTable {
    pub fn new(name: impl Into<String>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("embedding dimension must be positive"));
        }
        Ok(EmbeddingTable {
            name: name.into(),
            dim,
            tokens: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            duplicates: 0,
        })
    }

    /// Adds or replaces a vector. A repeated token keeps its first position
    /// but takes the new values.
    pub fn insert(&mut self, token: &str, vector: &[f64]) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::format(format!(
                "token `{token}` has {} components, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if let Some(bad) = vector.iter().position(|v| !v.is_finite()) {
            return Err(Error::format(format!(
                "token `{token}` has a non-finite component at index {bad}"
            )));
        }
        match self.index.get(token) {
            Some(&row) => {
                self.data[row * self.dim..(row + 1) * self.dim].copy_from_slice(vector);
                self.duplicates += 1;
            }
            None => {
                self.index.insert(token.to_string(), self.tokens.len());
                self.tokens.push(token.to_string());
                self.data.extend_from_slice(vector);
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Number of records that overwrote an earlier record for the same token.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index
            .get(token)
            .map(|&row| &self.data[row * self.dim..(row + 1) * self.dim])
    }

    pub fn lookup(&self, token: &str, policy: OovPolicy) -> Result<Vec<f64>> {
        if let Some(v) = self.get(token) {
            return Ok(v.to_vec());
        }
        match policy {
            OovPolicy::Zero => Ok(vec![0.0; self.dim]),
            OovPolicy::Error => Err(Error::Oov(format!(
                "`{token}` is not in embedding table `{}`",
                self.name
            ))),
            OovPolicy::LowercaseFallback => Ok(self
                .get(&token.to_lowercase())
                .map_or_else(|| vec![0.0; self.dim], <[f64]>::to_vec)),
        }
    }
}

/// Opens `path`, transparently gunzipping when the file starts with the gzip
/// magic bytes.
pub fn load_embeddings(path: &Path, format: EmbeddingFormat) -> Result<EmbeddingTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let gz = {
        let head = reader.fill_buf().map_err(|e| Error::io(path, e))?;
        head.starts_with(&[0x1f, 0x8b])
    };
    let name = path.display().to_string();
    if gz {
        read_embeddings(BufReader::new(GzDecoder::new(reader)), format, name)
    } else {
        read_embeddings(reader, format, name)
    }
}

pub fn read_embeddings<R: BufRead>(
    reader: R,
    format: EmbeddingFormat,
    name: impl Into<String>,
) -> Result<EmbeddingTable> {
    let table = match format {
        EmbeddingFormat::Word2VecBin => read_binary(reader, name.into())?,
        EmbeddingFormat::TextVec => read_text(reader, name.into())?,
    };
    if table.duplicates() > 0 {
        log::warn!(
            "{}: {} duplicate tokens, last occurrence kept",
            table.name(),
            table.duplicates()
        );
    }
    Ok(table)
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let a = it.next()?.parse().ok()?;
    let b = it.next()?.parse().ok()?;
    it.next().is_none().then_some((a, b))
}

fn read_binary<R: BufRead>(mut reader: R, name: String) -> Result<EmbeddingTable> {
    let mut header = Vec::new();
    reader.read_until(b'\n', &mut header)?;
    let header = String::from_utf8_lossy(&header);
    let (vocab, dim) = parse_header(&header)
        .ok_or_else(|| Error::format(format!("{name}: bad word2vec header `{}`", header.trim())))?;
    let mut table = EmbeddingTable::new(name, dim)?;
    let mut raw = vec![0u8; 4 * dim];
    let mut vector = vec![0.0; dim];
    let mut token = Vec::new();
    for record in 0..vocab {
        token.clear();
        reader.read_until(b' ', &mut token)?;
        if token.last() != Some(&b' ') {
            return Err(Error::format(format!(
                "{}: file ends after {record} of {vocab} records",
                table.name
            )));
        }
        token.pop();
        // Some writers end each record with a newline.
        let start = token.iter().position(|&b| b != b'\n').unwrap_or(token.len());
        let word = std::str::from_utf8(&token[start..])
            .map_err(|_| Error::format(format!("{}: record {record} is not UTF-8", table.name)))?
            .to_string();
        reader.read_exact(&mut raw).map_err(|_| {
            Error::format(format!("{}: truncated vector for token `{word}`", table.name))
        })?;
        for (v, b) in vector.iter_mut().zip(raw.chunks_exact(4)) {
            *v = f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]]));
        }
        table.insert(&word, &vector)?;
    }
    Ok(table)
}

fn read_text<R: BufRead>(reader: R, name: String) -> Result<EmbeddingTable> {
    let mut table: Option<EmbeddingTable> = None;
    let mut declared = None;
    let mut rows = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        if i == 0 {
            if let Some(h) = parse_header(line) {
                declared = Some(h);
                table = Some(EmbeddingTable::new(name.clone(), h.1)?);
                continue;
            }
        }
        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let token = fields.next().unwrap_or_default();
        let vector = fields
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    Error::format(format!("{name}: token `{token}` has non-numeric value `{f}`"))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let t = match &mut table {
            Some(t) => t,
            None => table.insert(EmbeddingTable::new(name.clone(), vector.len())?),
        };
        t.insert(token, &vector)?;
        rows += 1;
    }
    let table = table.ok_or_else(|| Error::format(format!("{name}: no vectors")))?;
    if let Some((count, _)) = declared {
        if count != rows {
            return Err(Error::format(format!(
                "{name}: header declares {count} rows, found {rows}"
            )));
        }
    }
    Ok(table)
}

/// Writes the table in word2vec binary format (values narrowed to `f32`).
pub fn write_word2vec_bin<W: Write>(mut w: W, table: &EmbeddingTable) -> Result<()> {
    writeln!(w, "{} {}", table.len(), table.dim())?;
    for token in table.tokens() {
        w.write_all(token.as_bytes())?;
        w.write_all(b" ")?;
        for &v in table.get(token).expect("token from table") {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_text_vec<W: Write>(mut w: W, table: &EmbeddingTable, header: bool) -> Result<()> {
    if header {
        writeln!(w, "{} {}", table.len(), table.dim())?;
    }
    for token in table.tokens() {
        write!(w, "{token}")?;
        for v in table.get(token).expect("token from table") {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
