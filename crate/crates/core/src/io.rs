//! Text formats: embedding TSV, centrality TSV and pair dumps.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::centrality::CentralityWeights;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sampler::TrainingPair;
use crate::scalar::Scalar;

/// Writes `n d` then one `id<TAB>x_1<TAB>…<TAB>x_d` line per node. Values use
/// the shortest representation that parses back to the same float.
pub fn write_embeddings<T: Scalar>(path: &Path, ids: &[String], dim: usize, rows: &[T]) -> Result<()> {
    if rows.len() != ids.len() * dim {
        return Err(Error::LengthMismatch(rows.len(), ids.len() * dim));
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut line = String::new();
    let res = (|| -> std::io::Result<()> {
        writeln!(w, "{} {}", ids.len(), dim)?;
        for (id, row) in ids.iter().zip(rows.chunks(dim.max(1))) {
            line.clear();
            line.push_str(id);
            for x in row {
                write!(line, "\t{x}").unwrap();
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

/// Embedding table read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    pub ids: Vec<String>,
    pub dim: usize,
    pub rows: Vec<T>,
}

pub fn read_embeddings<T: Scalar>(path: &Path) -> Result<EmbeddingTable<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let perr = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| perr(1, "empty file".into()))?;
    let head: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| perr(1, format!("bad header token `{t}`"))))
        .collect::<Result<_>>()?;
    let [n, dim] = head[..] else {
        return Err(perr(1, "header must be `n d`".into()));
    };
    let mut ids = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n * dim);
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = line.split('\t');
        let id = tokens.next().unwrap_or_default().to_owned();
        let before = rows.len();
        for t in tokens {
            rows.push(t.trim().parse::<T>().map_err(|_| perr(i + 1, format!("bad value `{t}`")))?);
        }
        if rows.len() - before != dim {
            return Err(perr(i + 1, format!("expected {dim} values, found {}", rows.len() - before)));
        }
        ids.push(id);
    }
    if ids.len() != n {
        return Err(perr(1, format!("header promises {n} rows, found {}", ids.len())));
    }
    Ok(EmbeddingTable { ids, dim, rows })
}

/// `node_id<TAB>measure<TAB>score` for every node, in dense index order.
pub fn centrality_tsv(g: &Graph, weights: &[&CentralityWeights]) -> String {
    let mut out = String::new();
    for w in weights {
        for (v, s) in w.scores.iter().enumerate() {
            writeln!(out, "{}\t{}\t{:e}", g.id(v), w.measure, s).unwrap();
        }
    }
    out
}

/// Audit dump: `source<TAB>context<TAB>negative<TAB>weight` with original IDs.
pub fn write_pairs<'a>(path: &Path, g: &Graph, pairs: impl IntoIterator<Item = &'a TrainingPair>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = (|| -> std::io::Result<()> {
        for p in pairs {
            writeln!(w, "{}\t{}\t{}\t{}", g.id(p.source), g.id(p.context), g.id(p.negative), p.weight)?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
