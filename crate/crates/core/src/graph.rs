//! Undirected, unweighted graph with dense node indices and original string IDs.
//!
//! Adjacency is stored in compressed sparse row form. Every neighbour list is
//! sorted and free of duplicates and self-loops. Citation files are directed;
//! loading symmetrizes them.

use std::collections::{HashMap, VecDeque};
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    /// Number of edge records read from the source, before deduplication.
    raw_edges: usize,
    dist2: Vec<OnceLock<Box<[usize]>>>,
}

/// Class label per dense node index. Nodes without a label are `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledNodes {
    labels: Vec<Option<usize>>,
    class_names: Vec<String>,
}

/// Interns string IDs into dense indices in first-seen order and collects edges.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    raw_edges: usize,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_owned());
        self.index.insert(id.to_owned(), i);
        i
    }

    /// Records an edge between two IDs. Self-loops count as a raw record but are dropped.
    pub fn edge(&mut self, a: &str, b: &str) {
        let u = self.node(a);
        let v = self.node(b);
        self.raw_edges += 1;
        if u != v {
            self.edges.push((u, v));
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn build(self) -> Graph {
        let n = self.ids.len();
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            lists[u].push(v);
            lists[v].push(u);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(2 * self.edges.len());
        offsets.push(0);
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        Graph {
            offsets,
            targets,
            ids: self.ids,
            index: self.index,
            raw_edges: self.raw_edges,
            dist2: (0..n).map(|_| OnceLock::new()).collect(),
        }
    }
}

impl Graph {
    /// Graph on nodes `0..n` whose IDs are the decimal indices.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.node(&i.to_string());
        }
        for &(u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) outside 0..{n}");
            b.edge(&u.to_string(), &v.to_string());
        }
        b.build()
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    /// Undirected edge count after symmetrization, deduplication and self-loop removal.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Number of edge lines read from the input, before any cleanup.
    pub fn raw_edge_count(&self) -> usize {
        self.raw_edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Unchecked neighbour slice; panics on out-of-range `v`.
    #[inline]
    pub fn adj(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn neighbors(&self, v: usize) -> Result<&[usize]> {
        self.check(v)?;
        Ok(self.adj(v))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj(u).binary_search(&v).is_ok()
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Nodes at shortest-path distance exactly two, sorted. Computed on first
    /// request and cached per node.
    pub fn nodes_at_distance_two(&self, v: usize) -> Result<&[usize]> {
        self.check(v)?;
        Ok(self.dist2_unchecked(v))
    }

    pub(crate) fn dist2_unchecked(&self, v: usize) -> &[usize] {
        self.dist2[v].get_or_init(|| {
            let mut out: Vec<usize> = self
                .adj(v)
                .iter()
                .flat_map(|&u| self.adj(u).iter().copied())
                .filter(|&w| w != v && !self.has_edge(v, w))
                .collect();
            out.sort_unstable();
            out.dedup();
            out.into_boxed_slice()
        })
    }

    /// Hop distances from `source`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &w in self.adj(v) {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn check(&self, v: usize) -> Result<()> {
        if v < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                index: v,
                n: self.node_count(),
            })
        }
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.offsets == other.offsets
            && self.targets == other.targets
            && self.ids == other.ids
    }
}

impl LabeledNodes {
    pub fn new(labels: Vec<Option<usize>>, class_names: Vec<String>) -> Result<Self> {
        if class_names.is_empty() {
            return Err(Error::invalid("at least one class is required"));
        }
        if let Some(bad) = labels.iter().flatten().find(|&&c| c >= class_names.len()) {
            return Err(Error::invalid(format!(
                "label {bad} outside 0..{}",
                class_names.len()
            )));
        }
        Ok(Self {
            labels,
            class_names,
        })
    }

    /// Empty labelling for `n` nodes.
    pub fn unlabeled(n: usize) -> Self {
        Self {
            labels: vec![None; n],
            class_names: Vec::new(),
        }
    }

    pub fn label(&self, v: usize) -> Option<usize> {
        self.labels.get(v).copied().flatten()
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_name(&self, c: usize) -> &str {
        &self.class_names[c]
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// `(node, class)` for every labelled node, ascending by node index.
    pub fn labeled(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(v, l)| l.map(|c| (v, c)))
    }

    pub fn labeled_count(&self) -> usize {
        self.labels.iter().flatten().count()
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            None
        } else {
            Some((i + 1, t.split_whitespace().collect()))
        }
    })
}

/// Reads a citation edge list and an optional label file.
///
/// Edge lines hold exactly two node IDs; label lines hold a node ID first and
/// the class token last, with anything in between ignored. Node indices are
/// assigned in order of first appearance, edge file before label file.
pub fn load_edge_list(edge_path: &Path, label_path: Option<&Path>) -> Result<(Graph, LabeledNodes)> {
    let mut builder = GraphBuilder::new();
    for (line, tokens) in content_lines(&read(edge_path)?) {
        if tokens.len() != 2 {
            return Err(Error::Parse {
                path: edge_path.to_path_buf(),
                line,
                msg: format!("expected 2 tokens, found {}", tokens.len()),
            });
        }
        builder.edge(tokens[0], tokens[1]);
    }

    let mut assigned: Vec<(usize, usize, usize)> = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut class_index: HashMap<String, usize> = HashMap::new();
    if let Some(label_path) = label_path {
        for (line, tokens) in content_lines(&read(label_path)?) {
            if tokens.len() < 2 {
                return Err(Error::Parse {
                    path: label_path.to_path_buf(),
                    line,
                    msg: "expected a node ID and a label".into(),
                });
            }
            let v = builder.node(tokens[0]);
            let name = tokens[tokens.len() - 1];
            let c = *class_index.entry(name.to_owned()).or_insert_with(|| {
                class_names.push(name.to_owned());
                class_names.len() - 1
            });
            assigned.push((v, c, line));
        }
    }

    let graph = builder.build();
    let mut labels = vec![None; graph.node_count()];
    for (v, c, line) in assigned {
        match labels[v] {
            Some(prev) if prev != c => {
                return Err(Error::Parse {
                    path: label_path.unwrap().to_path_buf(),
                    line,
                    msg: format!("node `{}` has two different labels", graph.id(v)),
                })
            }
            _ => labels[v] = Some(c),
        }
    }
    let labels = LabeledNodes {
        labels,
        class_names,
    };
    Ok((graph, labels))
}
