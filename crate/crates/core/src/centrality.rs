//! Node centrality measures and their conversion into positive-source
//! sampling distributions or per-node loss weights.
//!
//! All measures are exact. Shortest-path measures (betweenness, load) process
//! sources in fixed-size chunks on the rayon pool and reduce the chunk sums in
//! source order, so results do not depend on thread scheduling.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

const SOURCE_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Measure {
    #[serde(rename = "degree")]
    Degree,
    #[serde(rename = "bc")]
    Betweenness,
    #[serde(rename = "clos")]
    Closeness,
    #[serde(rename = "pr")]
    PageRank,
    #[serde(rename = "load")]
    Load,
    #[serde(rename = "uniform")]
    Uniform,
}

impl Measure {
    pub const ALL: [Measure; 6] = [
        Measure::Degree,
        Measure::Betweenness,
        Measure::Closeness,
        Measure::PageRank,
        Measure::Load,
        Measure::Uniform,
    ];

    /// Short name used on the command line and in output files.
    pub fn short_name(self) -> &'static str {
        match self {
            Measure::Degree => "degree",
            Measure::Betweenness => "bc",
            Measure::Closeness => "clos",
            Measure::PageRank => "pr",
            Measure::Load => "load",
            Measure::Uniform => "uniform",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "degree" | "deg" => Measure::Degree,
            "bc" | "betweenness" => Measure::Betweenness,
            "clos" | "closeness" => Measure::Closeness,
            "pr" | "pagerank" => Measure::PageRank,
            "load" => Measure::Load,
            "uniform" | "none" | "base" => Measure::Uniform,
            other => return Err(Error::invalid(format!("unknown centrality `{other}`"))),
        })
    }
}

/// Per-node nonnegative scores for a single measure.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityWeights {
    pub measure: Measure,
    pub scores: Vec<f64>,
}

impl CentralityWeights {
    pub fn new(measure: Measure, scores: Vec<f64>) -> Result<Self> {
        if let Some(bad) = scores.iter().find(|s| !s.is_finite() || **s < 0.0) {
            return Err(Error::invalid(format!("centrality score {bad} is not a finite nonnegative value")));
        }
        Ok(Self { measure, scores })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            measure: Measure::Uniform,
            scores: vec![1.0; n],
        }
    }

    /// Computes `measure` with default parameters (PageRank: damping 0.85, tol 1e-10, 200 iterations).
    pub fn compute(g: &Graph, measure: Measure) -> Result<Self> {
        match measure {
            Measure::Degree => degree_centrality(g),
            Measure::Betweenness => Ok(betweenness_centrality(g)),
            Measure::Closeness => Ok(closeness_centrality(g)),
            Measure::PageRank => pagerank(g, 0.85, 1e-10, 200),
            Measure::Load => Ok(load_centrality(g)),
            Measure::Uniform => Ok(Self::uniform(g.node_count())),
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// `degree(v) / (n - 1)`.
pub fn degree_centrality(g: &Graph) -> Result<CentralityWeights> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::invalid("degree centrality needs at least two nodes"));
    }
    let norm = 1.0 / (n - 1) as f64;
    Ok(CentralityWeights {
        measure: Measure::Degree,
        scores: (0..n).map(|v| g.degree(v) as f64 * norm).collect(),
    })
}

/// Normalizer turning an unordered-pair sum into the `[0, 1]` scale.
fn pair_normalizer(n: usize) -> f64 {
    if n < 3 {
        0.0
    } else {
        2.0 / ((n - 1) as f64 * (n - 2) as f64)
    }
}

/// Sums per-source contributions over fixed chunks in parallel, then reduces
/// the chunk totals sequentially in chunk order.
fn ordered_source_sum<F>(n: usize, per_source: F) -> Vec<f64>
where
    F: Fn(usize, &mut Vec<f64>) + Sync,
{
    let starts: Vec<usize> = (0..n).step_by(SOURCE_CHUNK).collect();
    let partials: Vec<Vec<f64>> = starts
        .par_iter()
        .map(|&start| {
            let mut acc = vec![0.0; n];
            for s in start..(start + SOURCE_CHUNK).min(n) {
                per_source(s, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total
}

/// Shortest-path DAG rooted at a source: BFS order, distances and path counts.
struct Bfs {
    order: Vec<usize>,
    dist: Vec<i64>,
    sigma: Vec<f64>,
}

fn bfs_dag(g: &Graph, s: usize) -> Bfs {
    let n = g.node_count();
    let mut dist = vec![-1i64; n];
    let mut sigma = vec![0.0; n];
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    dist[s] = 0;
    sigma[s] = 1.0;
    queue.push_back(s);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in g.adj(v) {
            if dist[w] < 0 {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
            }
        }
    }
    Bfs { order, dist, sigma }
}

/// Exact shortest-path betweenness (Brandes accumulation), endpoints
/// excluded, normalized by `2 / ((n-1)(n-2))`.
pub fn betweenness_centrality(g: &Graph) -> CentralityWeights {
    let n = g.node_count();
    let raw = ordered_source_sum(n, |s, acc| {
        let Bfs { order, dist, sigma } = bfs_dag(g, s);
        let mut delta = vec![0.0; n];
        for &w in order.iter().rev() {
            for &v in g.adj(w) {
                if dist[v] == dist[w] - 1 {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
            }
            if w != s {
                acc[w] += delta[w];
            }
        }
    });
    // Every unordered pair was counted from both ends.
    let scale = pair_normalizer(n) * 0.5;
    CentralityWeights {
        measure: Measure::Betweenness,
        scores: raw.into_iter().map(|x| x * scale).collect(),
    }
}

/// Exact load centrality: every ordered pair `(s, t)` routes one unit from
/// `s` to `t`, split equally at each hop among the neighbours one step closer
/// to `t`. Endpoints excluded; normalized by `2 / ((n-1)(n-2))` after halving
/// the ordered-pair total.
pub fn load_centrality(g: &Graph) -> CentralityWeights {
    let n = g.node_count();
    let raw = ordered_source_sum(n, |t, acc| {
        // Rooted at the target: packets flow downhill in distance-to-t.
        let Bfs { order, dist, .. } = bfs_dag(g, t);
        let mut carried = vec![0.0; n];
        for &x in order.iter().rev() {
            if x == t {
                continue;
            }
            let through = carried[x];
            acc[x] += through;
            let total = through + 1.0;
            let closer = g.adj(x).iter().filter(|&&y| dist[y] == dist[x] - 1);
            let k = closer.clone().count() as f64;
            for &y in closer {
                carried[y] += total / k;
            }
        }
    });
    let scale = pair_normalizer(n) * 0.5;
    CentralityWeights {
        measure: Measure::Load,
        scores: raw.into_iter().map(|x| x * scale).collect(),
    }
}

/// Closeness with the component-scaled correction for disconnected graphs:
/// `(r / (n-1)) * (r / Σ d(v, u))`, where `r` counts nodes reachable from `v`.
/// Isolated nodes score 0.
pub fn closeness_centrality(g: &Graph) -> CentralityWeights {
    let n = g.node_count();
    let scores = (0..n)
        .into_par_iter()
        .map(|v| {
            let (reach, total) = g
                .bfs_distances(v)
                .into_iter()
                .flatten()
                .filter(|&d| d > 0)
                .fold((0usize, 0usize), |(r, s), d| (r + 1, s + d));
            if reach == 0 || n < 2 {
                0.0
            } else {
                let r = reach as f64;
                (r / (n - 1) as f64) * (r / total as f64)
            }
        })
        .collect();
    CentralityWeights {
        measure: Measure::Closeness,
        scores,
    }
}

/// Power-iteration PageRank on the symmetrized graph with uniform teleport;
/// mass at degree-0 nodes is redistributed uniformly.
pub fn pagerank(g: &Graph, damping: f64, tol: f64, max_iter: usize) -> Result<CentralityWeights> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::invalid(format!("damping {damping} outside (0, 1)")));
    }
    let n = g.node_count();
    if n == 0 {
        return Ok(CentralityWeights {
            measure: Measure::PageRank,
            scores: Vec::new(),
        });
    }
    let nf = n as f64;
    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let dangling: f64 = (0..n).filter(|&v| g.degree(v) == 0).map(|v| x[v]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        for (v, out) in next.iter_mut().enumerate() {
            let inflow: f64 = g.adj(v).iter().map(|&u| x[u] / g.degree(u) as f64).sum();
            *out = base + damping * inflow;
        }
        residual = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if residual < tol {
            return Ok(CentralityWeights {
                measure: Measure::PageRank,
                scores: x,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Normalized node distribution with a cumulative table for `O(log n)` draws.
#[derive(Debug, Clone)]
pub struct SamplingDistribution {
    probs: Vec<f64>,
    table: WeightedIndex<f64>,
}

impl SamplingDistribution {
    /// Builds a distribution proportional to `weights`. Zero entries are
    /// allowed but at least one must be positive.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.is_empty() || !total.is_finite() || total <= 0.0 {
            return Err(Error::invalid("sampling weights must have a positive finite sum"));
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let table = WeightedIndex::new(&probs)
            .map_err(|e| Error::invalid(format!("sampling weights: {e}")))?;
        Ok(Self { probs, table })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_weights(&vec![1.0; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Same distribution with nodes rejected by `keep` removed and the rest renormalized.
    pub fn restricted(&self, keep: impl Fn(usize) -> bool) -> Result<Self> {
        let w: Vec<f64> = self
            .probs
            .iter()
            .enumerate()
            .map(|(v, &p)| if keep(v) { p } else { 0.0 })
            .collect();
        Self::from_weights(&w)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.table.sample(rng)
    }
}

/// `p(v) ∝ score(v) + ε` with `ε = smoothing · mean(score)` (or `smoothing / n`
/// when every score is zero).
pub fn to_sampling_distribution(w: &CentralityWeights, smoothing: f64) -> Result<SamplingDistribution> {
    if !smoothing.is_finite() || smoothing < 0.0 {
        return Err(Error::invalid(format!("smoothing {smoothing} must be >= 0")));
    }
    let n = w.scores.len();
    if n == 0 {
        return Err(Error::invalid("empty centrality vector"));
    }
    if (w.scores.iter().all(|&s| s == w.scores[0]) && w.scores[0] > 0.0) || w.measure == Measure::Uniform {
        // Constant scores are uniform for every smoothing; build it exactly.
        return SamplingDistribution::uniform(n);
    }
    let sum: f64 = w.scores.iter().sum();
    if sum == 0.0 && smoothing == 0.0 {
        return Err(Error::invalid("all centrality scores are zero and smoothing is 0"));
    }
    let eps = if sum > 0.0 {
        smoothing * sum / n as f64
    } else {
        smoothing / n as f64
    };
    let shifted: Vec<f64> = w.scores.iter().map(|s| s + eps).collect();
    SamplingDistribution::from_weights(&shifted)
}

/// Mean-one loss weights `λ(v) = score(v) · n / Σ score`.
pub fn to_loss_weights(w: &CentralityWeights) -> Result<Vec<f64>> {
    let sum: f64 = w.scores.iter().sum();
    if sum.is_nan() || sum <= 0.0 {
        return Err(Error::invalid("loss weights need at least one positive score"));
    }
    let scale = w.scores.len() as f64 / sum;
    Ok(w.scores.iter().map(|s| s * scale).collect())
}
