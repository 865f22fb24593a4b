//! Positive/negative training-pair generation.
//!
//! Each pair is drawn independently: a source node from the source
//! distribution, a context node from the method's proximity notion, and one
//! uniform negative. DeepWalk and node2vec take a fresh short walk per pair;
//! NBNE and first-order LINE use a direct neighbour; second-order LINE uses a
//! node at distance two.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::centrality::SamplingDistribution;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Deterministic RNG used for every random stream in the crate.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    DeepWalk,
    Node2vec,
    Nbne,
    /// First-order LINE half: direct neighbours.
    Line1,
    /// Second-order LINE half: nodes at distance two.
    Line2,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::DeepWalk => "deepwalk",
            Method::Node2vec => "node2vec",
            Method::Nbne => "nbne",
            Method::Line1 => "line1",
            Method::Line2 => "line2",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "deepwalk" => Method::DeepWalk,
            "node2vec" => Method::Node2vec,
            "nbne" => Method::Nbne,
            "line1" => Method::Line1,
            "line2" => Method::Line2,
            other => return Err(Error::invalid(format!("unknown method `{other}`"))),
        })
    }
}

/// Noise distribution for negatives. Only `Uniform` is used by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NegativeDistribution {
    #[default]
    Uniform,
    /// `P(v) ∝ degree(v)^{3/4}`.
    Unigram,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub method: Method,
    pub context: usize,
    pub walk_length: usize,
    pub p: f64,
    pub q: f64,
}

impl MethodConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            context: 30,
            walk_length: 40,
            p: 1.0,
            q: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.context < 1 {
            return Err(Error::invalid("context size must be >= 1"));
        }
        if self.walk_length < 2 {
            return Err(Error::invalid("walk length must be >= 2"));
        }
        if !(self.p > 0.0 && self.q > 0.0) {
            return Err(Error::invalid("node2vec p and q must be > 0"));
        }
        if matches!(self.method, Method::DeepWalk | Method::Node2vec) && self.context >= self.walk_length {
            return Err(Error::invalid(format!(
                "context {} must be smaller than walk length {}",
                self.context, self.walk_length
            )));
        }
        Ok(())
    }
}

/// One positive `(source, context)` pair with a single negative node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingPair {
    pub source: usize,
    pub context: usize,
    pub negative: usize,
    pub weight: f64,
}

/// How centrality enters training.
#[derive(Debug, Clone, Copy)]
pub enum SourceWeighting<'a> {
    /// Sources drawn from the distribution; every pair has weight 1.
    Sample(&'a SamplingDistribution),
    /// Sources drawn uniformly; each pair is weighted by `λ(source)`.
    Weight(&'a [f64]),
}

/// Second-order transition probabilities over `neighbors(cur)` after arriving
/// from `prev`: weight `1/p` to return, `1` for common neighbours of `prev`,
/// `1/q` otherwise. Normalized to sum 1.
pub fn node2vec_transition(g: &Graph, prev: usize, cur: usize, p: f64, q: f64) -> Result<Vec<f64>> {
    let nbrs = g.neighbors(cur)?;
    g.neighbors(prev)?;
    if nbrs.is_empty() {
        return Err(Error::invalid(format!("node {cur} has no neighbours")));
    }
    if !g.has_edge(cur, prev) {
        return Err(Error::invalid(format!("walk cannot arrive at {cur} from non-neighbour {prev}")));
    }
    let w: Vec<f64> = nbrs.iter().map(|&x| bias(g, prev, x, p, q)).collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / total).collect())
}

#[inline]
fn bias(g: &Graph, prev: usize, x: usize, p: f64, q: f64) -> f64 {
    if x == prev {
        1.0 / p
    } else if g.has_edge(prev, x) {
        1.0
    } else {
        1.0 / q
    }
}

/// Uniform negative in `0..n`. Collisions with the positive pair are allowed.
pub fn sample_negative<R: Rng + ?Sized>(n: usize, rng: &mut R) -> usize {
    rng.gen_range(0..n)
}

/// Draws positive pairs for one method from a fixed source distribution.
#[derive(Debug, Clone)]
pub struct PositiveSampler<'g> {
    graph: &'g Graph,
    sources: SamplingDistribution,
    cfg: MethodConfig,
}

impl<'g> PositiveSampler<'g> {
    /// Restricts `dist` to nodes that can produce a context (degree ≥ 1, and
    /// for second-order LINE a non-empty distance-2 set) and renormalizes.
    pub fn new(graph: &'g Graph, dist: &SamplingDistribution, cfg: MethodConfig) -> Result<Self> {
        cfg.validate()?;
        if dist.len() != graph.node_count() {
            return Err(Error::LengthMismatch(dist.len(), graph.node_count()));
        }
        if graph.edge_count() == 0 {
            return Err(Error::invalid("graph has no edges"));
        }
        let sources = match cfg.method {
            Method::Line2 => {
                if (0..graph.node_count()).all(|v| graph.dist2_unchecked(v).is_empty()) {
                    return Err(Error::NoDistanceTwoContext);
                }
                dist.restricted(|v| !graph.dist2_unchecked(v).is_empty())?
            }
            _ => dist.restricted(|v| graph.degree(v) > 0)?,
        };
        Ok(Self { graph, sources, cfg })
    }

    pub fn source_distribution(&self) -> &SamplingDistribution {
        &self.sources
    }

    pub fn config(&self) -> &MethodConfig {
        &self.cfg
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let source = self.sources.sample(rng);
        (source, self.context_for(source, rng))
    }

    /// Context for a fixed source. Walks that end back at the source are redrawn.
    pub fn context_for<R: Rng + ?Sized>(&self, source: usize, rng: &mut R) -> usize {
        let g = self.graph;
        match self.cfg.method {
            Method::Nbne | Method::Line1 => uniform_pick(g.adj(source), rng),
            Method::Line2 => uniform_pick(g.dist2_unchecked(source), rng),
            Method::DeepWalk | Method::Node2vec => loop {
                let steps = rng.gen_range(1..=self.cfg.context);
                let end = self.walk(source, steps, rng);
                if end != source {
                    break end;
                }
            },
        }
    }

    fn walk<R: Rng + ?Sized>(&self, start: usize, steps: usize, rng: &mut R) -> usize {
        let g = self.graph;
        let mut prev = start;
        let mut cur = uniform_pick(g.adj(start), rng);
        for _ in 1..steps {
            let next = match self.cfg.method {
                Method::Node2vec => self.biased_step(prev, cur, rng),
                _ => uniform_pick(g.adj(cur), rng),
            };
            prev = cur;
            cur = next;
        }
        cur
    }

    fn biased_step<R: Rng + ?Sized>(&self, prev: usize, cur: usize, rng: &mut R) -> usize {
        let g = self.graph;
        let (p, q) = (self.cfg.p, self.cfg.q);
        let nbrs = g.adj(cur);
        if p == 1.0 && q == 1.0 {
            return uniform_pick(nbrs, rng);
        }
        let total: f64 = nbrs.iter().map(|&x| bias(g, prev, x, p, q)).sum();
        let mut u = rng.gen::<f64>() * total;
        for &x in nbrs {
            u -= bias(g, prev, x, p, q);
            if u < 0.0 {
                return x;
            }
        }
        *nbrs.last().unwrap()
    }
}

#[inline]
fn uniform_pick<R: Rng + ?Sized>(items: &[usize], rng: &mut R) -> usize {
    items[rng.gen_range(0..items.len())]
}

/// Single positive draw; builds a sampler for the call.
pub fn sample_positive<R: Rng + ?Sized>(
    g: &Graph,
    dist: &SamplingDistribution,
    cfg: MethodConfig,
    rng: &mut R,
) -> Result<(usize, usize)> {
    Ok(PositiveSampler::new(g, dist, cfg)?.sample(rng))
}

/// Finite stream of training pairs.
#[derive(Debug)]
pub struct PairStream<'g> {
    sampler: PositiveSampler<'g>,
    weights: Option<Vec<f64>>,
    negatives: Option<SamplingDistribution>,
    rng: SeededRng,
    remaining: u64,
}

impl PairStream<'_> {
    /// Replaces uniform negatives with the `degree^{3/4}` noise distribution.
    pub fn with_negatives(mut self, kind: NegativeDistribution) -> Result<Self> {
        self.negatives = match kind {
            NegativeDistribution::Uniform => None,
            NegativeDistribution::Unigram => {
                let g = self.sampler.graph;
                let w: Vec<f64> = (0..g.node_count()).map(|v| (g.degree(v) as f64).powf(0.75)).collect();
                Some(SamplingDistribution::from_weights(&w)?)
            }
        };
        Ok(self)
    }
}

impl Iterator for PairStream<'_> {
    type Item = TrainingPair;

    fn next(&mut self) -> Option<TrainingPair> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let (source, context) = self.sampler.sample(&mut self.rng);
        let negative = match &self.negatives {
            None => sample_negative(self.sampler.graph.node_count(), &mut self.rng),
            Some(d) => d.sample(&mut self.rng),
        };
        let weight = self.weights.as_ref().map_or(1.0, |w| w[source]);
        Some(TrainingPair {
            source,
            context,
            negative,
            weight,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.remaining as usize;
        (r, Some(r))
    }
}

impl ExactSizeIterator for PairStream<'_> {}

/// Builds a reproducible stream of `count` pairs seeded by `seed`.
pub fn pair_stream<'g>(
    g: &'g Graph,
    cfg: MethodConfig,
    weighting: SourceWeighting<'_>,
    count: u64,
    seed: u64,
) -> Result<PairStream<'g>> {
    let n = g.node_count();
    let (sampler, weights) = match weighting {
        SourceWeighting::Sample(dist) => (PositiveSampler::new(g, dist, cfg)?, None),
        SourceWeighting::Weight(lambda) => {
            if lambda.len() != n {
                return Err(Error::LengthMismatch(lambda.len(), n));
            }
            if lambda.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(Error::invalid("loss weights must be finite and nonnegative"));
            }
            let uniform = SamplingDistribution::uniform(n)?;
            (PositiveSampler::new(g, &uniform, cfg)?, Some(lambda.to_vec()))
        }
    };
    Ok(PairStream {
        sampler,
        weights,
        negatives: None,
        rng: seeded_rng(seed),
        remaining: count,
    })
}
