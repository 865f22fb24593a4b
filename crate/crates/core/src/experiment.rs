//! End-to-end runs: load, weight, train, checkpoint, evaluate, and compare.
//!
//! Every random stream derives from the master seed:
//!
//! | stream                 | seed                |
//! |------------------------|---------------------|
//! | embedding init         | `seed`              |
//! | pair sampler           | `seed + 1`          |
//! | split `i`              | `seed + 100 + i`    |
//!
//! LINE trains its second-order half as a separate run with master seed
//! `seed + 1` (init `seed + 1`, sampler `seed + 2`).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::centrality::{to_loss_weights, to_sampling_distribution, CentralityWeights, Measure};
use crate::error::{Error, Result};
use crate::evaluator::{learning_curve, ClassifierOptions, EvalReport, Snapshot, SplitSpec};
use crate::graph::{load_edge_list, Graph, LabeledNodes};
use crate::io;
use crate::sampler::{pair_stream, Method, MethodConfig, NegativeDistribution, SourceWeighting, TrainingPair};
use crate::scalar::Scalar;
use crate::trainer::{init_embeddings, train, TrainConfig, UpdateRule};

/// Environment variable capping evaluation/centrality worker threads.
pub const THREADS_ENV: &str = "CENTROGRAPH_THREADS";

pub const INIT_SEED_OFFSET: u64 = 0;
pub const SAMPLER_SEED_OFFSET: u64 = 1;
pub const SPLIT_SEED_OFFSET: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingMethod {
    DeepWalk,
    Node2vec,
    Line,
    Nbne,
}

impl EmbeddingMethod {
    /// Sampler methods trained for this embedding, concatenated in order.
    pub fn parts(self) -> &'static [Method] {
        match self {
            EmbeddingMethod::DeepWalk => &[Method::DeepWalk],
            EmbeddingMethod::Node2vec => &[Method::Node2vec],
            EmbeddingMethod::Nbne => &[Method::Nbne],
            EmbeddingMethod::Line => &[Method::Line1, Method::Line2],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EmbeddingMethod::DeepWalk => "deepwalk",
            EmbeddingMethod::Node2vec => "node2vec",
            EmbeddingMethod::Line => "line",
            EmbeddingMethod::Nbne => "nbne",
        }
    }
}

impl FromStr for EmbeddingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "deepwalk" => EmbeddingMethod::DeepWalk,
            "node2vec" => EmbeddingMethod::Node2vec,
            "line" => EmbeddingMethod::Line,
            "nbne" => EmbeddingMethod::Nbne,
            other => return Err(Error::invalid(format!("unknown method `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Centrality shapes the source distribution.
    #[default]
    Sample,
    /// Uniform sources, centrality scales the positive term.
    Weight,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sample" => Ok(Mode::Sample),
            "weight" => Ok(Mode::Weight),
            other => Err(Error::invalid(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

/// Fully resolved experiment configuration; written as `config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub edges: PathBuf,
    pub labels: Option<PathBuf>,
    pub method: EmbeddingMethod,
    /// `None` is the uniform baseline.
    pub centrality: Option<Measure>,
    pub mode: Mode,
    pub smoothing: f64,
    pub context: usize,
    pub walk_length: usize,
    pub p: f64,
    pub q: f64,
    pub dim: usize,
    pub examples: u64,
    pub batch: u64,
    pub lr: f64,
    pub update: UpdateRule,
    pub negatives: NegativeDistribution,
    pub precision: Precision,
    pub train_frac: f64,
    pub stratified: bool,
    pub seeds: usize,
    pub reg: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub dump_pairs: bool,
    pub write_checkpoints: bool,
}

impl RunConfig {
    pub fn new(edges: impl Into<PathBuf>, labels: Option<PathBuf>) -> Self {
        Self {
            edges: edges.into(),
            labels,
            method: EmbeddingMethod::DeepWalk,
            centrality: None,
            mode: Mode::Sample,
            smoothing: 0.01,
            context: 30,
            walk_length: 40,
            p: 1.0,
            q: 1.0,
            dim: 200,
            examples: 1_000_000,
            batch: 100_000,
            lr: 0.001,
            update: UpdateRule::PerExample,
            negatives: NegativeDistribution::Uniform,
            precision: Precision::F64,
            train_frac: 0.5,
            stratified: true,
            seeds: 4,
            reg: 1.0,
            seed: 0,
            out: PathBuf::from("out"),
            dump_pairs: false,
            write_checkpoints: true,
        }
    }

    pub fn measure(&self) -> Measure {
        self.centrality.unwrap_or(Measure::Uniform)
    }

    pub fn method_config(&self, method: Method) -> MethodConfig {
        MethodConfig {
            method,
            context: self.context,
            walk_length: self.walk_length,
            p: self.p,
            q: self.q,
        }
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            train_fraction: self.train_frac,
            split_seed: self.seed + SPLIT_SEED_OFFSET,
            stratified: self.stratified,
        }
    }

    pub fn classifier_options(&self) -> ClassifierOptions {
        ClassifierOptions {
            reg: self.reg,
            ..ClassifierOptions::default()
        }
    }

    /// Per-part `(method, dim, train config, sampler seed)`.
    fn parts(&self) -> Vec<(Method, TrainConfig, u64)> {
        let parts = self.method.parts();
        let k = parts.len();
        parts
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let base = self.dim / k;
                let dim = if i + 1 == k { self.dim - base * (k - 1) } else { base };
                let master = self.seed + i as u64;
                let cfg = TrainConfig {
                    dim,
                    total: self.examples,
                    batch: self.batch,
                    learning_rate: self.lr,
                    negatives: 1,
                    seed: master + INIT_SEED_OFFSET,
                    update: self.update,
                };
                (m, cfg, master + SAMPLER_SEED_OFFSET)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < self.method.parts().len() {
            return Err(Error::Config(format!("dimension {} too small for {}", self.dim, self.method.name())));
        }
        for (m, cfg, _) in self.parts() {
            self.method_config(m).validate()?;
            cfg.validate()?;
        }
        if self.smoothing.is_nan() || self.smoothing < 0.0 {
            return Err(Error::Config("smoothing must be >= 0".into()));
        }
        if self.seeds == 0 {
            return Err(Error::Config("at least one evaluation seed is required".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Output files staged with a `.partial` suffix and renamed together on success.
struct Staging {
    dir: PathBuf,
    names: Vec<String>,
}

impl Staging {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.partial"))
    }

    fn stage(&mut self, name: &str) -> PathBuf {
        self.names.push(name.to_owned());
        self.path(name)
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.stage(name);
        io::write_text(&p, body)
    }

    fn commit(self) -> Result<()> {
        for name in &self.names {
            let from = self.path(name);
            let to = self.dir.join(name);
            fs::rename(&from, &to).map_err(|e| Error::io(&to, e))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: EvalReport,
    pub files: Vec<PathBuf>,
    /// Mean objective per checkpoint window, one vector per trained part.
    pub window_objectives: Vec<Vec<f64>>,
}

/// Runs `f` on a pool sized by `CENTROGRAPH_THREADS` when set.
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    match cap.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Executes a full run and writes `config.json`, `centrality.tsv`,
/// `embeddings_ckpt_<k>.tsv`, `embeddings_final.tsv` and `metrics.csv` into `cfg.out`.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let (graph, labels) = load_edge_list(&cfg.edges, cfg.labels.as_deref())?;
    with_thread_cap(|| match cfg.precision {
        Precision::F64 => run_loaded::<f64>(cfg, &graph, &labels),
        Precision::F32 => run_loaded::<f32>(cfg, &graph, &labels),
    })
}

/// Same as [`run_experiment`] for an already loaded graph.
pub fn run_loaded<T: Scalar>(cfg: &RunConfig, graph: &Graph, labels: &LabeledNodes) -> Result<RunOutcome> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let mut out = Staging {
        dir: cfg.out.clone(),
        names: Vec::new(),
    };
    out.text("config.json", &cfg.to_json())?;

    let weights = CentralityWeights::compute(graph, cfg.measure())?;
    out.text("centrality.tsv", &io::centrality_tsv(graph, &[&weights]))?;

    let dist;
    let lambda;
    let weighting = match cfg.mode {
        Mode::Sample => {
            dist = to_sampling_distribution(&weights, cfg.smoothing)?;
            SourceWeighting::Sample(&dist)
        }
        Mode::Weight => {
            lambda = to_loss_weights(&weights)?;
            SourceWeighting::Weight(&lambda)
        }
    };

    let n = graph.node_count();
    let mut part_snapshots: Vec<Vec<Snapshot<T>>> = Vec::new();
    let mut part_finals: Vec<Vec<Snapshot<T>>> = Vec::new();
    let mut window_objectives = Vec::new();
    for (i, (method, tcfg, sampler_seed)) in cfg.parts().into_iter().enumerate() {
        let mcfg = cfg.method_config(method);
        let stream = pair_stream(graph, mcfg, weighting, tcfg.total, sampler_seed)?.with_negatives(cfg.negatives)?;
        if cfg.dump_pairs {
            let name = if i == 0 { "pairs.tsv".to_owned() } else { format!("pairs_{method}.tsv") };
            let pairs: Vec<TrainingPair> = pair_stream(graph, mcfg, weighting, tcfg.total, sampler_seed)?
                .with_negatives(cfg.negatives)?
                .collect();
            let path = out.stage(&name);
            io::write_pairs(&path, graph, &pairs)?;
        }
        let mut state = init_embeddings::<T>(n, &tcfg);
        let mut snaps = Vec::new();
        let summary = train(&mut state, stream, &tcfg, |ck| {
            snaps.push(Snapshot {
                index: ck.index,
                examples: ck.examples,
                dim: ck.state.dim(),
                features: ck.state.input().to_vec(),
            });
            Ok(())
        })?;
        window_objectives.push(summary.window_objectives);
        part_snapshots.push(snaps);
        part_finals.push(vec![Snapshot {
            index: 0,
            examples: summary.examples,
            dim: state.dim(),
            features: state.input().to_vec(),
        }]);
    }
    let snapshots = concat_parts(part_snapshots, n);
    let final_state = concat_parts(part_finals, n).pop().expect("at least one part");

    if cfg.write_checkpoints {
        for s in &snapshots {
            let p = out.stage(&format!("embeddings_ckpt_{}.tsv", s.index));
            io::write_embeddings(&p, graph.ids(), s.dim, &s.features)?;
        }
    }
    let final_path = out.stage("embeddings_final.tsv");
    io::write_embeddings(&final_path, graph.ids(), final_state.dim, &final_state.features)?;

    let report = if labels.labeled_count() > 0 && !snapshots.is_empty() {
        learning_curve(&snapshots, labels, &cfg.split_spec(), cfg.seeds, &cfg.classifier_options())?
    } else {
        EvalReport::default()
    };
    out.text("metrics.csv", &report.to_csv())?;

    let files = out.names.iter().map(|n| cfg.out.join(n)).collect();
    out.commit()?;
    Ok(RunOutcome {
        report,
        files,
        window_objectives,
    })
}

fn concat_parts<T: Scalar>(parts: Vec<Vec<Snapshot<T>>>, n: usize) -> Vec<Snapshot<T>> {
    let mut parts = parts.into_iter();
    let Some(first) = parts.next() else {
        return Vec::new();
    };
    let rest: Vec<Vec<Snapshot<T>>> = parts.collect();
    if rest.is_empty() {
        return first;
    }
    first
        .into_iter()
        .enumerate()
        .map(|(k, head)| {
            let others: Vec<&Snapshot<T>> = rest.iter().map(|p| &p[k]).collect();
            let dim = head.dim + others.iter().map(|s| s.dim).sum::<usize>();
            let mut features = Vec::with_capacity(n * dim);
            for v in 0..n {
                features.extend_from_slice(&head.features[v * head.dim..(v + 1) * head.dim]);
                for s in &others {
                    features.extend_from_slice(&s.features[v * s.dim..(v + 1) * s.dim]);
                }
            }
            Snapshot {
                index: head.index,
                examples: head.examples,
                dim,
                features,
            }
        })
        .collect()
}

/// Evaluates saved embedding files against a label file. Rows are matched
/// by node ID; checkpoint `k` (1-based, in argument order) is credited with
/// `k · batch` examples.
pub fn evaluate_files(
    embeddings: &[PathBuf],
    label_path: &Path,
    batch: u64,
    spec: &SplitSpec,
    seeds: usize,
    opts: &ClassifierOptions,
) -> Result<EvalReport> {
    let tables: Vec<io::EmbeddingTable<f64>> = embeddings
        .iter()
        .map(|p| io::read_embeddings(p))
        .collect::<Result<_>>()?;
    let first = tables.first().ok_or_else(|| Error::invalid("no embedding files given"))?;
    // Node order of the first table; labels are re-indexed to it.
    let mut builder = crate::graph::GraphBuilder::new();
    for id in &first.ids {
        builder.node(id);
    }
    let text = fs::read_to_string(label_path).map_err(|e| Error::io(label_path, e))?;
    let mut class_names: Vec<String> = Vec::new();
    let mut labels = vec![None; first.ids.len()];
    for (i, line) in text.lines().enumerate() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() || tokens[0].starts_with('#') {
            continue;
        }
        if tokens.len() < 2 {
            return Err(Error::Parse {
                path: label_path.to_path_buf(),
                line: i + 1,
                msg: "expected a node ID and a label".into(),
            });
        }
        let name = tokens[tokens.len() - 1];
        let c = match class_names.iter().position(|c| c == name) {
            Some(c) => c,
            None => {
                class_names.push(name.to_owned());
                class_names.len() - 1
            }
        };
        if let Some(pos) = first.ids.iter().position(|id| id == tokens[0]) {
            labels[pos] = Some(c);
        }
    }
    let labels = LabeledNodes::new(labels, class_names)?;
    let snapshots: Vec<Snapshot<f64>> = tables
        .iter()
        .enumerate()
        .map(|(k, t)| {
            if t.ids != first.ids {
                return Err(Error::invalid("embedding files list different nodes"));
            }
            Ok(Snapshot {
                index: k as u64 + 1,
                examples: (k as u64 + 1) * batch,
                dim: t.dim,
                features: t.rows.clone(),
            })
        })
        .collect::<Result<_>>()?;
    with_thread_cap(|| learning_curve(&snapshots, &labels, spec, seeds, opts))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub method: String,
    pub centrality: String,
    pub final_mean: f64,
    pub final_std: f64,
    /// Mean micro-F1 minus the baseline's, per checkpoint.
    pub deltas: Vec<f64>,
    /// Examples needed to reach the baseline's final score, as a fraction of
    /// the baseline's total. `None` if never reached.
    pub speedup: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub examples: Vec<u64>,
    pub baseline: usize,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("run,method,centrality,final_mean,final_std,speedup");
        for e in &self.examples {
            write!(out, ",delta@{e}").unwrap();
        }
        out.push('\n');
        for r in &self.rows {
            write!(
                out,
                "{},{},{},{:.6},{:.6},{}",
                r.label,
                r.method,
                r.centrality,
                r.final_mean,
                r.final_std,
                r.speedup.map_or_else(|| "NA".to_owned(), |s| format!("{s:.4}"))
            )
            .unwrap();
            for d in &r.deltas {
                write!(out, ",{d:.6}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Final mean micro-F1 as a centrality × method grid.
    pub fn table(&self) -> String {
        let mut methods: Vec<&str> = Vec::new();
        let mut cells: BTreeMap<(&str, &str), f64> = BTreeMap::new();
        let mut measures: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !methods.contains(&r.method.as_str()) {
                methods.push(&r.method);
            }
            if !measures.contains(&r.centrality.as_str()) {
                measures.push(&r.centrality);
            }
            cells.insert((&r.centrality, &r.method), r.final_mean);
        }
        let mut out = format!("{:<10}", "metric");
        for m in &methods {
            write!(out, "{m:>12}").unwrap();
        }
        out.push('\n');
        for c in &measures {
            write!(out, "{c:<10}").unwrap();
            for m in &methods {
                match cells.get(&(*c, *m)) {
                    Some(v) => write!(out, "{v:>12.4}").unwrap(),
                    None => write!(out, "{:>12}", "-").unwrap(),
                }
            }
            out.push('\n');
        }
        out
    }
}

fn run_labels(metrics: &Path) -> (String, String) {
    let cfg = metrics
        .parent()
        .map(|d| d.join("config.json"))
        .filter(|p| p.exists())
        .and_then(|p| RunConfig::from_json_file(&p).ok());
    match cfg {
        Some(c) => {
            let measure = match (c.centrality, c.mode) {
                (None, _) | (Some(Measure::Uniform), _) => "base".to_owned(),
                (Some(m), Mode::Sample) => m.to_string(),
                (Some(m), Mode::Weight) => format!("{m}-w"),
            };
            (c.method.name().to_owned(), measure)
        }
        None => ("?".to_owned(), "?".to_owned()),
    }
}

/// Compares metrics files on a shared checkpoint grid. The first run whose
/// config marks it as a baseline is the reference; otherwise the first file.
pub fn compare_runs(paths: &[PathBuf]) -> Result<Comparison> {
    if paths.len() < 2 {
        return Err(Error::invalid("compare needs at least two metrics files"));
    }
    let reports: Vec<EvalReport> = paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            EvalReport::from_csv(&text, p)
        })
        .collect::<Result<_>>()?;
    let grid = |r: &EvalReport| r.aggregates.iter().map(|a| a.examples).collect::<Vec<_>>();
    let examples = grid(&reports[0]);
    if examples.is_empty() {
        return Err(Error::invalid(format!("{} has no aggregate rows", paths[0].display())));
    }
    let offending: Vec<String> = paths
        .iter()
        .zip(&reports)
        .filter(|(_, r)| grid(r) != examples)
        .map(|(p, _)| p.display().to_string())
        .collect();
    if !offending.is_empty() {
        return Err(Error::GridMismatch(offending.join(", ")));
    }

    let labels: Vec<(String, String)> = paths.iter().map(|p| run_labels(p)).collect();
    let baseline = labels.iter().position(|(_, c)| c == "base").unwrap_or(0);
    let base = &reports[baseline].aggregates;
    let base_final = base.last().unwrap();
    let rows = paths
        .iter()
        .zip(&reports)
        .zip(labels)
        .map(|((p, r), (method, centrality))| {
            let last = r.aggregates.last().unwrap();
            let deltas = r.aggregates.iter().zip(base).map(|(a, b)| a.mean - b.mean).collect();
            let speedup = r
                .aggregates
                .iter()
                .find(|a| a.mean >= base_final.mean)
                .map(|a| a.examples as f64 / base_final.examples as f64);
            ComparisonRow {
                label: p.display().to_string(),
                method,
                centrality,
                final_mean: last.mean,
                final_std: last.std,
                deltas,
                speedup,
            }
        })
        .collect();
    Ok(Comparison {
        examples,
        baseline,
        rows,
    })
}
