//! Node-classification evaluation of embedding checkpoints.
//!
//! A multinomial logistic regression is fit on the embeddings of a stratified
//! training split and scored by micro-F1 on the remaining labelled nodes.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LabeledNodes;
use crate::sampler::seeded_rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub split_seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.5,
            split_seed: 100,
            stratified: true,
        }
    }
}

/// Splits labelled nodes into disjoint train/test sets, both ascending.
///
/// Stratified: per class, `floor(fraction · size)` shuffled nodes go to
/// train (clamped so both sides keep at least one node) and the rest to test.
pub fn stratified_split(labels: &LabeledNodes, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::invalid(format!("train fraction {} outside (0, 1)", spec.train_fraction)));
    }
    let classes = labels.class_count();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (v, c) in labels.labeled() {
        by_class[c].push(v);
    }
    if let Some(c) = (0..classes).find(|&c| by_class[c].len() < 2) {
        return Err(Error::ClassTooSmall(labels.class_name(c).to_owned()));
    }

    let mut rng = seeded_rng(spec.split_seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    if spec.stratified {
        for members in &mut by_class {
            members.shuffle(&mut rng);
            let k = ((spec.train_fraction * members.len() as f64).floor() as usize).clamp(1, members.len() - 1);
            train.extend_from_slice(&members[..k]);
            test.extend_from_slice(&members[k..]);
        }
    } else {
        let mut all: Vec<usize> = labels.labeled().map(|(v, _)| v).collect();
        all.shuffle(&mut rng);
        let k = (spec.train_fraction * all.len() as f64).floor() as usize;
        train.extend_from_slice(&all[..k]);
        test.extend_from_slice(&all[k..]);
        for c in 0..classes {
            let has = |set: &[usize]| set.iter().any(|&v| labels.label(v) == Some(c));
            if !has(&train) || !has(&test) {
                return Err(Error::invalid(format!(
                    "unstratified split left class `{}` without train or test nodes",
                    labels.class_name(c)
                )));
            }
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Micro-averaged F1 over single-label predictions: `2TP / (2TP + FP + FN)`.
pub fn micro_f1(predicted: &[usize], actual: &[usize]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch(predicted.len(), actual.len()));
    }
    if predicted.is_empty() {
        return Err(Error::invalid("micro-F1 of an empty prediction set"));
    }
    let tp = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    let wrong = predicted.len() - tp;
    // Every wrong prediction is one false positive and one false negative.
    let (fp, fn_) = (wrong, wrong);
    Ok((2 * tp) as f64 / (2 * tp + fp + fn_) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierOptions {
    /// Inverse L2 strength `C`.
    pub reg: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ClassifierOptions {
    fn default() -> Self {
        Self {
            reg: 1.0,
            tol: 1e-6,
            max_iter: 1000,
        }
    }
}

/// Multinomial logistic regression with an unpenalized bias.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxClassifier<T> {
    classes: usize,
    dim: usize,
    /// `classes × dim`, row-major.
    weights: Vec<T>,
    bias: Vec<T>,
    pub converged: bool,
    pub iterations: usize,
    /// Penalized loss after every accepted iterate, starting with the initial point.
    pub loss_history: Vec<f64>,
}

impl<T: Scalar> SoftmaxClassifier<T> {
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn loss(&self) -> f64 {
        *self.loss_history.last().unwrap()
    }

    pub fn scores(&self, x: &[T]) -> Vec<T> {
        (0..self.classes)
            .map(|c| {
                let w = &self.weights[c * self.dim..(c + 1) * self.dim];
                w.iter().zip(x).fold(self.bias[c], |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// Highest-scoring class; ties go to the lower index.
    pub fn predict(&self, x: &[T]) -> usize {
        let s = self.scores(x);
        let mut best = 0;
        for c in 1..s.len() {
            if s[c] > s[best] {
                best = c;
            }
        }
        best
    }
}

/// Parameters stacked as `[W (classes × dim), b (classes)]`.
struct Problem<'a, T> {
    x: &'a [T],
    y: &'a [usize],
    dim: usize,
    classes: usize,
    inv_reg: T,
}

impl<T: Scalar> Problem<'_, T> {
    fn weight_len(&self) -> usize {
        self.classes * self.dim
    }

    /// Penalized loss and, when `grad` is given, its gradient.
    fn evaluate(&self, theta: &[T], grad: Option<&mut [T]>) -> T {
        let (d, k) = (self.dim, self.classes);
        let (w, b) = theta.split_at(self.weight_len());
        let mut grad = grad;
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = T::zero());
        }
        let mut loss = T::zero();
        let mut logits = vec![T::zero(); k];
        for (i, &yi) in self.y.iter().enumerate() {
            let xi = &self.x[i * d..(i + 1) * d];
            for c in 0..k {
                let wc = &w[c * d..(c + 1) * d];
                logits[c] = wc.iter().zip(xi).fold(b[c], |acc, (&a, &v)| acc + a * v);
            }
            let m = logits.iter().copied().fold(T::neg_infinity(), T::max);
            let z: T = logits.iter().map(|&l| (l - m).exp()).sum();
            loss += m + z.ln() - logits[yi];
            if let Some(g) = grad.as_deref_mut() {
                let (gw, gb) = g.split_at_mut(k * d);
                for c in 0..k {
                    let mut r = (logits[c] - m).exp() / z;
                    if c == yi {
                        r -= T::one();
                    }
                    gb[c] += r;
                    for (gwc, &v) in gw[c * d..(c + 1) * d].iter_mut().zip(xi) {
                        *gwc += r * v;
                    }
                }
            }
        }
        let half = T::of(0.5);
        loss += half * self.inv_reg * w.iter().map(|&v| v * v).sum::<T>();
        if let Some(g) = grad {
            for (gw, &wv) in g[..k * d].iter_mut().zip(w) {
                *gw += self.inv_reg * wv;
            }
        }
        loss
    }
}

/// Fits softmax regression by full-batch gradient descent with Armijo
/// backtracking. The trial step is the Barzilai–Borwein estimate from the
/// previous iterate; only sufficient-decrease steps are accepted, so the loss
/// never increases.
///
/// `features` is row-major with `labels.len()` rows of `dim` values; `classes`
/// fixes the output size even if some class is absent from `labels`.
pub fn train_classifier<T: Scalar>(
    features: &[T],
    dim: usize,
    labels: &[usize],
    classes: usize,
    opts: &ClassifierOptions,
) -> Result<SoftmaxClassifier<T>> {
    if features.len() != labels.len() * dim {
        return Err(Error::LengthMismatch(features.len(), labels.len() * dim));
    }
    if let Some(&bad) = labels.iter().find(|&&c| c >= classes) {
        return Err(Error::invalid(format!("label {bad} outside 0..{classes}")));
    }
    let mut present = vec![false; classes];
    labels.iter().for_each(|&c| present[c] = true);
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::invalid("classifier needs at least two classes in the training labels"));
    }
    if opts.reg.is_nan() || opts.reg <= 0.0 {
        return Err(Error::invalid("regularization C must be > 0"));
    }

    let problem = Problem {
        x: features,
        y: labels,
        dim,
        classes,
        inv_reg: T::of(1.0 / opts.reg),
    };
    let len = classes * dim + classes;
    let mut theta = vec![T::zero(); len];
    let mut grad = vec![T::zero(); len];
    let mut loss = problem.evaluate(&theta, Some(&mut grad));
    let mut history = vec![loss.as_f64()];
    let mut step = T::one() / (T::one() + T::of(labels.len() as f64));
    let mut trial = vec![T::zero(); len];
    let mut trial_grad = vec![T::zero(); len];
    let tol = T::of(opts.tol);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let gmax = grad.iter().fold(T::zero(), |m, g| m.max(g.abs()));
        if gmax < tol {
            converged = true;
            break;
        }
        let gsq: T = grad.iter().map(|&g| g * g).sum();
        let mut accepted = false;
        for _ in 0..60 {
            for ((t, &p), &g) in trial.iter_mut().zip(&theta).zip(&grad) {
                *t = p - step * g;
            }
            let cand = problem.evaluate(&trial, Some(&mut trial_grad));
            if cand.is_finite() && cand <= loss - T::of(1e-4) * step * gsq {
                // Barzilai–Borwein: <s, s> / <s, y> with s = -step·g, y = Δg.
                let sy: T = grad
                    .iter()
                    .zip(&trial_grad)
                    .map(|(&g0, &g1)| -step * g0 * (g1 - g0))
                    .sum();
                let next = step * step * gsq / sy;
                loss = cand;
                std::mem::swap(&mut theta, &mut trial);
                std::mem::swap(&mut grad, &mut trial_grad);
                step = if sy > T::zero() && next.is_finite() { next } else { step * T::of(2.0) };
                accepted = true;
                break;
            }
            step *= T::of(0.5);
        }
        if !accepted {
            // Step underflow: no further decrease representable.
            break;
        }
        iterations += 1;
        history.push(loss.as_f64());
    }
    if !converged {
        converged = grad.iter().fold(T::zero(), |m, g| m.max(g.abs())) < tol;
    }

    let bias = theta.split_off(classes * dim);
    Ok(SoftmaxClassifier {
        classes,
        dim,
        weights: theta,
        bias,
        converged,
        iterations,
        loss_history: history,
    })
}

/// Penalized training loss of explicit parameters; exposed for optimality checks.
pub fn classifier_loss<T: Scalar>(
    features: &[T],
    dim: usize,
    labels: &[usize],
    classes: usize,
    reg: f64,
    weights: &[T],
    bias: &[T],
) -> f64 {
    let problem = Problem {
        x: features,
        y: labels,
        dim,
        classes,
        inv_reg: T::of(1.0 / reg),
    };
    let theta: Vec<T> = weights.iter().chain(bias).copied().collect();
    problem.evaluate(&theta, None).as_f64()
}

/// One embedding snapshot: row `v` of `features` is node `v`'s representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub index: u64,
    pub examples: u64,
    pub dim: usize,
    pub features: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub checkpoint: u64,
    pub examples: u64,
    pub seed: u64,
    pub micro_f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub checkpoint: u64,
    pub examples: u64,
    pub mean: f64,
    /// Sample standard deviation across seeds (0 for a single seed).
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub records: Vec<EvalRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl EvalReport {
    pub fn final_mean(&self) -> Option<f64> {
        self.aggregates.last().map(|a| a.mean)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("checkpoint,examples,seed,micro_f1\n");
        for r in &self.records {
            writeln!(out, "{},{},{},{:.12}", r.checkpoint, r.examples, r.seed, r.micro_f1).unwrap();
        }
        out.push_str("checkpoint,examples,mean,std\n");
        for a in &self.aggregates {
            writeln!(out, "{},{},{:.12},{:.12}", a.checkpoint, a.examples, a.mean, a.std).unwrap();
        }
        out
    }

    pub fn from_csv(text: &str, path: &Path) -> Result<Self> {
        let mut report = EvalReport::default();
        let mut section = 0;
        let perr = |line: usize, msg: &str| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: msg.to_owned(),
        };
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with("checkpoint,") {
                section += 1;
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(perr(i + 1, "expected 4 fields"));
            }
            let int = |s: &str| s.parse::<u64>().map_err(|_| perr(i + 1, "bad integer"));
            let real = |s: &str| s.parse::<f64>().map_err(|_| perr(i + 1, "bad number"));
            match section {
                1 => report.records.push(EvalRecord {
                    checkpoint: int(f[0])?,
                    examples: int(f[1])?,
                    seed: int(f[2])?,
                    micro_f1: real(f[3])?,
                }),
                2 => report.aggregates.push(Aggregate {
                    checkpoint: int(f[0])?,
                    examples: int(f[1])?,
                    mean: real(f[2])?,
                    std: real(f[3])?,
                }),
                _ => return Err(perr(i + 1, "row before header")),
            }
        }
        Ok(report)
    }
}

/// Evaluates one snapshot on one split; returns micro-F1 on the test nodes.
pub fn evaluate_split<T: Scalar>(
    snapshot: &Snapshot<T>,
    labels: &LabeledNodes,
    train: &[usize],
    test: &[usize],
    opts: &ClassifierOptions,
) -> Result<f64> {
    let d = snapshot.dim;
    let gather = |nodes: &[usize]| -> Vec<T> {
        nodes
            .iter()
            .flat_map(|&v| snapshot.features[v * d..(v + 1) * d].iter().copied())
            .collect()
    };
    let label_of = |nodes: &[usize]| -> Vec<usize> { nodes.iter().map(|&v| labels.label(v).unwrap()).collect() };
    let clf = train_classifier(&gather(train), d, &label_of(train), labels.class_count(), opts)?;
    let predicted: Vec<usize> = test
        .iter()
        .map(|&v| clf.predict(&snapshot.features[v * d..(v + 1) * d]))
        .collect();
    micro_f1(&predicted, &label_of(test))
}

/// Train and test node indices of one split.
type Split = (Vec<usize>, Vec<usize>);

/// Micro-F1 learning curve across checkpoints and `n_seeds` splits
/// (split seeds `spec.split_seed + i`). Work runs on the current rayon pool;
/// results are ordered by `(checkpoint, seed)`.
pub fn learning_curve<T: Scalar>(
    checkpoints: &[Snapshot<T>],
    labels: &LabeledNodes,
    spec: &SplitSpec,
    n_seeds: usize,
    opts: &ClassifierOptions,
) -> Result<EvalReport> {
    if checkpoints.is_empty() {
        return Err(Error::invalid("learning curve needs at least one checkpoint"));
    }
    if n_seeds == 0 {
        return Err(Error::invalid("at least one split seed is required"));
    }
    if checkpoints.windows(2).any(|w| w[1].examples <= w[0].examples) {
        return Err(Error::invalid("checkpoint example counts must strictly increase"));
    }
    let n = labels.labels().len();
    if let Some(s) = checkpoints.iter().find(|s| s.features.len() != n * s.dim) {
        return Err(Error::LengthMismatch(s.features.len(), n * s.dim));
    }
    let splits: Vec<(u64, Split)> = (0..n_seeds as u64)
        .map(|i| {
            let seed = spec.split_seed + i;
            stratified_split(labels, &SplitSpec { split_seed: seed, ..*spec }).map(|s| (seed, s))
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..checkpoints.len())
        .flat_map(|c| (0..n_seeds).map(move |s| (c, s)))
        .collect();
    let scores: Vec<f64> = jobs
        .par_iter()
        .map(|&(c, s)| {
            let (_, (train, test)) = &splits[s];
            evaluate_split(&checkpoints[c], labels, train, test, opts)
        })
        .collect::<Result<_>>()?;

    let mut report = EvalReport::default();
    for (&(c, s), &f1) in jobs.iter().zip(&scores) {
        report.records.push(EvalRecord {
            checkpoint: checkpoints[c].index,
            examples: checkpoints[c].examples,
            seed: splits[s].0,
            micro_f1: f1,
        });
    }
    for (c, snap) in checkpoints.iter().enumerate() {
        let vals = &scores[c * n_seeds..(c + 1) * n_seeds];
        let (mean, std) = mean_std(vals);
        report.aggregates.push(Aggregate {
            checkpoint: snap.index,
            examples: snap.examples,
            mean,
            std,
        });
    }
    Ok(report)
}

pub(crate) fn mean_std(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let std = if vals.len() > 1 {
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}
