//! Skip-gram negative-sampling SGD over streams of [`TrainingPair`]s.
//!
//! Per pair the objective is
//!
//! ```text
//! J = w · log σ(ψ'(ctx) · ψ(src)) + log σ(-ψ'(neg) · ψ(src))
//! ```
//!
//! and one update ascends `J` touching only `ψ(src)`, `ψ'(ctx)` and `ψ'(neg)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::{seeded_rng, TrainingPair};
use crate::scalar::{dot, log_sigmoid, sigmoid, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    /// One SGD update per pair; batches only mark checkpoints.
    #[default]
    PerExample,
    /// Gradients summed over a batch and applied once, scaled by `1 / batch`.
    BatchAverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    pub total: u64,
    pub batch: u64,
    pub learning_rate: f64,
    pub negatives: usize,
    pub seed: u64,
    #[serde(default)]
    pub update: UpdateRule,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 200,
            total: 1_000_000,
            batch: 100_000,
            learning_rate: 0.001,
            negatives: 1,
            seed: 0,
            update: UpdateRule::PerExample,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::invalid("dimension must be >= 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be > 0"));
        }
        if self.batch == 0 || !self.total.is_multiple_of(self.batch) {
            return Err(Error::invalid(format!(
                "batch {} must be positive and divide total {}",
                self.batch, self.total
            )));
        }
        if self.negatives != 1 {
            return Err(Error::invalid("exactly one negative per positive is supported"));
        }
        Ok(())
    }

    pub fn checkpoints(&self) -> u64 {
        self.total / self.batch
    }
}

/// Input (`ψ`) and output (`ψ'`) embedding matrices, row-major `n × dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingState<T> {
    n: usize,
    dim: usize,
    input: Vec<T>,
    output: Vec<T>,
    pub step: u64,
    pub seed: u64,
}

impl<T: Scalar> EmbeddingState<T> {
    pub fn zeros(n: usize, dim: usize) -> Self {
        Self {
            n,
            dim,
            input: vec![T::zero(); n * dim],
            output: vec![T::zero(); n * dim],
            step: 0,
            seed: 0,
        }
    }

    /// Builds a state from explicit row-major matrices.
    pub fn from_parts(n: usize, dim: usize, input: Vec<T>, output: Vec<T>) -> Result<Self> {
        if dim == 0 || input.len() != n * dim || output.len() != n * dim {
            return Err(Error::invalid("matrix shapes do not match n × dim"));
        }
        Ok(Self {
            n,
            dim,
            input,
            output,
            step: 0,
            seed: 0,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input_row(&self, v: usize) -> &[T] {
        &self.input[v * self.dim..(v + 1) * self.dim]
    }

    pub fn output_row(&self, v: usize) -> &[T] {
        &self.output[v * self.dim..(v + 1) * self.dim]
    }

    pub fn input_row_mut(&mut self, v: usize) -> &mut [T] {
        &mut self.input[v * self.dim..(v + 1) * self.dim]
    }

    pub fn output_row_mut(&mut self, v: usize) -> &mut [T] {
        &mut self.output[v * self.dim..(v + 1) * self.dim]
    }

    /// Node representation used downstream.
    pub fn input(&self) -> &[T] {
        &self.input
    }

    pub fn output(&self) -> &[T] {
        &self.output
    }

    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(&self.output).all(|x| x.is_finite())
    }

    fn check_pair(&self, pair: &TrainingPair) -> Result<()> {
        for v in [pair.source, pair.context, pair.negative] {
            if v >= self.n {
                return Err(Error::NodeOutOfRange { index: v, n: self.n });
            }
        }
        Ok(())
    }
}

/// `ψ` i.i.d. uniform in `[-0.5/d, 0.5/d]` from `cfg.seed`; `ψ'` zero.
pub fn init_embeddings<T: Scalar>(n: usize, cfg: &TrainConfig) -> EmbeddingState<T> {
    let dim = cfg.dim.max(1);
    let half = T::of(0.5 / dim as f64);
    let mut rng = seeded_rng(cfg.seed);
    let input = (0..n * dim).map(|_| rng.gen_range(-half..=half)).collect();
    EmbeddingState {
        n,
        dim,
        input,
        output: vec![T::zero(); n * dim],
        step: 0,
        seed: cfg.seed,
    }
}

/// Objective of one pair, evaluated with a stable log-sigmoid.
pub fn pair_objective<T: Scalar>(state: &EmbeddingState<T>, pair: &TrainingPair) -> Result<T> {
    state.check_pair(pair)?;
    let src = state.input_row(pair.source);
    let pos = dot(state.output_row(pair.context), src);
    let neg = dot(state.output_row(pair.negative), src);
    let j = T::of(pair.weight) * log_sigmoid(pos) + log_sigmoid(-neg);
    if j.is_finite() {
        Ok(j)
    } else {
        Err(Error::NonFinite { step: state.step })
    }
}

/// Gradient of the pair objective with respect to the three rows it touches.
/// When `context == negative` the two output-row gradients belong to the same row.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGradient<T> {
    pub source: Vec<T>,
    pub context: Vec<T>,
    pub negative: Vec<T>,
    pub objective: T,
}

pub fn pair_gradient<T: Scalar>(state: &EmbeddingState<T>, pair: &TrainingPair) -> Result<PairGradient<T>> {
    state.check_pair(pair)?;
    let src = state.input_row(pair.source);
    let ctx = state.output_row(pair.context);
    let neg = state.output_row(pair.negative);
    let (pos_score, neg_score) = (dot(ctx, src), dot(neg, src));
    let g_pos = T::of(pair.weight) * (T::one() - sigmoid(pos_score));
    let g_neg = -sigmoid(neg_score);
    let objective = T::of(pair.weight) * log_sigmoid(pos_score) + log_sigmoid(-neg_score);
    if !objective.is_finite() {
        return Err(Error::NonFinite { step: state.step });
    }
    Ok(PairGradient {
        source: ctx.iter().zip(neg).map(|(&c, &n)| g_pos * c + g_neg * n).collect(),
        context: src.iter().map(|&s| g_pos * s).collect(),
        negative: src.iter().map(|&s| g_neg * s).collect(),
        objective,
    })
}

/// One ascent step with rate `lr`. Returns the objective before the update.
///
/// Output rows are updated first (context, then negative) from the old input
/// row; the input row then moves along the old output rows.
pub fn sgd_step<T: Scalar>(state: &mut EmbeddingState<T>, pair: &TrainingPair, lr: T) -> Result<T> {
    state.check_pair(pair)?;
    let dim = state.dim;
    let (s, c, ng) = (pair.source * dim, pair.context * dim, pair.negative * dim);
    let pos_score = dot(&state.output[c..c + dim], &state.input[s..s + dim]);
    let neg_score = dot(&state.output[ng..ng + dim], &state.input[s..s + dim]);
    let g_pos = T::of(pair.weight) * (T::one() - sigmoid(pos_score));
    let g_neg = -sigmoid(neg_score);
    let objective = T::of(pair.weight) * log_sigmoid(pos_score) + log_sigmoid(-neg_score);

    let (a_pos, a_neg) = (lr * g_pos, lr * g_neg);
    for k in 0..dim {
        let x = state.input[s + k];
        let (oc, on) = (state.output[c + k], state.output[ng + k]);
        state.output[c + k] += a_pos * x;
        state.output[ng + k] += a_neg * x;
        state.input[s + k] = x + a_pos * oc + a_neg * on;
    }
    state.step += 1;

    let touched = [s, c, ng];
    let finite = objective.is_finite()
        && touched.iter().all(|&o| {
            state.input[o..o + dim].iter().all(|x| x.is_finite())
                && state.output[o..o + dim].iter().all(|x| x.is_finite())
        });
    if finite {
        Ok(objective)
    } else {
        Err(Error::NonFinite { step: state.step })
    }
}

/// Snapshot handed to the checkpoint callback.
#[derive(Debug, Clone, Copy)]
pub struct Checkpoint<'a, T> {
    /// 1-based checkpoint number.
    pub index: u64,
    pub examples: u64,
    /// Mean pre-update objective over the window that ended here.
    pub mean_objective: f64,
    pub state: &'a EmbeddingState<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub examples: u64,
    pub window_objectives: Vec<f64>,
}

/// Consumes `cfg.total` pairs from `pairs`, calling `on_checkpoint` after every
/// `cfg.batch` pairs.
pub fn train<T, I, F>(state: &mut EmbeddingState<T>, pairs: I, cfg: &TrainConfig, mut on_checkpoint: F) -> Result<TrainSummary>
where
    T: Scalar,
    I: IntoIterator<Item = TrainingPair>,
    F: FnMut(Checkpoint<'_, T>) -> Result<()>,
{
    cfg.validate()?;
    if state.dim != cfg.dim {
        return Err(Error::invalid(format!("state dim {} != config dim {}", state.dim, cfg.dim)));
    }
    let lr = T::of(cfg.learning_rate);
    let mut pairs = pairs.into_iter();
    let mut summary = TrainSummary {
        examples: 0,
        window_objectives: Vec::new(),
    };
    let mut accum = match cfg.update {
        UpdateRule::BatchAverage => Some(EmbeddingState::<T>::zeros(state.n, state.dim)),
        UpdateRule::PerExample => None,
    };
    for index in 1..=cfg.checkpoints() {
        let mut window = 0.0;
        for _ in 0..cfg.batch {
            let pair = pairs
                .next()
                .ok_or_else(|| Error::invalid(format!("pair stream ended after {} pairs", summary.examples)))?;
            let objective = match accum.as_mut() {
                None => sgd_step(state, &pair, lr)?,
                Some(acc) => accumulate(state, acc, &pair)?,
            };
            window += objective.as_f64();
            summary.examples += 1;
        }
        if let Some(acc) = accum.as_mut() {
            apply_average(state, acc, lr / T::of(cfg.batch as f64))?;
        }
        let mean_objective = window / cfg.batch as f64;
        summary.window_objectives.push(mean_objective);
        on_checkpoint(Checkpoint {
            index,
            examples: summary.examples,
            mean_objective,
            state,
        })?;
    }
    Ok(summary)
}

fn accumulate<T: Scalar>(state: &mut EmbeddingState<T>, acc: &mut EmbeddingState<T>, pair: &TrainingPair) -> Result<T> {
    let g = pair_gradient(state, pair)?;
    for (a, d) in acc.input_row_mut(pair.source).iter_mut().zip(&g.source) {
        *a += *d;
    }
    for (a, d) in acc.output_row_mut(pair.context).iter_mut().zip(&g.context) {
        *a += *d;
    }
    for (a, d) in acc.output_row_mut(pair.negative).iter_mut().zip(&g.negative) {
        *a += *d;
    }
    state.step += 1;
    Ok(g.objective)
}

fn apply_average<T: Scalar>(state: &mut EmbeddingState<T>, acc: &mut EmbeddingState<T>, scale: T) -> Result<()> {
    for (x, a) in state.input.iter_mut().zip(acc.input.iter_mut()) {
        *x += scale * *a;
        *a = T::zero();
    }
    for (x, a) in state.output.iter_mut().zip(acc.output.iter_mut()) {
        *x += scale * *a;
        *a = T::zero();
    }
    if state.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { step: state.step })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(source: usize, context: usize, negative: usize, weight: f64) -> TrainingPair {
        TrainingPair {
            source,
            context,
            negative,
            weight,
        }
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let cfg = TrainConfig {
            dim: 16,
            seed: 42,
            ..TrainConfig::default()
        };
        let a = init_embeddings::<f64>(50, &cfg);
        let b = init_embeddings::<f64>(50, &cfg);
        assert_eq!(a, b);
        assert!(a.input().iter().all(|x| x.abs() <= 0.5 / 16.0));
        assert!(a.output().iter().all(|&x| x == 0.0));
        let c = init_embeddings::<f64>(50, &TrainConfig { seed: 43, ..cfg });
        assert_ne!(a.input(), c.input());
    }

    #[test]
    fn init_mean_is_centered() {
        let cfg = TrainConfig {
            dim: 100,
            seed: 7,
            ..TrainConfig::default()
        };
        let s = init_embeddings::<f64>(1000, &cfg);
        let m = s.input().len() as f64;
        let mean = s.input().iter().sum::<f64>() / m;
        // Uniform on [-h, h] has variance h^2 / 3.
        let h = 0.5 / 100.0;
        let se = (h * h / 3.0 / m).sqrt();
        assert!(mean.abs() < 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn zero_state_objective_and_step() {
        let mut s = EmbeddingState::<f64>::zeros(3, 4);
        let p = pair(0, 1, 2, 2.5);
        let j = pair_objective(&s, &p).unwrap();
        assert!((j - (2.5 * 0.5f64.ln() + 0.5f64.ln())).abs() < 1e-15);
        let before = s.clone();
        sgd_step(&mut s, &p, 0.1).unwrap();
        assert_eq!(s.input(), before.input());
        assert_eq!(s.output(), before.output());
    }

    #[test]
    fn objective_limits() {
        let s = EmbeddingState::<f64>::from_parts(3, 1, vec![1.0, 0.0, 0.0], vec![0.0, 800.0, -800.0]).unwrap();
        let j = pair_objective(&s, &pair(0, 1, 2, 1.0)).unwrap();
        assert!(j.abs() < 1e-300);
    }

    #[test]
    fn hand_computed_d2_step() {
        // ψ(0) = (1, 2); ψ'(1) = (0.5, -0.25); ψ'(2) = (-1, 0.5); w = 2, lr = 0.1.
        let mut s = EmbeddingState::<f64>::from_parts(
            3,
            2,
            vec![1.0, 2.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, -0.25, -1.0, 0.5],
        )
        .unwrap();
        // s+ = 0.5 - 0.5 = 0 → g+ = 2 (1 - 0.5) = 1.
        // s- = -1 + 1 = 0 → g- = -0.5.
        sgd_step(&mut s, &pair(0, 1, 2, 2.0), 0.1).unwrap();
        let want_ctx = [0.5 + 0.1, -0.25 + 0.2];
        let want_neg = [-1.0 - 0.05, 0.5 - 0.1];
        let want_src = [1.0 + 0.1 * (0.5 + 0.5), 2.0 + 0.1 * (-0.25 - 0.25)];
        for (got, want) in [
            (s.output_row(1), &want_ctx[..]),
            (s.output_row(2), &want_neg[..]),
            (s.input_row(0), &want_src[..]),
        ] {
            for (a, b) in got.iter().zip(want) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
        assert_eq!(s.step, 1);
    }

    #[test]
    fn context_equals_negative_applies_both() {
        let mut s = EmbeddingState::from_parts(2, 1, vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        sgd_step(&mut s, &pair(0, 1, 1, 1.0), 1.0).unwrap();
        // g+ = 0.5, g- = -0.5: the row moves by 0.5 - 0.5.
        assert_eq!(s.output_row(1), &[0.0]);
    }

    #[test]
    fn out_of_range_pair() {
        let mut s = EmbeddingState::<f64>::zeros(2, 2);
        assert!(sgd_step(&mut s, &pair(0, 1, 5, 1.0), 0.1).is_err());
        assert!(pair_objective(&s, &pair(3, 1, 0, 1.0)).is_err());
    }

    #[test]
    fn nonfinite_is_detected() {
        let mut s = EmbeddingState::from_parts(2, 1, vec![f64::NAN, 0.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            sgd_step(&mut s, &pair(0, 1, 1, 1.0), 0.1),
            Err(Error::NonFinite { step: 1 })
        ));
    }

    #[test]
    fn zero_total_leaves_state() {
        let cfg = TrainConfig {
            dim: 4,
            total: 0,
            batch: 10,
            ..TrainConfig::default()
        };
        let mut s = init_embeddings::<f64>(5, &cfg);
        let init = s.clone();
        let mut calls = 0;
        let summary = train(&mut s, std::iter::empty(), &cfg, |_| {
            calls += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(calls, 0);
        assert_eq!(summary.examples, 0);
        assert_eq!(s, init);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            batch: 300_000,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        }
        .validate()
        .is_err());
        assert!(TrainConfig {
            negatives: 2,
            ..TrainConfig::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn short_stream_errors() {
        let cfg = TrainConfig {
            dim: 2,
            total: 4,
            batch: 2,
            ..TrainConfig::default()
        };
        let mut s = init_embeddings::<f64>(3, &cfg);
        let pairs = vec![pair(0, 1, 2, 1.0); 3];
        assert!(train(&mut s, pairs, &cfg, |_| Ok(())).is_err());
    }

    #[test]
    fn batch_average_matches_single_step_for_batch_of_one() {
        let cfg = TrainConfig {
            dim: 3,
            total: 1,
            batch: 1,
            learning_rate: 0.05,
            seed: 3,
            ..TrainConfig::default()
        };
        let p = pair(0, 1, 2, 1.3);
        let mut a = init_embeddings::<f64>(3, &cfg);
        a.output_row_mut(1).copy_from_slice(&[0.2, -0.1, 0.4]);
        a.output_row_mut(2).copy_from_slice(&[-0.3, 0.2, 0.1]);
        let mut b = a.clone();
        train(&mut a, vec![p], &cfg, |_| Ok(())).unwrap();
        let avg = TrainConfig {
            update: UpdateRule::BatchAverage,
            ..cfg
        };
        train(&mut b, vec![p], &avg, |_| Ok(())).unwrap();
        for (x, y) in a.input().iter().chain(a.output()).zip(b.input().iter().chain(b.output())) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}
