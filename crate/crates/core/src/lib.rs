//! Skip-gram graph embeddings with centrality-weighted positive sampling.
//!
//! Positive `(source, context)` pairs come from one of four generators
//! (DeepWalk walks, node2vec biased walks, NBNE neighbours, LINE first- and
//! second-order neighbourhoods). The source node is drawn from a centrality
//! distribution (degree, betweenness, closeness, PageRank, load) or uniformly
//! for the baseline, and each positive is paired with one uniform negative.
//! Embeddings are scored by node-classification micro-F1 learning curves.

pub mod centrality;
pub mod error;
pub mod evaluator;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod sampler;
pub mod scalar;
pub mod trainer;

pub use centrality::{CentralityWeights, Measure, SamplingDistribution};
pub use error::{Error, Result};
pub use evaluator::{EvalReport, SoftmaxClassifier, SplitSpec};
pub use experiment::{compare_runs, run_experiment, EmbeddingMethod, Mode, RunConfig};
pub use graph::{load_edge_list, Graph, LabeledNodes};
pub use sampler::{Method, MethodConfig, TrainingPair};
pub use scalar::Scalar;
pub use trainer::{EmbeddingState, TrainConfig};

/// Default double-precision embedding state.
pub type Embedding = EmbeddingState<f64>;
/// Single-precision embedding state (faster, not used for verification).
pub type Embedding32 = EmbeddingState<f32>;
pub type Classifier = SoftmaxClassifier<f64>;
pub type Classifier32 = SoftmaxClassifier<f32>;
