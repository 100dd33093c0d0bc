//! Anomaly-detection feature assembly, classifiers and evaluation.

mod dataset;
mod features;
mod knn;
mod metrics;
mod mlp;
mod model;
mod svm;
mod tree;

use thiserror::Error;

pub use dataset::{stratified_split, Dataset, LabeledSample, Provenance, Standardizer};
pub use features::{assemble_features, feature_names, FeatureVector, CONTINUOUS_FEATURES, NUM_BUSES, NUM_BREAKERS, NUM_FEATURES};
pub use knn::{minkowski_distance, Knn, KnnConfig};
pub use metrics::{evaluate, select_model, MetricsReport};
pub use mlp::{Mlp, MlpConfig, MlpGradients};
pub use model::{Classifier, ModelKind, TrainConfig, TrainedModel};
pub use svm::{dual_objective, gaussian_kernel, BinarySvm, DualSolution, SvmConfig, SvmEnsemble};
pub use tree::{gini_index, DecisionTree, Node, TreeConfig};

/// Classes 0 (normal), 1-10 (fault types) and 11 (cyberattack).
pub const NUM_CLASSES: usize = 12;
pub const ATTACK_CLASS: usize = 11;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MlError {
    #[error("incomplete snapshot: no feed for bus {0}")]
    IncompleteSnapshot(usize),
    #[error("expected {expected} values, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("empty training set")]
    Empty,
    #[error("SVM did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },
}
