//! Training and evaluation toolkit for small-image multiclass classification.
//!
//! The crate covers the whole procedure: ingesting directory-per-class image
//! corpora and splitting them per class ([`dataset`]), turning raw images into
//! network-ready tensors ([`preprocess`]), training a convolutional network
//! written from scratch ([`nn`]), and computing the one-vs-rest metric battery
//! used to report results ([`metrics`]).

pub mod dataset;
pub mod error;
pub mod metrics;
pub mod nn;
pub mod preprocess;
pub mod rng;
pub mod workflow;

pub use dataset::{
    encode_one_hot, generate_synthetic_corpus, scan_dataset, stratified_split, ClassLabel,
    DatasetManifest, LabeledImage, SplitSpec, SyntheticSpec,
};
pub use error::{Error, Result};
pub use metrics::{
    class_metrics, compare_models, confusion_matrix, micro_aggregate, one_vs_rest, round_percent,
    BinaryCounts, ClassMetrics, ConfusionMatrix, ModelSummary,
};
pub use nn::{
    gradient_check, init_parameters, predict, train, Checkpoint, LayerSpec, ModelConfig, Tensor,
    TrainConfig,
};
pub use preprocess::{preprocess_pipeline, PreprocessConfig, ProcessedTensor, RawImage};
