//! End-to-end evaluation: datasets, cross-validation, metrics, experiment
//! configuration and reports.

pub mod config;
pub mod cv;
pub mod dataset;
pub mod experiment;
pub mod features;
pub mod metrics;
pub mod synth;

pub use config::ExperimentConfig;
pub use cv::stratified_kfold;
pub use dataset::{Dataset, LabeledPost, Phase};
pub use experiment::{run_experiment, sweep, EmbeddingMethod, EvalReport, SweepRow, Variant};
pub use features::concat_features;
pub use metrics::{compute_metrics, Metrics};
pub use synth::{generate_synthetic, SynthConfig};
