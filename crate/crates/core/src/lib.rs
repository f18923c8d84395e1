//! Deception detection for strategic-dialogue messages under extreme class
//! imbalance.
//!
//! The pipeline flattens dialog-level data to per-message records, fuses a
//! frozen text embedding with 34 interpretable linguistic and game
//! features through a small trainable subnetwork, and trains the fused
//! classifier with a non-negative positive-unlabeled risk estimator:
//! annotated lies are the only labeled positives and self-reported truths
//! form the unlabeled pool. Evaluation reports macro F1 with
//! precision-recall threshold tuning on validation scores, and a
//! capped-vocabulary TF-IDF + logistic-regression baseline shares the
//! corpus, split, and metric paths for fair comparison.

pub mod corpus;
pub mod embeddings;
pub mod eval;
pub mod features;
pub mod lexicon;
pub mod model;
pub mod pipeline;
pub mod pu;
pub mod synth;
pub mod tfidf;
pub mod trainer;

pub use corpus::{DatasetSplit, DialogRecord, MessageRecord, PuLabel, Season, SenderAnnotation};
pub use embeddings::{Embedding, EmbeddingStore};
pub use eval::{ConfusionMatrix, MetricsReport, PrPoint, SeedSummary};
pub use features::{FeatureVector, Standardizer, FEATURE_DIM, FEATURE_NAMES};
pub use lexicon::Lexicons;
pub use model::{AdamWState, ModelDims, ModelParams};
pub use pipeline::{AssembledData, RunOutcome, ThresholdRule};
pub use pu::{PuConfig, RiskBreakdown, ScoredBatch, SurrogateLoss};
pub use trainer::{Example, Objective, TrainConfig, TrainedModel};
