//! End-to-end experiment plumbing shared by the command-line tool and the
//! test suites: feature extraction and standardization over a split,
//! embedding lookup, training, validation-side threshold tuning, and
//! test-side reporting. The TF-IDF baseline runs through the same split
//! and evaluation paths.

use std::time::Instant;

use thiserror::Error;

use crate::corpus::{CorpusError, DatasetSplit, SenderAnnotation};
use crate::embeddings::{EmbedError, EmbeddingStore};
use crate::eval::{
    confusion, macro_f1, tune_threshold, tune_threshold_with_floor, EvalError, MetricsReport,
};
use crate::features::{extract, fit_standardizer, FeatureError, Standardizer};
use crate::lexicon::{LexiconError, Lexicons};
use crate::model::{ModelDims, ModelError};
use crate::pu::PuConfig;
use crate::synth::SyntheticDataset;
use crate::tfidf::{
    fit_vocab, logreg_predict, tfidf, train_logreg, LogRegConfig, LogRegParams, SparseVector,
    TfidfError, Vocabulary,
};
use crate::trainer::{train, EpochStats, Example, TrainConfig, TrainError, TrainedModel};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Tfidf(#[from] TfidfError),
}

/// How the decision threshold is picked on validation scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdRule {
    /// Maximize lie F1 along the PR curve (ties toward recall).
    MaxF1,
    /// Maximize recall subject to a precision floor.
    PrecisionFloor(f64),
    /// No tuning; evaluate at the given operating point.
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct AssembledData {
    pub train: Vec<Example>,
    pub validation: Vec<Example>,
    pub test: Vec<Example>,
    pub standardizer: Standardizer,
    pub embed_dim: usize,
}

/// Extract features for every record, fit the standardizer on the training
/// split, and join embeddings by message key. With no store the embedding
/// branch is disabled (dimension 0).
pub fn assemble(
    split: &DatasetSplit,
    lexicons: &Lexicons,
    store: Option<&EmbeddingStore>,
) -> Result<AssembledData, PipelineError> {
    assemble_with(split, lexicons, store, None)
}

/// Like [`assemble`], but an already-fit standardizer (from a checkpoint's
/// sidecar) can be supplied instead of refitting on the training split.
pub fn assemble_with(
    split: &DatasetSplit,
    lexicons: &Lexicons,
    store: Option<&EmbeddingStore>,
    frozen: Option<&Standardizer>,
) -> Result<AssembledData, PipelineError> {
    let standardizer = match frozen {
        Some(s) => s.clone(),
        None => {
            let train_vectors: Vec<_> = split
                .train
                .iter()
                .map(|rec| extract(rec, lexicons))
                .collect();
            fit_standardizer(&train_vectors)?
        }
    };

    let embed_dim = store.map(|s| s.dim()).unwrap_or(0);
    let build = |records: &[crate::corpus::MessageRecord]| -> Result<Vec<Example>, PipelineError> {
        records
            .iter()
            .map(|rec| {
                let key = rec.key();
                let features = standardizer.apply(&extract(rec, lexicons))?.values;
                let embedding = match store {
                    Some(s) => s.lookup(&key)?.values.iter().map(|&v| v as f64).collect(),
                    None => Vec::new(),
                };
                Ok(Example {
                    key,
                    features,
                    embedding,
                    gold: rec.sender_annotation,
                })
            })
            .collect()
    };

    Ok(AssembledData {
        train: build(&split.train)?,
        validation: build(&split.validation)?,
        test: build(&split.test)?,
        standardizer,
        embed_dim,
    })
}

/// Standardize a synthetic dataset's pre-made feature vectors on its
/// training split; the embedding branch stays disabled.
pub fn assemble_synthetic(data: &SyntheticDataset) -> Result<AssembledData, PipelineError> {
    let train_vectors: Vec<crate::features::FeatureVector> = data
        .train
        .examples
        .iter()
        .map(|ex| crate::features::FeatureVector {
            values: ex.features.clone(),
        })
        .collect();
    let standardizer = fit_standardizer(&train_vectors)?;
    let build = |examples: &[Example]| -> Result<Vec<Example>, PipelineError> {
        examples
            .iter()
            .map(|ex| {
                let features = standardizer
                    .apply(&crate::features::FeatureVector {
                        values: ex.features.clone(),
                    })?
                    .values;
                Ok(Example {
                    key: ex.key.clone(),
                    features,
                    embedding: ex.embedding.clone(),
                    gold: ex.gold,
                })
            })
            .collect()
    };
    Ok(AssembledData {
        train: build(&data.train.examples)?,
        validation: build(&data.validation.examples)?,
        test: build(&data.test.examples)?,
        standardizer,
        embed_dim: 0,
    })
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub model: TrainedModel,
    pub history: Vec<EpochStats>,
    pub threshold: f64,
    pub validation: MetricsReport,
    pub test: MetricsReport,
    pub train_seconds: f64,
    pub inference_seconds: f64,
}

/// Tune on validation scores under the configured rule; without any
/// positive gold there is nothing to tune against and the neutral 0.5
/// threshold is kept.
pub fn choose_threshold(
    scores: &[f64],
    golds: &[bool],
    rule: ThresholdRule,
) -> Result<f64, EvalError> {
    if let ThresholdRule::Fixed(threshold) = rule {
        return Ok(threshold);
    }
    if !golds.iter().any(|&g| g) {
        // Nothing to tune against; keep the neutral pre-tuning threshold.
        return Ok(0.5);
    }
    let (threshold, _) = match rule {
        ThresholdRule::MaxF1 => tune_threshold(scores, golds)?,
        ThresholdRule::PrecisionFloor(floor) => tune_threshold_with_floor(scores, golds, floor)?,
        ThresholdRule::Fixed(_) => unreachable!("handled above"),
    };
    Ok(threshold)
}

fn report_at(scores: &[f64], golds: &[bool], threshold: f64) -> Result<MetricsReport, EvalError> {
    Ok(macro_f1(&confusion(scores, golds, threshold)?, threshold))
}

/// Train, tune the threshold on validation, and report frozen-threshold
/// metrics on validation and test.
pub fn run_experiment(
    data: &AssembledData,
    dims: &ModelDims,
    cfg: &TrainConfig,
    pu_cfg: &PuConfig,
    rule: ThresholdRule,
) -> Result<RunOutcome, PipelineError> {
    let started = Instant::now();
    let (model, history) = train(&data.train, &data.validation, dims, cfg, pu_cfg)?;
    let train_seconds = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let (val_scores, val_golds) = model.score_annotated(&data.validation)?;
    let (test_scores, test_golds) = model.score_annotated(&data.test)?;
    let inference_seconds = started.elapsed().as_secs_f64();

    let threshold = choose_threshold(&val_scores, &val_golds, rule)?;
    Ok(RunOutcome {
        validation: report_at(&val_scores, &val_golds, threshold)?,
        test: report_at(&test_scores, &test_golds, threshold)?,
        model,
        history,
        threshold,
        train_seconds,
        inference_seconds,
    })
}

/// Text/label pairs per split for the classical baseline; unannotated
/// messages are dropped.
#[derive(Debug, Clone, Default)]
pub struct TextDataset {
    pub train: Vec<(String, bool)>,
    pub validation: Vec<(String, bool)>,
    pub test: Vec<(String, bool)>,
}

impl TextDataset {
    pub fn from_split(split: &DatasetSplit) -> TextDataset {
        let collect = |records: &[crate::corpus::MessageRecord]| {
            records
                .iter()
                .filter_map(|rec| match rec.sender_annotation {
                    SenderAnnotation::Lie => Some((rec.text.clone(), true)),
                    SenderAnnotation::Truth => Some((rec.text.clone(), false)),
                    SenderAnnotation::Unannotated => None,
                })
                .collect()
        };
        TextDataset {
            train: collect(&split.train),
            validation: collect(&split.validation),
            test: collect(&split.test),
        }
    }

    pub fn from_synthetic(data: &SyntheticDataset) -> TextDataset {
        let collect = |split: &crate::synth::SyntheticSplit| {
            split
                .examples
                .iter()
                .zip(&split.texts)
                .map(|(ex, text)| (text.clone(), ex.gold == SenderAnnotation::Lie))
                .collect()
        };
        TextDataset {
            train: collect(&data.train),
            validation: collect(&data.validation),
            test: collect(&data.test),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    pub params: LogRegParams,
    pub vocabulary: Vocabulary,
    pub threshold: f64,
    pub validation: MetricsReport,
    pub test: MetricsReport,
    pub train_seconds: f64,
    pub inference_seconds: f64,
}

/// Fit the capped vocabulary and logistic head on the training texts, then
/// evaluate under the same threshold protocol as the main model.
pub fn run_tfidf_baseline(
    data: &TextDataset,
    cfg: &LogRegConfig,
    max_terms: usize,
    rule: ThresholdRule,
) -> Result<BaselineOutcome, PipelineError> {
    let started = Instant::now();
    let train_texts: Vec<&str> = data.train.iter().map(|(t, _)| t.as_str()).collect();
    let labels: Vec<bool> = data.train.iter().map(|&(_, y)| y).collect();
    let vocabulary = fit_vocab(&train_texts, max_terms)?;
    let vectors: Vec<SparseVector> = train_texts.iter().map(|t| tfidf(t, &vocabulary)).collect();
    let params = train_logreg(&vectors, &labels, vocabulary.len(), cfg)?;
    let train_seconds = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let score_split = |pairs: &[(String, bool)]| -> (Vec<f64>, Vec<bool>) {
        pairs
            .iter()
            .map(|(text, y)| (logreg_predict(&params, &tfidf(text, &vocabulary)), *y))
            .unzip()
    };
    let (val_scores, val_golds) = score_split(&data.validation);
    let (test_scores, test_golds) = score_split(&data.test);
    let inference_seconds = started.elapsed().as_secs_f64();

    let threshold = choose_threshold(&val_scores, &val_golds, rule)?;
    Ok(BaselineOutcome {
        validation: report_at(&val_scores, &val_golds, threshold)?,
        test: report_at(&test_scores, &test_golds, threshold)?,
        params,
        vocabulary,
        threshold,
        train_seconds,
        inference_seconds,
    })
}
