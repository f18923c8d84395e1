//! The training loop: seeded shuffling, batch construction that guarantees
//! the PU estimator's per-batch preconditions, the four training
//! objectives, and epoch-end model selection on validation macro F1.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{PuLabel, SenderAnnotation};
use crate::eval::{confusion, macro_f1};
use crate::model::{
    adamw_step, backward_into, forward, init_params, predict, AdamHyper, AdamWState, DropoutMask,
    ModelDims, ModelError, ModelParams,
};
use crate::pu::{bce_loss, pu_grad_coefficients, pu_risk, PuConfig, PuError, ScoredBatch};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training split contains no positive (lie) examples")]
    NoPositivesInTrain,
    #[error("PU training requires at least one unlabeled example in the training split")]
    NoUnlabeledInTrain,
    #[error("example `{key}`: feature length {found} does not match feature_dim {expected}")]
    MissingFeatures {
        key: String,
        expected: usize,
        found: usize,
    },
    #[error("example `{key}`: embedding length {found} does not match embed_dim {expected}")]
    MissingEmbedding {
        key: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Pu(#[from] PuError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Non-negative PU risk over positives and the unlabeled pool.
    #[default]
    Pu,
    /// Plain cross-entropy treating truths as negatives.
    Bce,
    /// Cross-entropy with the positive class weighted by the inverse class
    /// frequency.
    WeightedBce,
    /// Cross-entropy after duplicating positives to a 1:1 ratio.
    OversampledBce,
}

impl Objective {
    pub fn label(&self) -> &'static str {
        match self {
            Objective::Pu => "pu",
            Objective::Bce => "bce",
            Objective::WeightedBce => "weighted-bce",
            Objective::OversampledBce => "oversampled-bce",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub dropout_rate: f64,
    pub weight_decay: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub objective: Objective,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 32,
            epochs: 25,
            dropout_rate: 0.2,
            weight_decay: 0.01,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            objective: Objective::Pu,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.learning_rate <= 0.0 {
            return Err(TrainError::Config(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(TrainError::Config(format!(
                "dropout_rate must lie in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be >= 1".to_string()));
        }
        if self.batch_size == 0 {
            return Err(TrainError::Config("batch_size must be >= 1".to_string()));
        }
        if self.objective == Objective::Pu && self.batch_size < 2 {
            return Err(TrainError::Config(
                "the PU objective needs batch_size >= 2 (every batch holds a positive and an unlabeled element)"
                    .to_string(),
            ));
        }
        Ok(())
    }

    pub fn adam_hyper(&self) -> AdamHyper {
        AdamHyper {
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }
}

/// One assembled training/evaluation point: standardized features, frozen
/// embedding, and the gold annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub key: String,
    pub features: Vec<f64>,
    pub embedding: Vec<f64>,
    pub gold: SenderAnnotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_risk: f64,
    /// Validation macro F1 at the fixed pre-tuning threshold 0.5.
    pub val_macro_f1: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub dims: ModelDims,
    pub params: ModelParams,
}

impl TrainedModel {
    pub fn predict(&self, features: &[f64], embedding: &[f64]) -> Result<f64, ModelError> {
        predict(features, embedding, &self.params, &self.dims)
    }

    /// Inference probabilities for annotated examples, paired with their
    /// gold lie flags. Unannotated examples are skipped.
    pub fn score_annotated(
        &self,
        examples: &[Example],
    ) -> Result<(Vec<f64>, Vec<bool>), ModelError> {
        let mut scores = Vec::new();
        let mut golds = Vec::new();
        for ex in examples {
            let lie = match ex.gold {
                SenderAnnotation::Lie => true,
                SenderAnnotation::Truth => false,
                SenderAnnotation::Unannotated => continue,
            };
            scores.push(self.predict(&ex.features, &ex.embedding)?);
            golds.push(lie);
        }
        Ok((scores, golds))
    }
}

/// Duplicate positives (cycling) until they match the negative count.
fn oversampled_pool(positives: &[usize], unlabeled: &[usize]) -> Vec<usize> {
    let mut pool = unlabeled.to_vec();
    let mut need = unlabeled.len().max(positives.len());
    let mut cycle = positives.iter().copied().cycle();
    while need > 0 {
        pool.push(cycle.next().expect("positives nonempty"));
        need -= 1;
    }
    pool
}

fn check_example_shapes(examples: &[Example], dims: &ModelDims) -> Result<(), TrainError> {
    for ex in examples {
        if ex.features.len() != dims.feature_dim {
            return Err(TrainError::MissingFeatures {
                key: ex.key.clone(),
                expected: dims.feature_dim,
                found: ex.features.len(),
            });
        }
        if ex.embedding.len() != dims.embed_dim {
            return Err(TrainError::MissingEmbedding {
                key: ex.key.clone(),
                expected: dims.embed_dim,
                found: ex.embedding.len(),
            });
        }
    }
    Ok(())
}

/// Train on the given examples. Only annotated messages enter the risk;
/// the epoch history records train risk and validation macro F1 at
/// threshold 0.5, and the returned parameters come from the epoch with the
/// best validation macro F1.
pub fn train(
    train_examples: &[Example],
    validation_examples: &[Example],
    dims: &ModelDims,
    cfg: &TrainConfig,
    pu_cfg: &PuConfig,
) -> Result<(TrainedModel, Vec<EpochStats>), TrainError> {
    cfg.validate()?;
    pu_cfg.validate().map_err(TrainError::Config)?;
    check_example_shapes(train_examples, dims)?;
    check_example_shapes(validation_examples, dims)?;

    let annotated: Vec<usize> = train_examples
        .iter()
        .enumerate()
        .filter(|(_, ex)| ex.gold != SenderAnnotation::Unannotated)
        .map(|(i, _)| i)
        .collect();
    let positives: Vec<usize> = annotated
        .iter()
        .copied()
        .filter(|&i| train_examples[i].gold == SenderAnnotation::Lie)
        .collect();
    let unlabeled: Vec<usize> = annotated
        .iter()
        .copied()
        .filter(|&i| train_examples[i].gold == SenderAnnotation::Truth)
        .collect();

    if positives.is_empty() {
        return Err(TrainError::NoPositivesInTrain);
    }
    if cfg.objective == Objective::Pu && unlabeled.is_empty() {
        return Err(TrainError::NoUnlabeledInTrain);
    }

    let pos_weight = match cfg.objective {
        Objective::WeightedBce => (unlabeled.len() as f64 / positives.len() as f64).max(1.0),
        _ => 1.0,
    };

    // For the oversampled objective, positives are recycled until they
    // match the negative count; the list is rebuilt once and reshuffled
    // every epoch.
    let epoch_pool: Vec<usize> = if cfg.objective == Objective::OversampledBce {
        oversampled_pool(&positives, &unlabeled)
    } else {
        annotated.clone()
    };

    let mut params = init_params(dims, cfg.seed);
    let mut state = AdamWState::new(dims);
    let hp = cfg.adam_hyper();
    // Separate stream from the init draw so widening the model does not
    // perturb shuffling.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9E37_79B9_7F4A_7C15);

    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, ModelParams)> = None;

    let mut order = epoch_pool.clone();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut risk_sum = 0.0;
        let mut batches = 0usize;

        for chunk in order.chunks(cfg.batch_size) {
            let mut batch: Vec<usize> = chunk.to_vec();
            if cfg.objective == Objective::Pu {
                let has_pos = batch
                    .iter()
                    .any(|&i| train_examples[i].gold == SenderAnnotation::Lie);
                if !has_pos {
                    let slot = rng.gen_range(0..batch.len());
                    batch[slot] = positives[rng.gen_range(0..positives.len())];
                }
                let has_unl = batch
                    .iter()
                    .any(|&i| train_examples[i].gold == SenderAnnotation::Truth);
                if !has_unl {
                    // all-positive batch; any single replacement keeps a positive
                    let slot = rng.gen_range(0..batch.len());
                    batch[slot] = unlabeled[rng.gen_range(0..unlabeled.len())];
                }
            }

            let mut logits = Vec::with_capacity(batch.len());
            let mut caches = Vec::with_capacity(batch.len());
            for &i in &batch {
                let ex = &train_examples[i];
                let mask = DropoutMask::sample(&mut rng, dims.hidden_dim, cfg.dropout_rate);
                let (logit, cache) =
                    forward(&ex.features, &ex.embedding, &params, dims, Some(&mask))?;
                logits.push(logit);
                caches.push(cache);
            }

            let (risk, coeffs) = match cfg.objective {
                Objective::Pu => {
                    let labels: Vec<PuLabel> = batch
                        .iter()
                        .map(|&i| {
                            train_examples[i]
                                .gold
                                .to_pu_label()
                                .expect("batch holds annotated examples only")
                        })
                        .collect();
                    let scored = ScoredBatch::new(logits.clone(), labels)?;
                    let breakdown = pu_risk(&scored, pu_cfg)?;
                    (breakdown.risk, pu_grad_coefficients(&scored, pu_cfg)?)
                }
                _ => {
                    let labels: Vec<bool> = batch
                        .iter()
                        .map(|&i| train_examples[i].gold == SenderAnnotation::Lie)
                        .collect();
                    let (value, grads) = bce_loss(&logits, &labels, pos_weight)?;
                    (value, grads)
                }
            };

            let mut grads = ModelParams::zeros(dims);
            for (cache, &coeff) in caches.iter().zip(&coeffs) {
                backward_into(cache, coeff, &params, dims, &mut grads);
            }
            adamw_step(&mut params, &grads, &mut state, &hp);

            risk_sum += risk;
            batches += 1;
        }

        let model = TrainedModel {
            dims: *dims,
            params: params.clone(),
        };
        let (scores, golds) = model.score_annotated(validation_examples)?;
        let val_macro_f1 = if golds.is_empty() {
            0.0
        } else {
            macro_f1(&confusion(&scores, &golds, 0.5)?, 0.5).macro_f1
        };

        history.push(EpochStats {
            epoch,
            train_risk: risk_sum / batches.max(1) as f64,
            val_macro_f1,
        });

        let improved = match &best {
            None => true,
            Some((best_f1, _, _)) => val_macro_f1 > *best_f1,
        };
        if improved {
            best = Some((val_macro_f1, epoch, params.clone()));
        }
    }

    // With an unannotated validation split there is nothing to select on;
    // fall back to the final parameters.
    let has_annotated_validation = validation_examples
        .iter()
        .any(|ex| ex.gold != SenderAnnotation::Unannotated);
    let chosen = if has_annotated_validation {
        best.map(|(_, _, p)| p).unwrap_or(params)
    } else {
        params
    };

    Ok((
        TrainedModel {
            dims: *dims,
            params: chosen,
        },
        history,
    ))
}

impl From<crate::eval::EvalError> for TrainError {
    fn from(e: crate::eval::EvalError) -> Self {
        TrainError::Config(e.to_string())
    }
}
