//! Train the fused classifier and write the checkpoint, its metadata
//! sidecar, and the per-epoch history.

use std::time::Instant;

use pulie_core::model::{param_count, save_checkpoint_file};
use pulie_core::trainer::train;

use crate::artifacts::{write_history, write_json, ModelMeta, Timing};
use crate::config::ExperimentConfig;
use crate::context::prepare;
use crate::errors::CliError;

pub fn run(config: &ExperimentConfig) -> Result<(), CliError> {
    let prepared = prepare(config, None)?;
    std::fs::create_dir_all(config.output_dir())?;

    let started = Instant::now();
    let (model, history) = train(
        &prepared.data.train,
        &prepared.data.validation,
        &prepared.dims,
        &config.train,
        &config.pu,
    )?;
    let train_seconds = started.elapsed().as_secs_f64();

    save_checkpoint_file(&model.params, &model.dims, config.checkpoint_path())?;
    write_history(&config.history_path(), &history)?;

    let best_epoch = history
        .iter()
        .max_by(|a, b| a.val_macro_f1.partial_cmp(&b.val_macro_f1).unwrap())
        .map(|s| s.epoch)
        .unwrap_or(0);
    let meta = ModelMeta {
        format: "pulie-model-meta".to_string(),
        version: 1,
        config: config.clone(),
        config_hash: config.hash(),
        lexicon_hash: prepared.lexicon_hash.clone(),
        seed: config.train.seed,
        objective: config.train.objective,
        dims: prepared.dims,
        embedding: prepared.embedding,
        standardizer: prepared.data.standardizer.clone(),
        best_epoch,
        timing: Timing {
            train_seconds,
            inference_seconds: None,
        },
    };
    write_json(&config.meta_path(), &meta)?;

    let last = history.last();
    println!(
        "trained {} objective: {} parameters, {} epochs, best validation macro F1 {:.4} (epoch {})",
        config.train.objective.label(),
        param_count(&prepared.dims),
        history.len(),
        last.map(|_| {
            history
                .iter()
                .map(|s| s.val_macro_f1)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .unwrap_or(0.0),
        best_epoch
    );
    println!(
        "checkpoint {} | history {} ({:.2} s train)",
        config.checkpoint_path().display(),
        config.history_path().display(),
        train_seconds
    );
    Ok(())
}
