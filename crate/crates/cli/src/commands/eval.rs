//! Score a trained checkpoint: tune the threshold on validation (unless
//! one is forced), apply it frozen to the test split, and write the
//! metrics report.

use std::time::Instant;

use pulie_core::eval::{confusion, macro_f1};
use pulie_core::model::load_checkpoint_file;
use pulie_core::pipeline::choose_threshold;
use pulie_core::trainer::TrainedModel;

use crate::artifacts::{read_json, write_json, EvalReport, ModelMeta, Timing};
use crate::config::ExperimentConfig;
use crate::context::{lexicon_hash, prepare};
use crate::errors::{data, internal, usage, CliError};

/// Checkpoint + verified metadata, shared with predict and tune-threshold.
pub fn load_model(config: &ExperimentConfig) -> Result<(TrainedModel, ModelMeta), CliError> {
    let checkpoint_path = config.checkpoint_path();
    if !checkpoint_path.exists() {
        return Err(usage(format!(
            "checkpoint `{}` is missing; run `pulie train` first",
            checkpoint_path.display()
        )));
    }
    let (dims, params) = load_checkpoint_file(&checkpoint_path)?;
    let meta: ModelMeta = read_json(&config.meta_path())?;
    if meta.dims != dims {
        return Err(internal(format!(
            "checkpoint dims {:?} disagree with metadata dims {:?}",
            dims, meta.dims
        )));
    }
    let current_lexicons = config.lexicons()?;
    if lexicon_hash(&current_lexicons) != meta.lexicon_hash {
        return Err(data(format!(
            "lexicons changed since training (hash {} != {}); retrain or restore the original lexicon files",
            lexicon_hash(&current_lexicons),
            meta.lexicon_hash
        )));
    }
    Ok((TrainedModel { dims, params }, meta))
}

pub fn run(config: &ExperimentConfig, forced_threshold: Option<f64>) -> Result<(), CliError> {
    let (model, meta) = load_model(config)?;
    let prepared = prepare(config, Some(&meta.standardizer))?;
    if prepared.dims != model.dims {
        return Err(internal(format!(
            "assembled dims {:?} disagree with checkpoint dims {:?}",
            prepared.dims, model.dims
        )));
    }

    let started = Instant::now();
    let (val_scores, val_golds) = model.score_annotated(&prepared.data.validation)?;
    let (test_scores, test_golds) = model.score_annotated(&prepared.data.test)?;
    let inference_seconds = started.elapsed().as_secs_f64();

    let (threshold, rule_name) = match forced_threshold {
        Some(t) => (t, "forced".to_string()),
        None => {
            let rule = config.threshold_rule();
            let t = choose_threshold(&val_scores, &val_golds, rule)?;
            (t, crate::config::ExperimentConfig::rule_name(&rule))
        }
    };

    let validation = macro_f1(&confusion(&val_scores, &val_golds, threshold)?, threshold);
    let test = macro_f1(&confusion(&test_scores, &test_golds, threshold)?, threshold);

    let report = EvalReport {
        format: "pulie-eval-report".to_string(),
        version: 1,
        config: config.clone(),
        config_hash: config.hash(),
        lexicon_hash: meta.lexicon_hash.clone(),
        seed: meta.seed,
        objective: meta.objective,
        threshold,
        threshold_rule: rule_name,
        validation,
        test,
        timing: Timing {
            train_seconds: meta.timing.train_seconds,
            inference_seconds: Some(inference_seconds),
        },
    };
    std::fs::create_dir_all(config.output_dir())?;
    let report_path = config.output_dir().join("report.json");
    write_json(&report_path, &report)?;

    println!(
        "threshold {threshold:.4} ({}) tuned on validation",
        report.threshold_rule
    );
    println!(
        "validation macro F1 {:.4} (lie F1 {:.4}, truth F1 {:.4})",
        validation.macro_f1, validation.lie_f1, validation.truth_f1
    );
    println!(
        "test       macro F1 {:.4} (lie P {:.4} / R {:.4} / F1 {:.4})",
        test.macro_f1, test.lie_precision, test.lie_recall, test.lie_f1
    );
    println!("report written to {}", report_path.display());
    Ok(())
}
