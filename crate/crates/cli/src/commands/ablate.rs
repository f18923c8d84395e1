//! Compare the four training objectives and the TF-IDF baseline on the
//! configured corpus: one full seeded pipeline per (objective, seed),
//! aggregated into a comparison table.
//!
//! Threshold tuning is part of the PU method, so only the PU row uses the
//! configured tuning rule; the supervised comparisons and the classical
//! baseline evaluate at their conventional 0.5 operating point.

use pulie_core::eval::{multi_seed_report, MetricsReport, MultiSeedError};
use pulie_core::model::param_count;
use pulie_core::pipeline::{run_experiment, run_tfidf_baseline};
use pulie_core::synth::SynthConfig;
use pulie_core::trainer::{Objective, TrainConfig};

use crate::artifacts::{render_table, AblationRow};
use crate::config::{CorpusSource, ExperimentConfig};
use crate::context::{prepare, prepare_synthetic, Prepared};
use crate::errors::{usage, CliError};

fn unwrap_multi_seed(e: MultiSeedError<CliError>) -> CliError {
    match e {
        MultiSeedError::EmptySeeds => usage("eval.seeds must name at least one seed"),
        MultiSeedError::Run(inner) => inner,
    }
}

pub fn run(config: &ExperimentConfig) -> Result<(), CliError> {
    let seeds = config.eval.seeds.clone();
    let config_hash = config.hash();
    let mut rows: Vec<AblationRow> = Vec::new();

    // On file corpora the split is fixed and the seed drives training
    // only; the synthetic benchmark regenerates its data per seed.
    let shared: Option<Prepared> = match config.corpus.source {
        CorpusSource::File => Some(prepare(config, None)?),
        CorpusSource::Synthetic => None,
    };

    for objective in [
        Objective::Pu,
        Objective::Bce,
        Objective::WeightedBce,
        Objective::OversampledBce,
    ] {
        let rule = match objective {
            Objective::Pu => config.threshold_rule(),
            _ => pulie_core::ThresholdRule::Fixed(0.5),
        };
        let mut train_seconds = 0.0;
        let mut inference_seconds = 0.0;
        let mut params = 0usize;
        let summary = multi_seed_report(
            |seed| -> Result<MetricsReport, CliError> {
                let per_seed: Prepared;
                let prepared = match &shared {
                    Some(p) => p,
                    None => {
                        per_seed = prepare_synthetic(
                            config,
                            &SynthConfig {
                                seed,
                                ..config.synth
                            },
                        )?;
                        &per_seed
                    }
                };
                let cfg = TrainConfig {
                    seed,
                    objective,
                    ..config.train
                };
                let out = run_experiment(&prepared.data, &prepared.dims, &cfg, &config.pu, rule)?;
                train_seconds += out.train_seconds;
                inference_seconds += out.inference_seconds;
                params = param_count(&prepared.dims);
                Ok(out.test)
            },
            &seeds,
        )
        .map_err(unwrap_multi_seed)?;

        rows.push(AblationRow {
            model: objective.label().to_string(),
            macro_f1_mean: summary.mean_macro_f1,
            macro_f1_std: summary.std_macro_f1,
            params,
            epochs: config.train.epochs,
            seeds: seeds.clone(),
            per_seed_macro_f1: summary.per_seed.iter().map(|r| r.macro_f1).collect(),
            train_seconds: train_seconds / seeds.len() as f64,
            inference_seconds: inference_seconds / seeds.len() as f64,
            config_hash: config_hash.clone(),
        });
    }

    // Classical baseline: zero-init full-batch fit, deterministic, so one
    // run covers every seed.
    let texts = match &shared {
        Some(p) => p.texts.clone(),
        None => prepare_synthetic(config, &config.synth)?.texts,
    };
    let baseline = run_tfidf_baseline(
        &texts,
        &config.logreg.to_core(),
        config.logreg.max_terms,
        pulie_core::ThresholdRule::Fixed(0.5),
    )?;
    rows.push(AblationRow {
        model: "tfidf-logreg".to_string(),
        macro_f1_mean: baseline.test.macro_f1,
        macro_f1_std: 0.0,
        params: baseline.params.count(),
        epochs: 0,
        seeds: Vec::new(),
        per_seed_macro_f1: vec![baseline.test.macro_f1],
        train_seconds: baseline.train_seconds,
        inference_seconds: baseline.inference_seconds,
        config_hash: config_hash.clone(),
    });

    std::fs::create_dir_all(config.output_dir())?;
    {
        let file = std::fs::File::create(config.output_dir().join("vocabulary.tsv"))?;
        let mut writer = std::io::BufWriter::new(file);
        pulie_core::tfidf::write_vocab(&baseline.vocabulary, &mut writer)?;
    }
    let jsonl_path = config.output_dir().join("ablation.jsonl");
    let mut out = String::new();
    for row in &rows {
        out.push_str(&serde_json::to_string(row)?);
        out.push('\n');
    }
    std::fs::write(&jsonl_path, out)?;

    let table = render_table(&rows);
    std::fs::write(config.output_dir().join("ablation_table.txt"), &table)?;
    print!("{table}");
    println!("rows written to {}", jsonl_path.display());
    Ok(())
}
