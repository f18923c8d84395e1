//! Inspect threshold tuning: dump the validation precision-recall curve
//! and the threshold the configured rule selects.

use std::io::Write;

use pulie_core::eval::pr_curve;
use pulie_core::pipeline::choose_threshold;

use crate::config::ExperimentConfig;
use crate::context::prepare;
use crate::errors::{data, CliError};

pub fn run(config: &ExperimentConfig) -> Result<(), CliError> {
    let (model, meta) = super::eval::load_model(config)?;
    let prepared = prepare(config, Some(&meta.standardizer))?;
    let (scores, golds) = model.score_annotated(&prepared.data.validation)?;
    if !golds.iter().any(|&g| g) {
        return Err(data(
            "validation split has no annotated lies; threshold tuning is undefined",
        ));
    }

    let points = pr_curve(&scores, &golds)?;
    std::fs::create_dir_all(config.output_dir())?;
    let curve_path = config.output_dir().join("pr_curve.jsonl");
    {
        let file = std::fs::File::create(&curve_path)?;
        let mut writer = std::io::BufWriter::new(file);
        for point in &points {
            writeln!(writer, "{}", serde_json::to_string(point)?)?;
        }
        writer.flush()?;
    }

    let rule = config.threshold_rule();
    let threshold = choose_threshold(&scores, &golds, rule)?;
    crate::artifacts::write_json(
        &config.output_dir().join("threshold.json"),
        &serde_json::json!({
            "threshold": threshold,
            "rule": crate::config::ExperimentConfig::rule_name(&rule),
            "curve_points": points.len(),
            "config_hash": config.hash(),
        }),
    )?;

    println!("{} PR points over validation scores", points.len());
    println!("selected threshold {threshold:.4}");
    println!("curve written to {}", curve_path.display());
    Ok(())
}
