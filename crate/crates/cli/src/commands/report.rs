//! Re-render previously produced results: the ablation comparison when
//! present, otherwise the single-model evaluation report.

use std::io::BufRead;

use crate::artifacts::{read_json, render_table, AblationRow, EvalReport};
use crate::config::ExperimentConfig;
use crate::errors::{usage, CliError};

pub fn run(config: &ExperimentConfig) -> Result<(), CliError> {
    let ablation_path = config.output_dir().join("ablation.jsonl");
    if ablation_path.exists() {
        let file = std::fs::File::open(&ablation_path)?;
        let mut rows = Vec::new();
        for line in std::io::BufReader::new(file).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: AblationRow = serde_json::from_str(&line)?;
            rows.push(row);
        }
        print!("{}", render_table(&rows));
        return Ok(());
    }

    let report_path = config.output_dir().join("report.json");
    if report_path.exists() {
        let report: EvalReport = read_json(&report_path)?;
        println!(
            "{} objective | seed {} | threshold {:.4} ({})",
            report.objective.label(),
            report.seed,
            report.threshold,
            report.threshold_rule
        );
        println!(
            "validation macro F1 {:.4} | test macro F1 {:.4}",
            report.validation.macro_f1, report.test.macro_f1
        );
        println!(
            "test lie precision {:.4} / recall {:.4} / F1 {:.4}",
            report.test.lie_precision, report.test.lie_recall, report.test.lie_f1
        );
        println!(
            "timing: train {:.2} s, inference {:.2} s",
            report.timing.train_seconds,
            report.timing.inference_seconds.unwrap_or(0.0)
        );
        println!("config hash {}", report.config_hash);
        return Ok(());
    }

    Err(usage(format!(
        "nothing to report under `{}`; run `pulie eval` or `pulie ablate` first",
        config.output_dir().display()
    )))
}
