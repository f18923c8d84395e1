//! On-disk experiment artifacts. Every output embeds the resolved
//! configuration and its hash so a run can be audited and reproduced;
//! wall-clock measurements live under a dedicated `timing` key that
//! reproducibility checks exclude.

use std::path::Path;

use serde::{Deserialize, Serialize};

use pulie_core::eval::MetricsReport;
use pulie_core::features::Standardizer;
use pulie_core::model::ModelDims;
use pulie_core::trainer::{EpochStats, Objective};

use crate::config::ExperimentConfig;
use crate::errors::{data, CliError};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timing {
    pub train_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inference_seconds: Option<f64>,
}

/// Sidecar of the binary embedding store, recording how it was produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoreMeta {
    pub format: String,
    pub version: u32,
    /// "hash" or "import".
    pub mode: String,
    pub dim: usize,
    pub hash_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub key_count: usize,
    pub config_hash: String,
}

impl StoreMeta {
    pub fn path_for(store_path: &Path) -> std::path::PathBuf {
        let mut name = store_path.file_name().unwrap_or_default().to_os_string();
        name.push(".meta.json");
        store_path.with_file_name(name)
    }
}

/// Sidecar of the model checkpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelMeta {
    pub format: String,
    pub version: u32,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub lexicon_hash: String,
    pub seed: u64,
    pub objective: Objective,
    pub dims: ModelDims,
    pub embedding: EmbeddingMeta,
    pub standardizer: Standardizer,
    pub best_epoch: usize,
    pub timing: Timing,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingMeta {
    /// "hash", "import", or "none" when the branch is disabled.
    pub mode: String,
    pub dim: usize,
    pub hash_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub format: String,
    pub version: u32,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub lexicon_hash: String,
    pub seed: u64,
    pub objective: Objective,
    pub threshold: f64,
    pub threshold_rule: String,
    pub validation: MetricsReport,
    pub test: MetricsReport,
    pub timing: Timing,
}

/// One comparison row, as emitted line-by-line by the ablation command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationRow {
    pub model: String,
    pub macro_f1_mean: f64,
    pub macro_f1_std: f64,
    pub params: usize,
    pub epochs: usize,
    pub seeds: Vec<u64>,
    pub per_seed_macro_f1: Vec<f64>,
    pub train_seconds: f64,
    pub inference_seconds: f64,
    pub config_hash: String,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(value)?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| data(format!("cannot read `{}`: {e}", path.display())))?;
    Ok(serde_json::from_str(&raw)?)
}

pub fn write_history(path: &Path, history: &[EpochStats]) -> Result<(), CliError> {
    let mut out = String::new();
    for stats in history {
        out.push_str(&serde_json::to_string(stats)?);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn seconds(s: f64) -> String {
    if s >= 60.0 {
        format!("{:.1} min", s / 60.0)
    } else {
        format!("{s:.2} s")
    }
}

/// Fixed-width comparison table over ablation rows: model, macro F1
/// (mean +- std), trainable parameters, wall-clock times, epochs.
pub fn render_table(rows: &[AblationRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<28} {:>18} {:>10} {:>12} {:>14} {:>7}\n",
        "Model", "Macro F1", "Params", "Train Time", "Inference Time", "Epochs"
    ));
    out.push_str(&"-".repeat(94));
    out.push('\n');
    for row in rows {
        let f1 = if row.macro_f1_std > 0.0 {
            format!("{:.4} (+-{:.4})", row.macro_f1_mean, row.macro_f1_std)
        } else {
            format!("{:.4}", row.macro_f1_mean)
        };
        out.push_str(&format!(
            "{:<28} {:>18} {:>10} {:>12} {:>14} {:>7}\n",
            row.model,
            f1,
            row.params,
            seconds(row.train_seconds),
            seconds(row.inference_seconds),
            if row.epochs == 0 {
                "-".to_string()
            } else {
                row.epochs.to_string()
            },
        ));
    }
    out
}
