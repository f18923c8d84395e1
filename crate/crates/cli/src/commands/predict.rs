//! Score new messages with a trained checkpoint. Plain-text mode builds
//! metadata-free records and requires a hashing embedding branch (or a
//! model trained without one); flattened-record mode carries metadata and
//! can look vectors up in the configured store.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use pulie_core::corpus::{read_flattened, MessageRecord, Season, SenderAnnotation};
use pulie_core::embeddings::{hash_embed, load_store_file};
use pulie_core::features::extract;

use crate::config::ExperimentConfig;
use crate::errors::{data, usage, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PredictFormat {
    /// One raw message per line.
    Lines,
    /// Flattened per-message records as emitted by `ingest`.
    Jsonl,
}

fn stub_record(text: String, index: usize) -> MessageRecord {
    MessageRecord {
        text,
        speaker: "unknown".to_string(),
        receiver: "unknown".to_string(),
        sender_annotation: SenderAnnotation::Unannotated,
        game_id: 0,
        season: Season::Unknown,
        year: 1901,
        game_score: 0,
        game_score_delta: 0,
        absolute_index: index as u32,
        relative_index: index as u32,
    }
}

pub fn run(
    config: &ExperimentConfig,
    input: &Path,
    format: PredictFormat,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    let (model, meta) = super::eval::load_model(config)?;
    let lexicons = config.lexicons()?;

    let file = std::fs::File::open(input)
        .map_err(|e| usage(format!("cannot open input `{}`: {e}", input.display())))?;
    let reader = BufReader::new(file);
    let (records, keys): (Vec<MessageRecord>, Vec<String>) = match format {
        PredictFormat::Lines => {
            let mut records = Vec::new();
            let mut keys = Vec::new();
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                keys.push(format!("input:{i}"));
                records.push(stub_record(line, i));
            }
            (records, keys)
        }
        PredictFormat::Jsonl => {
            let records = read_flattened(reader)?;
            let keys = records.iter().map(|r| r.key()).collect();
            (records, keys)
        }
    };
    if records.is_empty() {
        return Err(data(format!(
            "input `{}` holds no messages",
            input.display()
        )));
    }

    // embedding source per the trained branch
    let store = match meta.embedding.mode.as_str() {
        "import" => Some(load_store_file(config.embeddings_path()).map_err(|e| {
            data(format!(
                "the checkpoint was trained on imported embeddings and scoring needs the store at `{}`: {e}",
                config.embeddings_path().display()
            ))
        })?),
        _ => None,
    };

    let mut scored = Vec::with_capacity(records.len());
    for (rec, key) in records.iter().zip(&keys) {
        let features = meta
            .standardizer
            .apply(&extract(rec, &lexicons))
            .map_err(|e| data(e.to_string()))?
            .values;
        let embedding: Vec<f64> = match meta.embedding.mode.as_str() {
            "none" => Vec::new(),
            "hash" => hash_embed(&rec.text, meta.embedding.dim, meta.embedding.hash_seed)
                .values
                .iter()
                .map(|&v| v as f64)
                .collect(),
            "import" => {
                let store = store.as_ref().expect("store loaded for import mode");
                store
                    .lookup(key)
                    .map_err(|_| {
                        data(format!(
                            "no stored embedding for key `{key}`; imported-embedding models can only score messages covered by the store (use --format jsonl with corpus keys)"
                        ))
                    })?
                    .values
                    .iter()
                    .map(|&v| v as f64)
                    .collect()
            }
            other => {
                return Err(data(format!(
                    "unknown embedding mode `{other}` in metadata"
                )))
            }
        };
        let score = model.predict(&features, &embedding)?;
        scored.push((key.clone(), score));
    }

    let out_path = output.unwrap_or_else(|| config.output_dir().join("predictions.jsonl"));
    if let Some(parent) = out_path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let file = std::fs::File::create(&out_path)?;
    let mut writer = std::io::BufWriter::new(file);
    for (key, score) in &scored {
        let line = serde_json::json!({ "key": key, "score": score });
        writeln!(writer, "{line}")?;
        println!("{key}\t{score:.6}");
    }
    writer.flush()?;
    eprintln!(
        "{} predictions written to {}",
        scored.len(),
        out_path.display()
    );
    Ok(())
}
