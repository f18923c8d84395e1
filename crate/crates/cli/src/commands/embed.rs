//! Produce the binary embedding store: either deterministic hashing
//! vectors over the flattened corpus, or an import of an external
//! encoder's text matrix checked for full key coverage.

use std::io::BufReader;

use pulie_core::embeddings::{hash_embed, import_text, write_store_file, EmbeddingStore};

use crate::artifacts::StoreMeta;
use crate::config::ExperimentConfig;
use crate::context::load_split_files;
use crate::errors::{data, usage, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EmbedMode {
    /// Seeded signed feature hashing; needs no external model.
    Hash,
    /// Read `key<TAB>values` lines produced by an external encoder run.
    Import,
}

pub fn run(config: &ExperimentConfig, mode: EmbedMode) -> Result<(), CliError> {
    if config.corpus.source == crate::config::CorpusSource::Synthetic {
        return Err(usage(
            "the synthetic corpus trains on the feature branch alone and needs no embedding store",
        ));
    }
    let split = load_split_files(config)?;
    let out_path = config.embeddings_path();
    if let Some(parent) = out_path.parent() {
        std::fs::create_dir_all(parent)?;
    }

    let store = match mode {
        EmbedMode::Hash => {
            let dim = config.embed.dim;
            let mut store = EmbeddingStore::new(dim);
            for rec in split.all_records() {
                store.insert(
                    rec.key(),
                    hash_embed(&rec.text, dim, config.embed.hash_seed),
                )?;
            }
            store
        }
        EmbedMode::Import => {
            let source = config.embed.import.as_ref().ok_or_else(|| {
                usage("embed --mode import needs embed.import to point at the text matrix file")
            })?;
            let file = std::fs::File::open(source).map_err(|e| {
                usage(format!(
                    "cannot open embed.import `{}`: {e}",
                    source.display()
                ))
            })?;
            let store = import_text(BufReader::new(file))?;
            let missing: Vec<String> = split
                .all_records()
                .map(|rec| rec.key())
                .filter(|key| !store.contains(key))
                .collect();
            if !missing.is_empty() {
                let shown: Vec<&str> = missing.iter().take(20).map(String::as_str).collect();
                return Err(data(format!(
                    "imported matrix misses {} corpus keys (first {}: {}); every message needs a vector",
                    missing.len(),
                    shown.len(),
                    shown.join(", ")
                )));
            }
            store
        }
    };

    write_store_file(&store, &out_path)?;
    let meta = StoreMeta {
        format: "pulie-store-meta".to_string(),
        version: 1,
        mode: match mode {
            EmbedMode::Hash => "hash".to_string(),
            EmbedMode::Import => "import".to_string(),
        },
        dim: store.dim(),
        hash_seed: config.embed.hash_seed,
        source: config
            .embed
            .import
            .as_ref()
            .filter(|_| mode == EmbedMode::Import)
            .map(|p| p.display().to_string()),
        key_count: store.len(),
        config_hash: config.hash(),
    };
    crate::artifacts::write_json(&StoreMeta::path_for(&out_path), &meta)?;

    println!(
        "wrote {} vectors of dimension {} to {}",
        store.len(),
        store.dim(),
        out_path.display()
    );
    Ok(())
}
