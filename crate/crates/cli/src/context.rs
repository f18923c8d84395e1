//! Shared data-loading paths: flattened split files or the synthetic
//! benchmark, lexicons, and the embedding store, assembled into
//! ready-to-train examples.

use std::io::BufReader;
use std::path::Path;

use pulie_core::corpus::{read_flattened, DatasetSplit};
use pulie_core::embeddings::{load_store_file, EmbeddingStore};
use pulie_core::features::Standardizer;
use pulie_core::lexicon::Lexicons;
use pulie_core::model::ModelDims;
use pulie_core::pipeline::{assemble_synthetic, assemble_with, AssembledData, TextDataset};
use pulie_core::synth::{generate, SynthConfig};

use crate::artifacts::{EmbeddingMeta, StoreMeta};
use crate::config::{hex_digest, CorpusSource, ExperimentConfig};
use crate::errors::{data, usage, CliError};

pub struct Prepared {
    pub data: AssembledData,
    pub texts: TextDataset,
    pub dims: ModelDims,
    pub lexicon_hash: String,
    pub embedding: EmbeddingMeta,
}

pub fn lexicon_hash(lexicons: &Lexicons) -> String {
    hex_digest(&lexicons.canonical_bytes())
}

/// Read the three flattened split files produced by `ingest`.
pub fn load_split_files(config: &ExperimentConfig) -> Result<DatasetSplit, CliError> {
    let [train, validation, test] = config.split_paths();
    let read = |path: &Path| -> Result<Vec<pulie_core::MessageRecord>, CliError> {
        let file = std::fs::File::open(path).map_err(|e| {
            usage(format!(
                "flattened corpus `{}` is missing ({e}); run `pulie ingest` first",
                path.display()
            ))
        })?;
        Ok(read_flattened(BufReader::new(file))?)
    };
    Ok(DatasetSplit::from_parts(
        read(&train)?,
        read(&validation)?,
        read(&test)?,
    )?)
}

fn load_store(config: &ExperimentConfig) -> Result<(EmbeddingStore, EmbeddingMeta), CliError> {
    let path = config.embeddings_path();
    if !path.exists() {
        return Err(usage(format!(
            "embedding store `{}` is missing; run `pulie embed` first or point paths.embeddings at an existing store",
            path.display()
        )));
    }
    let store = load_store_file(&path)?;
    if store.dim() != config.model.embed_dim {
        return Err(data(format!(
            "embedding store `{}` has dimension {} but model.embed_dim is {}; re-run `pulie embed` with embed.dim = {}",
            path.display(),
            store.dim(),
            config.model.embed_dim,
            config.model.embed_dim
        )));
    }
    let meta_path = StoreMeta::path_for(&path);
    let embedding = if meta_path.exists() {
        let meta: StoreMeta = crate::artifacts::read_json(&meta_path)?;
        EmbeddingMeta {
            mode: meta.mode,
            dim: meta.dim,
            hash_seed: meta.hash_seed,
        }
    } else {
        // externally produced store; only key lookups are possible
        EmbeddingMeta {
            mode: "import".to_string(),
            dim: store.dim(),
            hash_seed: 0,
        }
    };
    Ok((store, embedding))
}

/// Assemble training data per the configuration, optionally applying a
/// frozen standardizer from a checkpoint instead of refitting.
pub fn prepare(
    config: &ExperimentConfig,
    frozen: Option<&Standardizer>,
) -> Result<Prepared, CliError> {
    match config.corpus.source {
        CorpusSource::Synthetic => prepare_synthetic(config, &config.synth),
        CorpusSource::File => {
            let split = load_split_files(config)?;
            let lexicons = config.lexicons()?;
            let (store, embedding) = if config.model.embed_dim == 0 {
                (
                    None,
                    EmbeddingMeta {
                        mode: "none".to_string(),
                        dim: 0,
                        hash_seed: 0,
                    },
                )
            } else {
                let (store, embedding) = load_store(config)?;
                (Some(store), embedding)
            };
            let data = assemble_with(&split, &lexicons, store.as_ref(), frozen)?;
            let dims = ModelDims {
                feature_dim: config.model.feature_dim,
                hidden_dim: config.model.hidden_dim,
                embed_dim: data.embed_dim,
            };
            Ok(Prepared {
                texts: TextDataset::from_split(&split),
                data,
                dims,
                lexicon_hash: lexicon_hash(&lexicons),
                embedding,
            })
        }
    }
}

/// Synthetic preparation with an explicit generator configuration (the
/// ablation harness regenerates per seed).
pub fn prepare_synthetic(
    config: &ExperimentConfig,
    synth: &SynthConfig,
) -> Result<Prepared, CliError> {
    let dataset = generate(synth);
    let data = assemble_synthetic(&dataset)?;
    let dims = ModelDims {
        feature_dim: synth.feature_dim,
        hidden_dim: config.model.hidden_dim,
        embed_dim: 0,
    };
    let lexicons = config.lexicons()?;
    Ok(Prepared {
        texts: TextDataset::from_synthetic(&dataset),
        data,
        dims,
        lexicon_hash: lexicon_hash(&lexicons),
        embedding: EmbeddingMeta {
            mode: "none".to_string(),
            dim: 0,
            hash_seed: 0,
        },
    })
}
