//! Parse the dialog corpus, flatten to per-message records, assign splits,
//! and emit the flattened files plus feature vectors and corpus statistics.

use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use pulie_core::corpus::{
    load_dialogs, make_splits, write_flattened, DatasetSplit, MessageRecord, SenderAnnotation,
};
use pulie_core::features::{extract, FEATURE_DIM, FEATURE_NAMES};
use pulie_core::pipeline::TextDataset;

use crate::config::{CorpusSource, ExperimentConfig};
use crate::errors::{usage, CliError};

#[derive(Serialize)]
struct SplitStats {
    messages: usize,
    lies: usize,
    truths: usize,
    unannotated: usize,
    positive_rate: Option<f64>,
}

#[derive(Serialize)]
struct CorpusStats {
    games: usize,
    messages: usize,
    deceptive_rate: Option<f64>,
    train: SplitStats,
    validation: SplitStats,
    test: SplitStats,
    config_hash: String,
    lexicon_hash: String,
}

fn split_stats(records: &[MessageRecord]) -> SplitStats {
    let lies = records
        .iter()
        .filter(|r| r.sender_annotation == SenderAnnotation::Lie)
        .count();
    let truths = records
        .iter()
        .filter(|r| r.sender_annotation == SenderAnnotation::Truth)
        .count();
    SplitStats {
        messages: records.len(),
        lies,
        truths,
        unannotated: records.len() - lies - truths,
        positive_rate: ((lies + truths) > 0).then(|| lies as f64 / (lies + truths) as f64),
    }
}

fn load_file(path: &Path) -> Result<Vec<pulie_core::DialogRecord>, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| usage(format!("cannot open corpus file `{}`: {e}", path.display())))?;
    Ok(load_dialogs(BufReader::new(file))?)
}

pub fn run(config: &ExperimentConfig) -> Result<(), CliError> {
    if config.corpus.source == CorpusSource::Synthetic {
        return Err(usage(
            "ingest operates on dialog files; the synthetic corpus is generated on the fly by train/eval/ablate",
        ));
    }

    let invert = config.corpus.invert_labels;
    let predefined = [
        &config.paths.train,
        &config.paths.validation,
        &config.paths.test,
    ];
    let (split, games) = if predefined.iter().all(|p| p.is_some()) {
        // predefined split files are honored verbatim
        let mut parts = Vec::with_capacity(3);
        let mut games = std::collections::BTreeSet::new();
        for path in predefined.into_iter().flatten() {
            let dialogs = load_file(path)?;
            games.extend(dialogs.iter().map(|d| d.game_id));
            let records: Vec<MessageRecord> = dialogs
                .iter()
                .flat_map(|d| pulie_core::corpus::flatten(d, invert))
                .collect();
            parts.push(records);
        }
        let test = parts.pop().unwrap();
        let validation = parts.pop().unwrap();
        let train = parts.pop().unwrap();
        (
            DatasetSplit::from_parts(train, validation, test)?,
            games.len(),
        )
    } else if let Some(path) = &config.paths.corpus {
        let dialogs = load_file(path)?;
        let games = dialogs
            .iter()
            .map(|d| d.game_id)
            .collect::<std::collections::BTreeSet<_>>()
            .len();
        (
            make_splits(&dialogs, invert, config.corpus.split_seed)?,
            games,
        )
    } else {
        return Err(usage(
            "no corpus configured: set paths.corpus (single file) or paths.train/validation/test (predefined splits)",
        ));
    };

    let out_dir = config.output_dir();
    std::fs::create_dir_all(out_dir)?;

    let [train_path, val_path, test_path] = config.split_paths();
    for (path, records) in [
        (&train_path, &split.train),
        (&val_path, &split.validation),
        (&test_path, &split.test),
    ] {
        let file = std::fs::File::create(path)?;
        let mut writer = BufWriter::new(file);
        write_flattened(&mut writer, records)?;
        writer.flush()?;
    }

    // per-message feature dump plus the index->name sidecar
    let lexicons = config.lexicons()?;
    let features_path = out_dir.join("features.jsonl");
    {
        let file = std::fs::File::create(&features_path)?;
        let mut writer = BufWriter::new(file);
        for rec in split.all_records() {
            let vector = extract(rec, &lexicons);
            let line = serde_json::json!({ "key": rec.key(), "values": vector.values });
            writeln!(writer, "{line}")?;
        }
        writer.flush()?;
    }
    crate::artifacts::write_json(
        &out_dir.join("features_layout.json"),
        &serde_json::json!({ "dim": FEATURE_DIM, "names": FEATURE_NAMES.to_vec() }),
    )?;

    let all: Vec<MessageRecord> = split.all_records().cloned().collect();
    let overall = split_stats(&all);
    let stats = CorpusStats {
        games,
        messages: all.len(),
        deceptive_rate: overall.positive_rate,
        train: split_stats(&split.train),
        validation: split_stats(&split.validation),
        test: split_stats(&split.test),
        config_hash: config.hash(),
        lexicon_hash: crate::context::lexicon_hash(&lexicons),
    };
    crate::artifacts::write_json(&out_dir.join("corpus_stats.json"), &stats)?;

    let annotated = TextDataset::from_split(&split);
    println!(
        "ingested {} messages across {} games ({} train / {} validation / {} test)",
        stats.messages,
        stats.games,
        stats.train.messages,
        stats.validation.messages,
        stats.test.messages
    );
    match stats.deceptive_rate {
        Some(rate) => println!(
            "deceptive rate over {} annotated messages: {:.2}%",
            annotated.train.len() + annotated.validation.len() + annotated.test.len(),
            rate * 100.0
        ),
        None => println!("corpus carries no annotations"),
    }
    println!(
        "flattened corpus and features written under {}",
        out_dir.display()
    );
    Ok(())
}
