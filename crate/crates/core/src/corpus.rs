//! Dialog-level dataset parsing, per-message flattening, PU label
//! assignment, and reproducible game-level splits.
//!
//! The input format is line-delimited JSON, one dialog per line. Every
//! per-message field is a parallel array; `parse_dialog_line` rejects lines
//! whose arrays disagree in length.

use std::collections::{BTreeSet, HashSet};
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed dialog line: {reason}")]
    MalformedLine { reason: String },
    #[error("length mismatch in `{field}`: expected {expected} entries, found {found}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("need at least 3 distinct game ids for an internal split, found {found}")]
    TooFewGames { found: usize },
    #[error("duplicate message key `{key}`")]
    DuplicateKey { key: String },
    #[error("message key `{key}` appears in more than one split")]
    SplitOverlap { key: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Raw tri-state annotation as it appears on the wire, before the
/// lie/truth convention is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelTag {
    True,
    False,
    Unannotated,
}

/// One dialog: parallel per-message arrays plus game-level metadata.
#[derive(Debug, Clone)]
pub struct DialogRecord {
    pub messages: Vec<String>,
    pub speakers: Vec<String>,
    pub receivers: Vec<String>,
    pub sender_labels: Vec<LabelTag>,
    pub receiver_labels: Vec<LabelTag>,
    pub game_score: Vec<i32>,
    pub game_score_delta: Vec<i32>,
    pub seasons: Vec<String>,
    pub years: Vec<i32>,
    pub absolute_message_index: Vec<u32>,
    pub relative_message_index: Vec<u32>,
    pub game_id: u32,
    pub players: (String, String),
}

impl DialogRecord {
    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }
}

/// Message-level annotation under the configured lie/truth convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SenderAnnotation {
    Lie,
    Truth,
    Unannotated,
}

impl SenderAnnotation {
    /// PU training label: annotated lies are the positives, annotated
    /// truths join the unlabeled pool, unannotated messages are excluded.
    pub fn to_pu_label(self) -> Option<PuLabel> {
        match self {
            SenderAnnotation::Lie => Some(PuLabel::Positive),
            SenderAnnotation::Truth => Some(PuLabel::Unlabeled),
            SenderAnnotation::Unannotated => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PuLabel {
    Positive,
    Unlabeled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Spring,
    Fall,
    Winter,
    Unknown,
}

impl Season {
    pub fn parse(s: &str) -> Season {
        match s.to_lowercase().as_str() {
            "spring" => Season::Spring,
            "fall" => Season::Fall,
            "winter" => Season::Winter,
            _ => Season::Unknown,
        }
    }
}

/// One flattened message with its game context.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageRecord {
    pub text: String,
    pub speaker: String,
    pub receiver: String,
    pub sender_annotation: SenderAnnotation,
    pub game_id: u32,
    pub season: Season,
    pub year: i32,
    pub game_score: i32,
    pub game_score_delta: i32,
    pub absolute_index: u32,
    pub relative_index: u32,
}

impl MessageRecord {
    /// Stable corpus-wide key.
    pub fn key(&self) -> String {
        format!("{}:{}", self.game_id, self.absolute_index)
    }

    pub fn to_pu_label(&self) -> Option<PuLabel> {
        self.sender_annotation.to_pu_label()
    }
}

#[derive(Debug, Clone, Default)]
pub struct DatasetSplit {
    pub train: Vec<MessageRecord>,
    pub validation: Vec<MessageRecord>,
    pub test: Vec<MessageRecord>,
}

impl DatasetSplit {
    /// Build from pre-assigned parts, enforcing key uniqueness and split
    /// disjointness.
    pub fn from_parts(
        train: Vec<MessageRecord>,
        validation: Vec<MessageRecord>,
        test: Vec<MessageRecord>,
    ) -> Result<Self, CorpusError> {
        let mut seen: HashSet<String> = HashSet::new();
        for records in [&train, &validation, &test] {
            let mut local: HashSet<String> = HashSet::new();
            for rec in records {
                let key = rec.key();
                if !local.insert(key.clone()) {
                    return Err(CorpusError::DuplicateKey { key });
                }
                if !seen.insert(key) {
                    let key = rec.key();
                    return Err(CorpusError::SplitOverlap { key });
                }
            }
        }
        Ok(DatasetSplit {
            train,
            validation,
            test,
        })
    }

    pub fn all_records(&self) -> impl Iterator<Item = &MessageRecord> {
        self.train
            .iter()
            .chain(self.validation.iter())
            .chain(self.test.iter())
    }
}

// Wire-level shims: the dataset encodes numbers sometimes as JSON numbers,
// sometimes as decimal strings, and annotations as booleans or the
// "NOANNOTATION" string.
#[derive(Deserialize)]
#[serde(untagged)]
enum IntLike {
    Int(i64),
    Str(String),
}

impl IntLike {
    fn parse(&self, field: &'static str) -> Result<i64, CorpusError> {
        match self {
            IntLike::Int(v) => Ok(*v),
            IntLike::Str(s) => s
                .trim()
                .parse::<i64>()
                .map_err(|_| CorpusError::MalformedLine {
                    reason: format!("field `{field}`: `{s}` is not an integer"),
                }),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawAnnotation {
    Flag(bool),
    Tag(String),
}

impl RawAnnotation {
    fn to_label_tag(&self, field: &'static str) -> Result<LabelTag, CorpusError> {
        match self {
            RawAnnotation::Flag(true) => Ok(LabelTag::True),
            RawAnnotation::Flag(false) => Ok(LabelTag::False),
            RawAnnotation::Tag(s) if s == "NOANNOTATION" => Ok(LabelTag::Unannotated),
            RawAnnotation::Tag(s) => Err(CorpusError::MalformedLine {
                reason: format!("field `{field}`: unknown annotation `{s}`"),
            }),
        }
    }
}

#[derive(Deserialize)]
struct RawDialog {
    messages: Vec<String>,
    speakers: Vec<String>,
    receivers: Vec<String>,
    sender_labels: Vec<RawAnnotation>,
    receiver_labels: Vec<RawAnnotation>,
    game_score: Vec<IntLike>,
    game_score_delta: Vec<IntLike>,
    seasons: Vec<String>,
    years: Vec<IntLike>,
    absolute_message_index: Vec<u64>,
    relative_message_index: Vec<u64>,
    game_id: u32,
    players: Vec<String>,
}

/// Parse one dialog line, validating the parallel-array invariants.
/// Unknown fields on the line are ignored.
pub fn parse_dialog_line(line: &str) -> Result<DialogRecord, CorpusError> {
    let raw: RawDialog = serde_json::from_str(line).map_err(|e| CorpusError::MalformedLine {
        reason: e.to_string(),
    })?;

    let n = raw.messages.len();
    check_len("speakers", n, raw.speakers.len())?;
    check_len("receivers", n, raw.receivers.len())?;
    check_len("sender_labels", n, raw.sender_labels.len())?;
    check_len("receiver_labels", n, raw.receiver_labels.len())?;
    check_len("game_score", n, raw.game_score.len())?;
    check_len("game_score_delta", n, raw.game_score_delta.len())?;
    check_len("seasons", n, raw.seasons.len())?;
    check_len("years", n, raw.years.len())?;
    check_len(
        "absolute_message_index",
        n,
        raw.absolute_message_index.len(),
    )?;
    check_len(
        "relative_message_index",
        n,
        raw.relative_message_index.len(),
    )?;

    if raw.players.len() != 2 {
        return Err(CorpusError::MalformedLine {
            reason: format!(
                "`players` must name exactly 2 countries, found {}",
                raw.players.len()
            ),
        });
    }

    let sender_labels = raw
        .sender_labels
        .iter()
        .map(|a| a.to_label_tag("sender_labels"))
        .collect::<Result<Vec<_>, _>>()?;
    let receiver_labels = raw
        .receiver_labels
        .iter()
        .map(|a| a.to_label_tag("receiver_labels"))
        .collect::<Result<Vec<_>, _>>()?;

    let game_score = parse_i32s(&raw.game_score, "game_score")?;
    let game_score_delta = parse_i32s(&raw.game_score_delta, "game_score_delta")?;

    let mut years = Vec::with_capacity(n);
    for y in &raw.years {
        let v = y.parse("years")?;
        if !(1901..=9999).contains(&v) {
            return Err(CorpusError::MalformedLine {
                reason: format!("`years`: {v} is not a 4-digit year >= 1901"),
            });
        }
        years.push(v as i32);
    }

    let absolute: Vec<u32> = raw
        .absolute_message_index
        .iter()
        .map(|&v| v as u32)
        .collect();
    for w in absolute.windows(2) {
        if w[1] <= w[0] {
            return Err(CorpusError::MalformedLine {
                reason: format!(
                    "`absolute_message_index` must be strictly increasing, saw {} after {}",
                    w[1], w[0]
                ),
            });
        }
    }

    let relative: Vec<u32> = raw
        .relative_message_index
        .iter()
        .map(|&v| v as u32)
        .collect();
    for (i, &r) in relative.iter().enumerate() {
        if r as usize != i {
            return Err(CorpusError::MalformedLine {
                reason: format!(
                    "`relative_message_index` must count 0,1,2,... found {r} at position {i}"
                ),
            });
        }
    }

    Ok(DialogRecord {
        messages: raw.messages,
        speakers: raw.speakers,
        receivers: raw.receivers,
        sender_labels,
        receiver_labels,
        game_score,
        game_score_delta,
        seasons: raw.seasons,
        years,
        absolute_message_index: absolute,
        relative_message_index: relative,
        game_id: raw.game_id,
        players: {
            let mut it = raw.players.into_iter();
            (it.next().unwrap(), it.next().unwrap())
        },
    })
}

fn check_len(field: &'static str, expected: usize, found: usize) -> Result<(), CorpusError> {
    if expected != found {
        Err(CorpusError::LengthMismatch {
            field,
            expected,
            found,
        })
    } else {
        Ok(())
    }
}

fn parse_i32s(values: &[IntLike], field: &'static str) -> Result<Vec<i32>, CorpusError> {
    values
        .iter()
        .map(|v| v.parse(field).map(|x| x as i32))
        .collect()
}

/// Flatten a dialog into one record per message.
///
/// The default convention maps `true` to [`SenderAnnotation::Lie`];
/// `invert_labels` swaps lie and truth at ingestion for datasets that
/// publish the opposite polarity.
pub fn flatten(dialog: &DialogRecord, invert_labels: bool) -> Vec<MessageRecord> {
    (0..dialog.len())
        .map(|i| {
            let annotation = match dialog.sender_labels[i] {
                LabelTag::True => SenderAnnotation::Lie,
                LabelTag::False => SenderAnnotation::Truth,
                LabelTag::Unannotated => SenderAnnotation::Unannotated,
            };
            let annotation = if invert_labels {
                match annotation {
                    SenderAnnotation::Lie => SenderAnnotation::Truth,
                    SenderAnnotation::Truth => SenderAnnotation::Lie,
                    SenderAnnotation::Unannotated => SenderAnnotation::Unannotated,
                }
            } else {
                annotation
            };
            MessageRecord {
                text: dialog.messages[i].clone(),
                speaker: dialog.speakers[i].clone(),
                receiver: dialog.receivers[i].clone(),
                sender_annotation: annotation,
                game_id: dialog.game_id,
                season: Season::parse(&dialog.seasons[i]),
                year: dialog.years[i],
                game_score: dialog.game_score[i],
                game_score_delta: dialog.game_score_delta[i],
                absolute_index: dialog.absolute_message_index[i],
                relative_index: dialog.relative_message_index[i],
            }
        })
        .collect()
}

/// Load every dialog from a line-delimited reader, annotating parse errors
/// with their line number.
pub fn load_dialogs<R: BufRead>(reader: R) -> Result<Vec<DialogRecord>, CorpusError> {
    let mut dialogs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let dialog = parse_dialog_line(&line).map_err(|e| match e {
            CorpusError::MalformedLine { reason } => CorpusError::MalformedLine {
                reason: format!("line {}: {reason}", idx + 1),
            },
            other => other,
        })?;
        dialogs.push(dialog);
    }
    Ok(dialogs)
}

/// Shuffle distinct game ids with the given seed and assign whole games to
/// train/validation/test in a 10/1/1 ratio. Deterministic for a fixed seed.
pub fn make_splits(
    corpus: &[DialogRecord],
    invert_labels: bool,
    seed: u64,
) -> Result<DatasetSplit, CorpusError> {
    let game_ids: BTreeSet<u32> = corpus.iter().map(|d| d.game_id).collect();
    if game_ids.len() < 3 {
        return Err(CorpusError::TooFewGames {
            found: game_ids.len(),
        });
    }

    let mut games: Vec<u32> = game_ids.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    games.shuffle(&mut rng);

    let n = games.len();
    let n_test = (n / 12).max(1);
    let n_val = (n / 12).max(1);
    let test_games: HashSet<u32> = games[..n_test].iter().copied().collect();
    let val_games: HashSet<u32> = games[n_test..n_test + n_val].iter().copied().collect();

    let mut split = DatasetSplit::default();
    for dialog in corpus {
        let records = flatten(dialog, invert_labels);
        let bucket = if test_games.contains(&dialog.game_id) {
            &mut split.test
        } else if val_games.contains(&dialog.game_id) {
            &mut split.validation
        } else {
            &mut split.train
        };
        bucket.extend(records);
    }
    DatasetSplit::from_parts(split.train, split.validation, split.test)
}

/// Fraction of annotated messages labeled as lies; `None` when nothing is
/// annotated.
pub fn positive_rate<'a, I: IntoIterator<Item = &'a MessageRecord>>(records: I) -> Option<f64> {
    let mut lies = 0usize;
    let mut annotated = 0usize;
    for rec in records {
        match rec.sender_annotation {
            SenderAnnotation::Lie => {
                lies += 1;
                annotated += 1;
            }
            SenderAnnotation::Truth => annotated += 1,
            SenderAnnotation::Unannotated => {}
        }
    }
    (annotated > 0).then(|| lies as f64 / annotated as f64)
}

// Flattened per-message wire format: one JSON object per line with a stable
// "game_id:absolute_index" key.
#[derive(Serialize, Deserialize)]
struct FlatWire {
    key: String,
    text: String,
    speaker: String,
    receiver: String,
    sender_annotation: SenderAnnotation,
    game_id: u32,
    season: Season,
    year: i32,
    game_score: i32,
    game_score_delta: i32,
    absolute_index: u32,
    relative_index: u32,
}

impl From<&MessageRecord> for FlatWire {
    fn from(rec: &MessageRecord) -> Self {
        FlatWire {
            key: rec.key(),
            text: rec.text.clone(),
            speaker: rec.speaker.clone(),
            receiver: rec.receiver.clone(),
            sender_annotation: rec.sender_annotation,
            game_id: rec.game_id,
            season: rec.season,
            year: rec.year,
            game_score: rec.game_score,
            game_score_delta: rec.game_score_delta,
            absolute_index: rec.absolute_index,
            relative_index: rec.relative_index,
        }
    }
}

/// Emit records in the flattened line-delimited format, one message per line.
pub fn write_flattened<W: Write>(
    mut writer: W,
    records: &[MessageRecord],
) -> Result<(), CorpusError> {
    for rec in records {
        let wire = FlatWire::from(rec);
        serde_json::to_writer(&mut writer, &wire).map_err(|e| CorpusError::MalformedLine {
            reason: e.to_string(),
        })?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Read records back from the flattened line-delimited format.
pub fn read_flattened<R: BufRead>(reader: R) -> Result<Vec<MessageRecord>, CorpusError> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let wire: FlatWire =
            serde_json::from_str(&line).map_err(|e| CorpusError::MalformedLine {
                reason: format!("line {}: {e}", idx + 1),
            })?;
        let rec = MessageRecord {
            text: wire.text,
            speaker: wire.speaker,
            receiver: wire.receiver,
            sender_annotation: wire.sender_annotation,
            game_id: wire.game_id,
            season: wire.season,
            year: wire.year,
            game_score: wire.game_score,
            game_score_delta: wire.game_score_delta,
            absolute_index: wire.absolute_index,
            relative_index: wire.relative_index,
        };
        if rec.key() != wire.key {
            return Err(CorpusError::MalformedLine {
                reason: format!(
                    "line {}: key `{}` does not match game_id:absolute_index `{}`",
                    idx + 1,
                    wire.key,
                    rec.key()
                ),
            });
        }
        records.push(rec);
    }
    Ok(records)
}
