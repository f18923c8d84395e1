//! The 34-dimensional interpretable feature vector: 24 linguistic
//! dimensions computed from message text and 10 game-context dimensions
//! from metadata, plus train-set standardization.
//!
//! All operations here are pure; extraction of equal inputs yields
//! bitwise-equal outputs.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{MessageRecord, Season};
use crate::lexicon::Lexicons;

/// Total feature width: 24 linguistic + 10 game dims.
pub const FEATURE_DIM: usize = 34;

/// Index -> name mapping, in extraction order. Emitted as the sidecar
/// layout file so downstream consumers can audit individual dimensions.
pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "pronoun_first_singular",
    "pronoun_first_plural",
    "pronoun_second_person",
    "pronoun_third_person",
    "hedge_ratio",
    "assertive_ratio",
    "negation_ratio",
    "politeness_ratio",
    "commitment_ratio",
    "planning_ratio",
    "subordinator_ratio",
    "sentiment_positive",
    "sentiment_negative",
    "sentiment_neutral",
    "sentiment_compound",
    "log_token_count",
    "log_char_count",
    "question_marks",
    "exclamation_marks",
    "all_caps_word_ratio",
    "digit_char_ratio",
    "mean_word_length",
    "type_token_ratio",
    "hedge_presence",
    "season_spring",
    "season_fall",
    "season_winter",
    "season_unknown",
    "year_offset",
    "game_score",
    "game_score_delta",
    "game_score_delta_sign",
    "log_relative_index",
    "log_absolute_index",
];

const FIRST_SINGULAR: [&str; 9] = [
    "i", "i'm", "i'll", "i've", "i'd", "me", "my", "mine", "myself",
];
const FIRST_PLURAL: [&str; 9] = [
    "we",
    "we're",
    "we'll",
    "we've",
    "we'd",
    "us",
    "our",
    "ours",
    "ourselves",
];
const SECOND_PERSON: [&str; 8] = [
    "you", "you're", "you'll", "you've", "you'd", "your", "yours", "yourself",
];
const THIRD_PERSON: [&str; 12] = [
    "he", "she", "they", "them", "their", "theirs", "him", "her", "his", "hers", "it", "its",
];

/// Normalization constant of the compound sentiment score.
const COMPOUND_ALPHA: f64 = 15.0;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("cannot fit a standardizer on an empty training set")]
    EmptyTrainSet,
    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

/// Case-folded tokens split on maximal runs of characters that are not
/// letters, digits, or apostrophes.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// (first_singular, first_plural, second_person, third_person) pronoun
/// ratios over the token count.
pub fn pronoun_ratios(tokens: &[String]) -> [f64; 4] {
    let denom = tokens.len().max(1) as f64;
    let count = |class: &[&str]| -> f64 {
        tokens
            .iter()
            .filter(|t| class.contains(&t.as_str()))
            .count() as f64
    };
    [
        count(&FIRST_SINGULAR) / denom,
        count(&FIRST_PLURAL) / denom,
        count(&SECOND_PERSON) / denom,
        count(&THIRD_PERSON) / denom,
    ]
}

/// Fraction of tokens found in `lexicon`.
pub fn lexicon_ratio(tokens: &[String], lexicon: &HashSet<String>) -> f64 {
    let hits = tokens
        .iter()
        .filter(|t| lexicon.contains(t.as_str()))
        .count();
    hits as f64 / tokens.len().max(1) as f64
}

/// Lexicon-valence sentiment in the compound-normalization style:
/// `(positive, negative, neutral, compound)` where positive/negative/neutral
/// are token-count proportions and compound = z / sqrt(z^2 + 15) for the
/// summed valence z. Empty text scores (0, 0, 1, 0).
pub fn sentiment_scores(text: &str, valences: &HashMap<String, f64>) -> [f64; 4] {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return [0.0, 0.0, 1.0, 0.0];
    }
    let mut z = 0.0;
    let mut pos = 0usize;
    let mut neg = 0usize;
    for token in &tokens {
        match valences.get(token.as_str()) {
            Some(&v) if v > 0.0 => {
                z += v;
                pos += 1;
            }
            Some(&v) if v < 0.0 => {
                z += v;
                neg += 1;
            }
            _ => {}
        }
    }
    let n = tokens.len() as f64;
    let neutral = tokens.len() - pos - neg;
    let compound = z / (z * z + COMPOUND_ALPHA).sqrt();
    [pos as f64 / n, neg as f64 / n, neutral as f64 / n, compound]
}

/// Nine shallow surface dimensions; see [`FEATURE_NAMES`] indices 15..24.
pub fn surface_features(text: &str, tokens: &[String], hedges: &HashSet<String>) -> [f64; 9] {
    let token_count = tokens.len();
    let char_count = text.chars().count();

    let question = text.chars().filter(|&c| c == '?').count().min(5) as f64 / 5.0;
    let exclamation = text.chars().filter(|&c| c == '!').count().min(5) as f64 / 5.0;

    let words: Vec<&str> = text.split_whitespace().collect();
    let caps = words
        .iter()
        .filter(|w| {
            let letters: Vec<char> = w.chars().filter(|c| c.is_alphabetic()).collect();
            letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase())
        })
        .count();
    let caps_ratio = caps as f64 / words.len().max(1) as f64;

    let digits = text.chars().filter(|c| c.is_ascii_digit()).count();
    let digit_ratio = digits as f64 / char_count.max(1) as f64;

    let mean_word_len = if token_count == 0 {
        0.0
    } else {
        let total: usize = tokens.iter().map(|t| t.chars().count()).sum();
        (total as f64 / token_count as f64 / 10.0).min(1.0)
    };

    let type_token = if token_count == 0 {
        0.0
    } else {
        let distinct: HashSet<&str> = tokens.iter().map(String::as_str).collect();
        distinct.len() as f64 / token_count as f64
    };

    let hedge_presence = if tokens.iter().any(|t| hedges.contains(t.as_str())) {
        1.0
    } else {
        0.0
    };

    [
        (1.0 + token_count as f64).ln(),
        (1.0 + char_count as f64).ln(),
        question,
        exclamation,
        caps_ratio,
        digit_ratio,
        mean_word_len,
        type_token,
        hedge_presence,
    ]
}

/// Ten game-context dimensions; see [`FEATURE_NAMES`] indices 24..34.
pub fn game_features(rec: &MessageRecord) -> [f64; 10] {
    let season = match rec.season {
        Season::Spring => [1.0, 0.0, 0.0, 0.0],
        Season::Fall => [0.0, 1.0, 0.0, 0.0],
        Season::Winter => [0.0, 0.0, 1.0, 0.0],
        Season::Unknown => [0.0, 0.0, 0.0, 1.0],
    };
    let year = ((rec.year - 1901) as f64 / 10.0).clamp(0.0, 2.0);
    // 18 supply centers win the game; scores are denominated in them.
    let score = rec.game_score as f64 / 18.0;
    let delta = (rec.game_score_delta as f64 / 18.0).clamp(-1.0, 1.0);
    let delta_sign = match rec.game_score_delta.cmp(&0) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Equal => 0.0,
        std::cmp::Ordering::Less => -1.0,
    };
    [
        season[0],
        season[1],
        season[2],
        season[3],
        year,
        score,
        delta,
        delta_sign,
        (1.0 + rec.relative_index as f64).ln() / 10.0,
        (1.0 + rec.absolute_index as f64).ln() / 10.0,
    ]
}

/// Full 34-dim vector in [`FEATURE_NAMES`] order.
pub fn extract(rec: &MessageRecord, lex: &Lexicons) -> FeatureVector {
    let tokens = tokenize(&rec.text);
    let mut values = Vec::with_capacity(FEATURE_DIM);
    values.extend_from_slice(&pronoun_ratios(&tokens));
    for lexicon in [
        &lex.hedges,
        &lex.assertives,
        &lex.negations,
        &lex.politeness,
        &lex.commitment,
        &lex.planning,
        &lex.subordinators,
    ] {
        values.push(lexicon_ratio(&tokens, lexicon));
    }
    values.extend_from_slice(&sentiment_scores(&rec.text, &lex.sentiment_valences));
    values.extend_from_slice(&surface_features(&rec.text, &tokens, &lex.hedges));
    values.extend_from_slice(&game_features(rec));
    debug_assert_eq!(values.len(), FEATURE_DIM);
    FeatureVector { values }
}

/// Per-dimension z-scoring statistics fit on the training split only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
}

/// Stddev floor guarding constant dimensions.
pub const STDDEV_FLOOR: f64 = 1e-8;

pub fn fit_standardizer(train: &[FeatureVector]) -> Result<Standardizer, FeatureError> {
    let first = train.first().ok_or(FeatureError::EmptyTrainSet)?;
    let dim = first.values.len();
    for v in train {
        if v.values.len() != dim {
            return Err(FeatureError::DimMismatch {
                expected: dim,
                found: v.values.len(),
            });
        }
    }
    let n = train.len() as f64;
    let mut mean = vec![0.0; dim];
    for v in train {
        for (m, x) in mean.iter_mut().zip(&v.values) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![0.0; dim];
    for v in train {
        for ((s, x), m) in var.iter_mut().zip(&v.values).zip(&mean) {
            let d = x - m;
            *s += d * d;
        }
    }
    let stddev = var
        .into_iter()
        .map(|s| (s / n).sqrt().max(STDDEV_FLOOR))
        .collect();
    Ok(Standardizer { mean, stddev })
}

impl Standardizer {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, v: &FeatureVector) -> Result<FeatureVector, FeatureError> {
        if v.values.len() != self.mean.len() {
            return Err(FeatureError::DimMismatch {
                expected: self.mean.len(),
                found: v.values.len(),
            });
        }
        // A dimension that was constant in training carries no scale; any
        // deviation from its mean is unquantifiable, so it maps to 0
        // rather than exploding against the floored stddev.
        let values = v
            .values
            .iter()
            .zip(self.mean.iter().zip(&self.stddev))
            .map(|(x, (m, s))| if *s <= STDDEV_FLOOR { 0.0 } else { (x - m) / s })
            .collect();
        Ok(FeatureVector { values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SenderAnnotation;

    fn record(text: &str) -> MessageRecord {
        MessageRecord {
            text: text.to_string(),
            speaker: "italy".into(),
            receiver: "germany".into(),
            sender_annotation: SenderAnnotation::Truth,
            game_id: 1,
            season: Season::Spring,
            year: 1902,
            game_score: 3,
            game_score_delta: 0,
            absolute_index: 4,
            relative_index: 2,
        }
    }

    #[test]
    fn tokenize_basic() {
        assert_eq!(tokenize("Hello, world!"), vec!["hello", "world"]);
        assert_eq!(tokenize("I'll move west."), vec!["i'll", "move", "west"]);
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn pronoun_ratio_example() {
        let tokens = tokenize("i think we should trust them");
        let r = pronoun_ratios(&tokens);
        assert_eq!(r, [1.0 / 6.0, 1.0 / 6.0, 0.0, 1.0 / 6.0]);
    }

    #[test]
    fn pronoun_ratio_empty_and_saturated() {
        assert_eq!(pronoun_ratios(&[]), [0.0; 4]);
        let tokens = tokenize("you you you you");
        assert_eq!(pronoun_ratios(&tokens), [0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn lexicon_ratio_counts_hits() {
        let lex = Lexicons::bundled();
        let tokens = tokenize("maybe we could perhaps attack");
        assert!((lexicon_ratio(&tokens, &lex.hedges) - 3.0 / 5.0).abs() < 1e-12);
        assert_eq!(lexicon_ratio(&[], &lex.hedges), 0.0);
        let none = tokenize("zzz qqq");
        assert_eq!(lexicon_ratio(&none, &lex.hedges), 0.0);
    }

    #[test]
    fn sentiment_single_positive_token() {
        let mut valences = HashMap::new();
        valences.insert("good".to_string(), 2.0);
        let s = sentiment_scores("good", &valences);
        assert!((s[3] - 2.0 / 19.0_f64.sqrt()).abs() < 1e-12);
        assert_eq!(&s[..3], &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn sentiment_empty_text() {
        let s = sentiment_scores("", &HashMap::new());
        assert_eq!(s, [0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn sentiment_cancellation() {
        let mut valences = HashMap::new();
        valences.insert("up".to_string(), 1.5);
        valences.insert("down".to_string(), -1.5);
        let s = sentiment_scores("up down", &valences);
        assert_eq!(s[3], 0.0);
        assert_eq!(&s[..3], &[0.5, 0.5, 0.0]);
    }

    #[test]
    fn surface_question_cap() {
        let lex = Lexicons::bundled();
        let tokens = tokenize("OK???");
        let s = surface_features("OK???", &tokens, &lex.hedges);
        assert!((s[2] - 0.6).abs() < 1e-12);
        // one whitespace word, all caps
        assert_eq!(s[4], 1.0);
    }

    #[test]
    fn surface_empty_text() {
        let lex = Lexicons::bundled();
        let s = surface_features("", &[], &lex.hedges);
        assert_eq!(s, [0.0; 9]);
    }

    #[test]
    fn surface_distinct_tokens() {
        let lex = Lexicons::bundled();
        let tokens = tokenize("alpha beta gamma");
        let s = surface_features("alpha beta gamma", &tokens, &lex.hedges);
        assert_eq!(s[7], 1.0);
    }

    #[test]
    fn game_feature_examples() {
        let rec = record("hi");
        let g = game_features(&rec);
        assert_eq!(&g[..4], &[1.0, 0.0, 0.0, 0.0]);
        assert!((g[4] - 0.1).abs() < 1e-12);

        let mut winning = rec.clone();
        winning.game_score = 18;
        assert!((game_features(&winning)[5] - 1.0).abs() < 1e-12);

        assert_eq!(g[6], 0.0);
        assert_eq!(g[7], 0.0);

        let mut behind = rec;
        behind.game_score_delta = -40;
        let gb = game_features(&behind);
        assert_eq!(gb[6], -1.0);
        assert_eq!(gb[7], -1.0);
    }

    #[test]
    fn extract_shape_and_determinism() {
        let lex = Lexicons::bundled();
        let rec = record("I promise we will support you, maybe.");
        let a = extract(&rec, &lex);
        let b = extract(&rec, &lex);
        assert_eq!(a.values.len(), FEATURE_DIM);
        assert_eq!(a, b);
    }

    #[test]
    fn extract_empty_text_keeps_game_dims() {
        let lex = Lexicons::bundled();
        let rec = record("");
        let v = extract(&rec, &lex);
        assert_eq!(v.values[13], 1.0); // neutral proportion of the empty case
        assert_eq!(v.values[24], 1.0); // season one-hot unaffected
    }

    #[test]
    fn standardizer_zero_mean_unit_std() {
        let lex = Lexicons::bundled();
        let texts = ["I promise!", "maybe we attack?", "you lied to us", "fine."];
        let vectors: Vec<FeatureVector> = texts.iter().map(|t| extract(&record(t), &lex)).collect();
        let std = fit_standardizer(&vectors).unwrap();
        let applied: Vec<FeatureVector> = vectors.iter().map(|v| std.apply(v).unwrap()).collect();
        let refit = fit_standardizer(&applied).unwrap();
        for d in 0..FEATURE_DIM {
            assert!(refit.mean[d].abs() < 1e-9, "dim {d} mean {}", refit.mean[d]);
            let raw_constant = std.stddev[d] <= STDDEV_FLOOR;
            if !raw_constant {
                assert!((refit.stddev[d] - 1.0).abs() < 1e-9, "dim {d}");
            }
        }
    }

    #[test]
    fn standardizer_constant_dim_maps_to_zero() {
        let vectors = vec![
            FeatureVector {
                values: vec![2.0, 1.0],
            },
            FeatureVector {
                values: vec![2.0, 3.0],
            },
        ];
        let std = fit_standardizer(&vectors).unwrap();
        let out = std.apply(&vectors[0]).unwrap();
        assert_eq!(out.values[0], 0.0);
        // off-distribution values of a constant dimension also map to 0
        let unseen = std
            .apply(&FeatureVector {
                values: vec![7.0, 1.0],
            })
            .unwrap();
        assert_eq!(unseen.values[0], 0.0);
        assert_eq!(unseen.values[1], out.values[1]);
    }

    #[test]
    fn standardizer_empty_train_set() {
        assert!(matches!(
            fit_standardizer(&[]),
            Err(FeatureError::EmptyTrainSet)
        ));
    }

    #[test]
    fn layout_matches_width() {
        assert_eq!(FEATURE_NAMES.len(), FEATURE_DIM);
    }

    #[test]
    fn layout_names_point_at_the_right_dims() {
        let lex = Lexicons::bundled();
        let index_of = |name: &str| FEATURE_NAMES.iter().position(|&n| n == name).unwrap();

        let mut rec = record("why??? maybe i retreat");
        rec.season = Season::Winter;
        rec.game_score_delta = 7;
        let v = extract(&rec, &lex);

        assert!((v.values[index_of("question_marks")] - 0.6).abs() < 1e-12);
        assert!(v.values[index_of("hedge_ratio")] > 0.0);
        assert_eq!(v.values[index_of("hedge_presence")], 1.0);
        assert!(v.values[index_of("pronoun_first_singular")] > 0.0);
        assert_eq!(v.values[index_of("season_winter")], 1.0);
        assert_eq!(v.values[index_of("season_spring")], 0.0);
        assert_eq!(v.values[index_of("game_score_delta_sign")], 1.0);
    }
}
