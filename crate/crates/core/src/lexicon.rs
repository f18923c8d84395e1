//! Word-list lexicons backing the interpretable feature extractor.
//!
//! Seven category lists (one lowercase token per line) plus a sentiment
//! valence table (token, tab, decimal valence in [-4, +4]). The bundled
//! lists are compiled in; replacement lists can be loaded from a directory
//! holding files with the same names.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{file}:{line}: {reason}")]
    MalformedEntry {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("`{word}` appears in both the hedge and assertive lexicons")]
    HedgeAssertiveOverlap { word: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const HEDGES: &str = include_str!("../data/hedges.txt");
const ASSERTIVES: &str = include_str!("../data/assertives.txt");
const NEGATIONS: &str = include_str!("../data/negations.txt");
const POLITENESS: &str = include_str!("../data/politeness.txt");
const COMMITMENT: &str = include_str!("../data/commitment.txt");
const PLANNING: &str = include_str!("../data/planning.txt");
const SUBORDINATORS: &str = include_str!("../data/subordinators.txt");
const VALENCES: &str = include_str!("../data/valence.tsv");

/// File names expected by [`Lexicons::from_dir`].
pub const LEXICON_FILES: [&str; 8] = [
    "hedges.txt",
    "assertives.txt",
    "negations.txt",
    "politeness.txt",
    "commitment.txt",
    "planning.txt",
    "subordinators.txt",
    "valence.tsv",
];

#[derive(Debug, Clone)]
pub struct Lexicons {
    pub hedges: HashSet<String>,
    pub assertives: HashSet<String>,
    pub negations: HashSet<String>,
    pub politeness: HashSet<String>,
    pub commitment: HashSet<String>,
    pub planning: HashSet<String>,
    pub subordinators: HashSet<String>,
    pub sentiment_valences: HashMap<String, f64>,
}

impl Lexicons {
    /// The word lists shipped with the crate.
    pub fn bundled() -> Lexicons {
        Self::from_sources(
            HEDGES,
            ASSERTIVES,
            NEGATIONS,
            POLITENESS,
            COMMITMENT,
            PLANNING,
            SUBORDINATORS,
            VALENCES,
            "<bundled>",
        )
        .expect("bundled lexicons are valid")
    }

    /// Load replacement lists from a directory containing [`LEXICON_FILES`].
    pub fn from_dir<P: AsRef<Path>>(dir: P) -> Result<Lexicons, LexiconError> {
        let dir = dir.as_ref();
        let read = |name: &str| -> Result<String, LexiconError> {
            Ok(std::fs::read_to_string(dir.join(name))?)
        };
        let sources: Vec<String> = LEXICON_FILES
            .iter()
            .map(|name| read(name))
            .collect::<Result<_, _>>()?;
        Self::from_sources(
            &sources[0],
            &sources[1],
            &sources[2],
            &sources[3],
            &sources[4],
            &sources[5],
            &sources[6],
            &sources[7],
            &dir.display().to_string(),
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn from_sources(
        hedges: &str,
        assertives: &str,
        negations: &str,
        politeness: &str,
        commitment: &str,
        planning: &str,
        subordinators: &str,
        valences: &str,
        origin: &str,
    ) -> Result<Lexicons, LexiconError> {
        let lex = Lexicons {
            hedges: parse_word_list(hedges, &format!("{origin}/hedges.txt"))?,
            assertives: parse_word_list(assertives, &format!("{origin}/assertives.txt"))?,
            negations: parse_word_list(negations, &format!("{origin}/negations.txt"))?,
            politeness: parse_word_list(politeness, &format!("{origin}/politeness.txt"))?,
            commitment: parse_word_list(commitment, &format!("{origin}/commitment.txt"))?,
            planning: parse_word_list(planning, &format!("{origin}/planning.txt"))?,
            subordinators: parse_word_list(subordinators, &format!("{origin}/subordinators.txt"))?,
            sentiment_valences: parse_valences(valences, &format!("{origin}/valence.tsv"))?,
        };
        if let Some(word) = lex.hedges.intersection(&lex.assertives).next() {
            return Err(LexiconError::HedgeAssertiveOverlap { word: word.clone() });
        }
        Ok(lex)
    }

    /// Deterministic byte serialization for content hashing: every list in
    /// sorted order, prefixed with its name.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let mut push_set = |name: &str, set: &HashSet<String>| {
            out.extend_from_slice(name.as_bytes());
            out.push(b'\n');
            let mut words: Vec<&String> = set.iter().collect();
            words.sort();
            for w in words {
                out.extend_from_slice(w.as_bytes());
                out.push(b'\n');
            }
        };
        push_set("hedges", &self.hedges);
        push_set("assertives", &self.assertives);
        push_set("negations", &self.negations);
        push_set("politeness", &self.politeness);
        push_set("commitment", &self.commitment);
        push_set("planning", &self.planning);
        push_set("subordinators", &self.subordinators);
        out.extend_from_slice(b"valences\n");
        let mut entries: Vec<(&String, &f64)> = self.sentiment_valences.iter().collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        for (word, valence) in entries {
            out.extend_from_slice(format!("{word}\t{valence}\n").as_bytes());
        }
        out
    }
}

fn parse_word_list(source: &str, file: &str) -> Result<HashSet<String>, LexiconError> {
    let mut set = HashSet::new();
    for (idx, line) in source.lines().enumerate() {
        let word = line.trim();
        if word.is_empty() {
            continue;
        }
        if word.split_whitespace().count() != 1 {
            return Err(LexiconError::MalformedEntry {
                file: file.to_string(),
                line: idx + 1,
                reason: format!("`{word}` is not a single token"),
            });
        }
        set.insert(word.to_lowercase());
    }
    Ok(set)
}

fn parse_valences(source: &str, file: &str) -> Result<HashMap<String, f64>, LexiconError> {
    let mut map = HashMap::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let malformed = |reason: String| LexiconError::MalformedEntry {
            file: file.to_string(),
            line: idx + 1,
            reason,
        };
        let (word, value) = line
            .split_once('\t')
            .ok_or_else(|| malformed("expected `token<TAB>valence`".to_string()))?;
        let word = word.trim();
        if word.is_empty() || word.split_whitespace().count() != 1 {
            return Err(malformed(format!("`{word}` is not a single token")));
        }
        let valence: f64 = value
            .trim()
            .parse()
            .map_err(|_| malformed(format!("`{value}` is not a number")))?;
        if !(-4.0..=4.0).contains(&valence) {
            return Err(malformed(format!("valence {valence} outside [-4, 4]")));
        }
        map.insert(word.to_lowercase(), valence);
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lists_load() {
        let lex = Lexicons::bundled();
        assert!(lex.hedges.contains("maybe"));
        assert!(lex.assertives.contains("definitely"));
        assert!(lex.negations.contains("don't"));
        assert!(lex.sentiment_valences["trust"] > 0.0);
        assert!(lex.sentiment_valences["betray"] < 0.0);
    }

    #[test]
    fn hedges_and_assertives_disjoint() {
        let lex = Lexicons::bundled();
        assert!(lex.hedges.is_disjoint(&lex.assertives));
    }

    #[test]
    fn entries_are_lowercase_single_tokens() {
        let lex = Lexicons::bundled();
        for set in [
            &lex.hedges,
            &lex.assertives,
            &lex.negations,
            &lex.politeness,
            &lex.commitment,
            &lex.planning,
            &lex.subordinators,
        ] {
            for word in set {
                assert_eq!(word, &word.to_lowercase());
                assert_eq!(word.split_whitespace().count(), 1);
            }
        }
    }

    #[test]
    fn overlap_rejected() {
        let err =
            Lexicons::from_sources("maybe\nwill\n", "will\n", "", "", "", "", "", "", "<test>")
                .unwrap_err();
        assert!(matches!(err, LexiconError::HedgeAssertiveOverlap { .. }));
    }

    #[test]
    fn valence_out_of_range_rejected() {
        let err = parse_valences("happy\t7.5\n", "<test>").unwrap_err();
        assert!(matches!(err, LexiconError::MalformedEntry { .. }));
    }

    #[test]
    fn canonical_bytes_stable() {
        let a = Lexicons::bundled().canonical_bytes();
        let b = Lexicons::bundled().canonical_bytes();
        assert_eq!(a, b);
    }

    #[test]
    fn from_dir_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for name in LEXICON_FILES {
            let content = match name {
                "valence.tsv" => "good\t1.9\nbad\t-2.5\n".to_string(),
                _ => "alpha\nbeta\n".to_string(),
            };
            std::fs::write(dir.path().join(name), content).unwrap();
        }
        // alpha/beta in both hedges and assertives would overlap; rewrite.
        std::fs::write(dir.path().join("assertives.txt"), "gamma\n").unwrap();
        let lex = Lexicons::from_dir(dir.path()).unwrap();
        assert!(lex.hedges.contains("alpha"));
        assert!(lex.assertives.contains("gamma"));
        assert_eq!(lex.sentiment_valences.len(), 2);
    }
}
