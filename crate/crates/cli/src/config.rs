//! The experiment configuration: one flat TOML file whose sections map
//! onto the library's config types. Unknown keys are rejected; every value
//! has a default; command-line flags override file keys.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pulie_core::model::ModelDims;
use pulie_core::pipeline::ThresholdRule;
use pulie_core::pu::PuConfig;
use pulie_core::synth::SynthConfig;
use pulie_core::tfidf::LogRegConfig;
use pulie_core::trainer::{Objective, TrainConfig};

use crate::errors::{usage, CliError};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub paths: PathsSection,
    pub corpus: CorpusSection,
    pub embed: EmbedSection,
    pub model: ModelDims,
    pub train: TrainConfig,
    pub pu: PuConfig,
    pub eval: EvalSection,
    pub synth: SynthConfig,
    pub logreg: LogRegSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    /// Single-file corpus, split internally by game.
    pub corpus: Option<PathBuf>,
    /// Predefined split files, honored verbatim when all three are set.
    pub train: Option<PathBuf>,
    pub validation: Option<PathBuf>,
    pub test: Option<PathBuf>,
    /// Binary embedding store; defaults to `<output_dir>/embeddings.bin`.
    pub embeddings: Option<PathBuf>,
    /// Directory of replacement lexicon files; bundled lists when absent.
    pub lexicons: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl Default for PathsSection {
    fn default() -> Self {
        PathsSection {
            corpus: None,
            train: None,
            validation: None,
            test: None,
            embeddings: None,
            lexicons: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CorpusSource {
    #[default]
    File,
    Synthetic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub source: CorpusSource,
    /// Swap the lie/truth reading of sender labels at ingestion.
    pub invert_labels: bool,
    /// Seed of the internal game-level split.
    pub split_seed: u64,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection {
            source: CorpusSource::File,
            invert_labels: false,
            split_seed: 7,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedSection {
    /// Store dimension in hash mode.
    pub dim: usize,
    pub hash_seed: u64,
    /// Text matrix file consumed by `embed --mode import`.
    pub import: Option<PathBuf>,
}

impl Default for EmbedSection {
    fn default() -> Self {
        EmbedSection {
            dim: 768,
            hash_seed: 0,
            import: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub seeds: Vec<u64>,
    /// When set, tune by maximizing recall at this precision floor instead
    /// of maximizing lie F1.
    pub precision_floor: Option<f64>,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            seeds: vec![1, 2, 3, 4, 5],
            precision_floor: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogRegSection {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub max_terms: usize,
}

impl Default for LogRegSection {
    fn default() -> Self {
        let base = LogRegConfig::default();
        LogRegSection {
            learning_rate: base.learning_rate,
            epochs: base.epochs,
            l2: base.l2,
            max_terms: pulie_core::tfidf::DEFAULT_MAX_TERMS,
        }
    }
}

impl LogRegSection {
    pub fn to_core(&self) -> LogRegConfig {
        LogRegConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            l2: self.l2,
        }
    }
}

/// Command-line overrides; flags win over file keys, file keys over
/// defaults.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub corpus: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub lexicons: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub objective: Option<Objective>,
    pub prior: Option<f64>,
    pub invert_labels: bool,
}

impl ExperimentConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
        let raw = std::fs::read_to_string(path).map_err(|e| {
            usage(format!(
                "cannot read configuration file `{}`: {e}",
                path.display()
            ))
        })?;
        let mut config: ExperimentConfig = toml::from_str(&raw)
            .map_err(|e| usage(format!("invalid configuration `{}`: {e}", path.display())))?;
        config.apply(overrides);
        config.validate()?;
        Ok(config)
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(corpus) = &overrides.corpus {
            self.paths.corpus = Some(corpus.clone());
        }
        if let Some(embeddings) = &overrides.embeddings {
            self.paths.embeddings = Some(embeddings.clone());
        }
        if let Some(lexicons) = &overrides.lexicons {
            self.paths.lexicons = Some(lexicons.clone());
        }
        if let Some(output_dir) = &overrides.output_dir {
            self.paths.output_dir = output_dir.clone();
        }
        if let Some(seed) = overrides.seed {
            self.train.seed = seed;
        }
        if let Some(epochs) = overrides.epochs {
            self.train.epochs = epochs;
        }
        if let Some(objective) = overrides.objective {
            self.train.objective = objective;
        }
        if let Some(prior) = overrides.prior {
            self.pu.prior = prior;
        }
        if overrides.invert_labels {
            self.corpus.invert_labels = true;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.pu.validate().map_err(usage)?;
        if let Err(e) = self.train.validate() {
            return Err(usage(e.to_string()));
        }
        if let Some(floor) = self.eval.precision_floor {
            if !(0.0..=1.0).contains(&floor) {
                return Err(usage(format!(
                    "eval.precision_floor must lie in [0, 1], got {floor}"
                )));
            }
        }
        if self.eval.seeds.is_empty() {
            return Err(usage("eval.seeds must name at least one seed"));
        }
        if self.corpus.source == CorpusSource::Synthetic {
            if self.model.embed_dim != 0 {
                return Err(usage(
                    "synthetic runs train on the feature branch alone; set model.embed_dim = 0",
                ));
            }
            if self.model.feature_dim != self.synth.feature_dim {
                return Err(usage(format!(
                    "model.feature_dim ({}) must match synth.feature_dim ({})",
                    self.model.feature_dim, self.synth.feature_dim
                )));
            }
        } else if self.model.feature_dim != pulie_core::FEATURE_DIM {
            return Err(usage(format!(
                "the feature extractor is {}-dimensional; model.feature_dim = {} is not supported on dialog corpora",
                pulie_core::FEATURE_DIM,
                self.model.feature_dim
            )));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON serialization of the resolved
    /// configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex_digest(canonical.as_bytes())
    }

    pub fn output_dir(&self) -> &Path {
        &self.paths.output_dir
    }

    pub fn embeddings_path(&self) -> PathBuf {
        self.paths
            .embeddings
            .clone()
            .unwrap_or_else(|| self.paths.output_dir.join("embeddings.bin"))
    }

    pub fn split_paths(&self) -> [PathBuf; 3] {
        [
            self.paths.output_dir.join("train.jsonl"),
            self.paths.output_dir.join("validation.jsonl"),
            self.paths.output_dir.join("test.jsonl"),
        ]
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.paths.output_dir.join("model.bin")
    }

    pub fn meta_path(&self) -> PathBuf {
        self.paths.output_dir.join("model.meta.json")
    }

    pub fn history_path(&self) -> PathBuf {
        self.paths.output_dir.join("history.jsonl")
    }

    pub fn threshold_rule(&self) -> ThresholdRule {
        match self.eval.precision_floor {
            Some(floor) => ThresholdRule::PrecisionFloor(floor),
            None => ThresholdRule::MaxF1,
        }
    }

    pub fn rule_name(rule: &ThresholdRule) -> String {
        match rule {
            ThresholdRule::MaxF1 => "max-f1".to_string(),
            ThresholdRule::PrecisionFloor(f) => format!("precision-floor({f})"),
            ThresholdRule::Fixed(t) => format!("fixed({t})"),
        }
    }

    pub fn lexicons(&self) -> Result<pulie_core::Lexicons, CliError> {
        match &self.paths.lexicons {
            Some(dir) => {
                if !dir.exists() {
                    return Err(usage(format!(
                        "paths.lexicons directory `{}` does not exist",
                        dir.display()
                    )));
                }
                Ok(pulie_core::Lexicons::from_dir(dir)?)
            }
            None => Ok(pulie_core::Lexicons::bundled()),
        }
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_config() {
        let config: ExperimentConfig = toml::from_str("").unwrap();
        assert_eq!(config.model.feature_dim, 34);
        assert_eq!(config.model.hidden_dim, 16);
        assert_eq!(config.model.embed_dim, 768);
        assert_eq!(config.train.batch_size, 32);
        assert_eq!(config.train.epochs, 25);
        assert_eq!(config.pu.prior, 0.05);
        assert_eq!(config.eval.seeds, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<ExperimentConfig>("[train]\nlr = 0.1\n").is_err());
        assert!(toml::from_str::<ExperimentConfig>("[nonsense]\nx = 1\n").is_err());
    }

    #[test]
    fn section_keys_parse() {
        let config: ExperimentConfig = toml::from_str(
            r#"
            [pu]
            prior = 0.1
            beta = 0.05
            gamma = 0.5
            loss = "logistic"
            estimator = "unbiased"

            [train]
            objective = "weighted-bce"
            seed = 42
            "#,
        )
        .unwrap();
        assert_eq!(config.pu.prior, 0.1);
        assert_eq!(config.pu.loss, pulie_core::SurrogateLoss::Logistic);
        assert_eq!(config.train.objective, Objective::WeightedBce);
        assert_eq!(config.train.seed, 42);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a: ExperimentConfig = toml::from_str("").unwrap();
        let b: ExperimentConfig = toml::from_str("").unwrap();
        assert_eq!(a.hash(), b.hash());
        let c: ExperimentConfig = toml::from_str("[train]\nseed = 9\n").unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn overrides_win() {
        let mut config: ExperimentConfig = toml::from_str("[train]\nseed = 1\n").unwrap();
        config.apply(&Overrides {
            seed: Some(99),
            prior: Some(0.2),
            ..Overrides::default()
        });
        assert_eq!(config.train.seed, 99);
        assert_eq!(config.pu.prior, 0.2);
    }

    #[test]
    fn synthetic_validation_rules() {
        let config: ExperimentConfig = toml::from_str(
            r#"
            [corpus]
            source = "synthetic"
            "#,
        )
        .unwrap();
        // default embed_dim 768 conflicts with the synthetic source
        assert!(config.validate().is_err());

        let config: ExperimentConfig = toml::from_str(
            r#"
            [corpus]
            source = "synthetic"
            [model]
            embed_dim = 0
            "#,
        )
        .unwrap();
        config.validate().unwrap();
    }
}
