//! Synthetic two-Gaussian PU benchmark.
//!
//! The training split follows the case-control PU setup: a small set of
//! labeled positives drawn from the positive class, plus an unlabeled pool
//! drawn from the prior-weighted marginal whose hidden positives carry a
//! `Truth` annotation. A naive supervised objective therefore trains
//! against contaminated negatives, while the PU estimator accounts for
//! them through the class prior. Validation and test splits carry the true
//! class so evaluation stays honest.
//!
//! Each point also gets a class-conditioned bag-of-words text so the
//! TF-IDF baseline can run on the same splits. Embeddings are empty: the
//! benchmark trains on the feature branch alone.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::SenderAnnotation;
use crate::trainer::Example;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub train_size: usize,
    pub val_size: usize,
    pub test_size: usize,
    /// Marginal probability of the positive class.
    pub prior: f64,
    pub feature_dim: usize,
    /// Number of leading dimensions whose class means differ.
    pub informative_dims: usize,
    /// Mean offset of each informative dimension (+ for lies, - for truths).
    pub separation: f64,
    /// Isotropic noise standard deviation.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            train_size: 2000,
            val_size: 500,
            test_size: 500,
            prior: 0.05,
            feature_dim: 34,
            informative_dims: 6,
            separation: 1.5,
            noise: 1.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SyntheticSplit {
    pub examples: Vec<Example>,
    /// Generated message texts, parallel to `examples`.
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct SyntheticDataset {
    pub train: SyntheticSplit,
    pub validation: SyntheticSplit,
    pub test: SyntheticSplit,
}

const SHARED_WORDS: [&str; 14] = [
    "the", "to", "and", "we", "you", "move", "turn", "army", "fleet", "province", "this", "next",
    "season", "board",
];
const LIE_WORDS: [&str; 10] = [
    "promise",
    "trust",
    "honestly",
    "believe",
    "swear",
    "friend",
    "never",
    "definitely",
    "always",
    "loyal",
];
const TRUTH_WORDS: [&str; 10] = [
    "plan", "support", "hold", "north", "south", "attack", "fall", "spring", "supply", "center",
];

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; u1 is kept away from zero so the log stays finite.
    let u1: f64 = loop {
        let u = rng.gen::<f64>();
        if u > f64::MIN_POSITIVE {
            break u;
        }
    };
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn sample_features<R: Rng>(rng: &mut R, cfg: &SynthConfig, positive: bool) -> Vec<f64> {
    let sign = if positive { 1.0 } else { -1.0 };
    (0..cfg.feature_dim)
        .map(|d| {
            let mean = if d < cfg.informative_dims {
                sign * cfg.separation
            } else {
                0.0
            };
            mean + cfg.noise * gaussian(rng)
        })
        .collect()
}

fn sample_text<R: Rng>(rng: &mut R, positive: bool) -> String {
    let class_pool: &[&str] = if positive { &LIE_WORDS } else { &TRUTH_WORDS };
    let len = rng.gen_range(6..=14);
    let mut words = Vec::with_capacity(len);
    for _ in 0..len {
        let word = if rng.gen::<f64>() < 0.5 {
            SHARED_WORDS[rng.gen_range(0..SHARED_WORDS.len())]
        } else {
            class_pool[rng.gen_range(0..class_pool.len())]
        };
        words.push(word);
    }
    words.join(" ")
}

fn marginal_split<R: Rng>(
    rng: &mut R,
    cfg: &SynthConfig,
    size: usize,
    key_prefix: &str,
) -> SyntheticSplit {
    let mut split = SyntheticSplit::default();
    for i in 0..size {
        let positive = rng.gen::<f64>() < cfg.prior;
        split.examples.push(Example {
            key: format!("{key_prefix}:{i}"),
            features: sample_features(rng, cfg, positive),
            embedding: Vec::new(),
            gold: if positive {
                SenderAnnotation::Lie
            } else {
                SenderAnnotation::Truth
            },
        });
        split.texts.push(sample_text(rng, positive));
    }
    split
}

/// Generate the benchmark. Deterministic for a fixed configuration.
pub fn generate(cfg: &SynthConfig) -> SyntheticDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Labeled positives first, then the unlabeled marginal pool whose
    // hidden positives are annotated as truths.
    let n_labeled = ((cfg.train_size as f64 * cfg.prior).round() as usize)
        .max(1)
        .min(cfg.train_size.saturating_sub(1));
    let mut train = SyntheticSplit::default();
    for i in 0..n_labeled {
        train.examples.push(Example {
            key: format!("synth-train:{i}"),
            features: sample_features(&mut rng, cfg, true),
            embedding: Vec::new(),
            gold: SenderAnnotation::Lie,
        });
        train.texts.push(sample_text(&mut rng, true));
    }
    for i in n_labeled..cfg.train_size {
        let positive = rng.gen::<f64>() < cfg.prior;
        train.examples.push(Example {
            key: format!("synth-train:{i}"),
            features: sample_features(&mut rng, cfg, positive),
            embedding: Vec::new(),
            gold: SenderAnnotation::Truth,
        });
        train.texts.push(sample_text(&mut rng, positive));
    }

    let validation = marginal_split(&mut rng, cfg, cfg.val_size, "synth-val");
    let test = marginal_split(&mut rng, cfg, cfg.test_size, "synth-test");

    SyntheticDataset {
        train,
        validation,
        test,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_determinism() {
        let cfg = SynthConfig {
            train_size: 100,
            val_size: 30,
            test_size: 20,
            seed: 5,
            ..SynthConfig::default()
        };
        let a = generate(&cfg);
        let b = generate(&cfg);
        assert_eq!(a.train.examples.len(), 100);
        assert_eq!(a.validation.examples.len(), 30);
        assert_eq!(a.test.examples.len(), 20);
        assert_eq!(a.train.examples, b.train.examples);
        assert_eq!(a.test.texts, b.test.texts);
    }

    #[test]
    fn labeled_positive_count_matches_prior() {
        let cfg = SynthConfig::default();
        let data = generate(&cfg);
        let labeled = data
            .train
            .examples
            .iter()
            .filter(|e| e.gold == SenderAnnotation::Lie)
            .count();
        assert_eq!(labeled, 100); // 5% of 2,000
    }

    #[test]
    fn eval_splits_have_both_classes() {
        let data = generate(&SynthConfig::default());
        for split in [&data.validation, &data.test] {
            let lies = split
                .examples
                .iter()
                .filter(|e| e.gold == SenderAnnotation::Lie)
                .count();
            assert!(lies > 0 && lies < split.examples.len());
        }
    }

    #[test]
    fn informative_dims_separate_classes() {
        let data = generate(&SynthConfig::default());
        let mean_of = |positive: bool| -> f64 {
            let picked: Vec<&Example> = data
                .test
                .examples
                .iter()
                .filter(|e| (e.gold == SenderAnnotation::Lie) == positive)
                .collect();
            picked.iter().map(|e| e.features[0]).sum::<f64>() / picked.len() as f64
        };
        assert!(mean_of(true) > 0.5);
        assert!(mean_of(false) < -0.5);
    }
}
