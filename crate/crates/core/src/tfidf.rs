//! The classical comparator: capped-vocabulary TF-IDF features with a
//! logistic-regression head (1,011 weights + 1 bias at the full cap).
//!
//! The baseline shares the tokenizer, the optimizer, and the evaluation
//! code paths with the main model; only featurization and objective differ.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::features::tokenize;
use crate::model::{adamw_update_slice, AdamHyper};
use crate::pu::{bce_loss, stable_sigmoid};

/// Vocabulary cap giving 1,012 trainable parameters with the bias.
pub const DEFAULT_MAX_TERMS: usize = 1011;

#[derive(Debug, Error)]
pub enum TfidfError {
    #[error("cannot fit a vocabulary on an empty corpus")]
    EmptyCorpus,
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("vectors ({vectors}) and labels ({labels}) differ in length")]
    LengthMismatch { vectors: usize, labels: usize },
    #[error("malformed vocabulary line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Sparse document vector: (term index, value) pairs sorted by index.
pub type SparseVector = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index_of: HashMap<String, usize>,
    document_frequency: Vec<u32>,
    n_docs: usize,
    max_terms: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn index(&self, term: &str) -> Option<usize> {
        self.index_of.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    /// Smoothed inverse document frequency: ln((1 + N) / (1 + df)) + 1.
    pub fn idf(&self, index: usize) -> f64 {
        ((1.0 + self.n_docs as f64) / (1.0 + self.document_frequency[index] as f64)).ln() + 1.0
    }
}

/// Rank tokens by document frequency (ties lexicographic) and keep the top
/// `max_terms`.
pub fn fit_vocab<S: AsRef<str>>(texts: &[S], max_terms: usize) -> Result<Vocabulary, TfidfError> {
    if texts.is_empty() {
        return Err(TfidfError::EmptyCorpus);
    }
    let mut df: HashMap<String, u32> = HashMap::new();
    for text in texts {
        let mut seen: Vec<String> = tokenize(text.as_ref());
        seen.sort();
        seen.dedup();
        for token in seen {
            *df.entry(token).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(String, u32)> = df.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(max_terms);

    let mut terms = Vec::with_capacity(ranked.len());
    let mut index_of = HashMap::with_capacity(ranked.len());
    let mut document_frequency = Vec::with_capacity(ranked.len());
    for (i, (term, count)) in ranked.into_iter().enumerate() {
        index_of.insert(term.clone(), i);
        terms.push(term);
        document_frequency.push(count);
    }
    Ok(Vocabulary {
        terms,
        index_of,
        document_frequency,
        n_docs: texts.len(),
        max_terms,
    })
}

/// Raw-count TF weighted by smoothed IDF, L2-normalized when nonzero.
pub fn tfidf(text: &str, vocab: &Vocabulary) -> SparseVector {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for token in tokenize(text) {
        if let Some(idx) = vocab.index(&token) {
            *counts.entry(idx).or_insert(0.0) += 1.0;
        }
    }
    let mut vector: SparseVector = counts
        .into_iter()
        .map(|(idx, tf)| (idx, tf * vocab.idf(idx)))
        .collect();
    vector.sort_by_key(|(idx, _)| *idx);
    let norm: f64 = vector.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, v) in &mut vector {
            *v /= norm;
        }
    }
    vector
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegParams {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogRegParams {
    pub fn zeros(dim: usize) -> LogRegParams {
        LogRegParams {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    pub fn count(&self) -> usize {
        self.weights.len() + 1
    }
}

pub fn logreg_score(params: &LogRegParams, vector: &SparseVector) -> f64 {
    let mut z = params.bias;
    for &(idx, v) in vector {
        z += params.weights[idx] * v;
    }
    z
}

pub fn logreg_predict(params: &LogRegParams, vector: &SparseVector) -> f64 {
    stable_sigmoid(logreg_score(params, vector))
}

/// Class-weighted BCE with an L2 penalty on the weights (bias exempt).
/// Returns the loss value and its exact gradient.
pub fn logreg_loss_grad(
    params: &LogRegParams,
    vectors: &[SparseVector],
    labels: &[bool],
    pos_weight: f64,
    l2: f64,
) -> Result<(f64, LogRegParams), TfidfError> {
    if vectors.len() != labels.len() {
        return Err(TfidfError::LengthMismatch {
            vectors: vectors.len(),
            labels: labels.len(),
        });
    }
    let scores: Vec<f64> = vectors.iter().map(|v| logreg_score(params, v)).collect();
    let (bce, dscores) =
        bce_loss(&scores, labels, pos_weight).map_err(|_| TfidfError::EmptyCorpus)?;

    let mut grad = LogRegParams::zeros(params.weights.len());
    for (vector, &ds) in vectors.iter().zip(&dscores) {
        grad.bias += ds;
        for &(idx, v) in vector {
            grad.weights[idx] += ds * v;
        }
    }
    let mut penalty = 0.0;
    for (g, w) in grad.weights.iter_mut().zip(&params.weights) {
        penalty += l2 * w * w;
        *g += 2.0 * l2 * w;
    }
    Ok((bce + penalty, grad))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            learning_rate: 0.05,
            epochs: 200,
            l2: 1e-4,
        }
    }
}

/// Full-batch AdamW on the weighted-BCE + L2 objective, with the class
/// weight set to the inverse positive frequency. Zero init makes the fit
/// deterministic.
pub fn train_logreg(
    vectors: &[SparseVector],
    labels: &[bool],
    vocab_size: usize,
    cfg: &LogRegConfig,
) -> Result<LogRegParams, TfidfError> {
    let n_pos = labels.iter().filter(|&&y| y).count();
    if n_pos == 0 || n_pos == labels.len() {
        return Err(TfidfError::SingleClass);
    }
    let pos_weight = ((labels.len() - n_pos) as f64 / n_pos as f64).max(1.0);

    let mut params = LogRegParams::zeros(vocab_size);
    let mut m = LogRegParams::zeros(vocab_size);
    let mut v = LogRegParams::zeros(vocab_size);
    let hp = AdamHyper {
        learning_rate: cfg.learning_rate,
        weight_decay: 0.0, // the L2 penalty lives in the loss itself
        beta1: 0.9,
        beta2: 0.999,
        eps: 1e-8,
    };
    for step in 1..=cfg.epochs {
        let (_, grad) = logreg_loss_grad(&params, vectors, labels, pos_weight, cfg.l2)?;
        let bias1 = 1.0 - hp.beta1.powi(step as i32);
        let bias2 = 1.0 - hp.beta2.powi(step as i32);
        adamw_update_slice(
            &mut params.weights,
            &grad.weights,
            &mut m.weights,
            &mut v.weights,
            bias1,
            bias2,
            &hp,
        );
        let mut b = [params.bias];
        let mut mb = [m.bias];
        let mut vb = [v.bias];
        adamw_update_slice(&mut b, &[grad.bias], &mut mb, &mut vb, bias1, bias2, &hp);
        params.bias = b[0];
        m.bias = mb[0];
        v.bias = vb[0];
    }
    Ok(params)
}

/// Persist as `token<TAB>index<TAB>document-frequency` lines.
pub fn write_vocab<W: Write>(vocab: &Vocabulary, mut writer: W) -> Result<(), TfidfError> {
    writeln!(writer, "#docs\t{}\t{}", vocab.n_docs, vocab.max_terms)?;
    for (i, term) in vocab.terms.iter().enumerate() {
        writeln!(writer, "{term}\t{i}\t{}", vocab.document_frequency[i])?;
    }
    Ok(())
}

pub fn read_vocab<R: BufRead>(reader: R) -> Result<Vocabulary, TfidfError> {
    let mut terms = Vec::new();
    let mut index_of = HashMap::new();
    let mut document_frequency = Vec::new();
    let mut n_docs = 0usize;
    let mut max_terms = DEFAULT_MAX_TERMS;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(TfidfError::MalformedLine {
                line: line_no,
                reason: "expected three tab-separated fields".to_string(),
            });
        }
        let bad = |reason: String| TfidfError::MalformedLine {
            line: line_no,
            reason,
        };
        if parts[0] == "#docs" {
            n_docs = parts[1]
                .parse()
                .map_err(|_| bad("bad document count".into()))?;
            max_terms = parts[2].parse().map_err(|_| bad("bad max_terms".into()))?;
            continue;
        }
        let index: usize = parts[1].parse().map_err(|_| bad("bad index".into()))?;
        if index != terms.len() {
            return Err(bad(format!(
                "expected index {}, found {index}",
                terms.len()
            )));
        }
        let df: u32 = parts[2]
            .parse()
            .map_err(|_| bad("bad document frequency".into()))?;
        index_of.insert(parts[0].to_string(), index);
        terms.push(parts[0].to_string());
        document_frequency.push(df);
    }
    Ok(Vocabulary {
        terms,
        index_of,
        document_frequency,
        n_docs,
        max_terms,
    })
}
