//! Surrogate losses and the positive-unlabeled risk estimator.
//!
//! With positives P (n_p of them), unlabeled U (n_u), class prior pi, and a
//! surrogate loss l over the margin y*g:
//!
//! ```text
//! R+_p = mean over P of l(+g)       cost of the positives as positives
//! R-_p = mean over P of l(-g)       cost of the positives as negatives
//! R-_u = mean over U of l(-g)       cost of the unlabeled as negatives
//! risk = pi * R+_p + (R-_u - pi * R-_p)
//! ```
//!
//! The correction term `R-_u - pi * R-_p` estimates the negative-class risk
//! and can go negative on small positive counts, which drives overfitting.
//! The non-negative variant clamps it: when the correction drops below
//! `-beta`, the reported risk is `pi * R+_p - beta` and the gradient for
//! that step descends `-gamma * (R-_u - pi * R-_p)` instead, restoring the
//! correction toward the feasible region.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::PuLabel;

#[derive(Debug, Error)]
pub enum PuError {
    #[error("scored batch must contain at least one element")]
    EmptyBatch,
    #[error("scores ({scores}) and labels ({labels}) differ in length")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("batch has no positive elements")]
    MissingPositives,
    #[error("batch has no unlabeled elements")]
    MissingUnlabeled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurrogateLoss {
    /// l(m) = 1 / (1 + e^m): bounded, the usual choice for non-negative PU
    /// risk estimation.
    #[default]
    Sigmoid,
    /// l(m) = ln(1 + e^-m), evaluated in the overflow-safe branch form.
    Logistic,
}

impl SurrogateLoss {
    pub fn value(self, margin: f64) -> f64 {
        match self {
            SurrogateLoss::Sigmoid => stable_sigmoid(-margin),
            SurrogateLoss::Logistic => softplus(-margin),
        }
    }

    /// d l / d margin.
    pub fn derivative(self, margin: f64) -> f64 {
        match self {
            SurrogateLoss::Sigmoid => {
                let l = stable_sigmoid(-margin);
                -l * (1.0 - l)
            }
            SurrogateLoss::Logistic => -stable_sigmoid(-margin),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Estimator {
    /// Clamped correction (default).
    #[default]
    #[serde(rename = "nn")]
    NonNegative,
    /// Plain unbiased estimator; the risk may go negative.
    #[serde(rename = "unbiased")]
    Unbiased,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PuConfig {
    /// Class prior pi of the positive (deceptive) class.
    pub prior: f64,
    /// Clamp threshold; the correction may sink to -beta before the
    /// clamped branch takes over.
    pub beta: f64,
    /// Scale of the correction-descent gradient in the clamped branch.
    pub gamma: f64,
    pub loss: SurrogateLoss,
    pub estimator: Estimator,
}

impl Default for PuConfig {
    fn default() -> Self {
        PuConfig {
            prior: 0.05,
            beta: 0.0,
            gamma: 1.0,
            loss: SurrogateLoss::Sigmoid,
            estimator: Estimator::NonNegative,
        }
    }
}

impl PuConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.prior > 0.0 && self.prior < 1.0) {
            return Err(format!("pu.prior must lie in (0, 1), got {}", self.prior));
        }
        if self.beta < 0.0 {
            return Err(format!("pu.beta must be >= 0, got {}", self.beta));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(format!("pu.gamma must lie in (0, 1], got {}", self.gamma));
        }
        Ok(())
    }
}

/// Raw classifier logits paired with PU labels.
#[derive(Debug, Clone)]
pub struct ScoredBatch {
    scores: Vec<f64>,
    labels: Vec<PuLabel>,
}

impl ScoredBatch {
    pub fn new(scores: Vec<f64>, labels: Vec<PuLabel>) -> Result<ScoredBatch, PuError> {
        if scores.is_empty() {
            return Err(PuError::EmptyBatch);
        }
        if scores.len() != labels.len() {
            return Err(PuError::LengthMismatch {
                scores: scores.len(),
                labels: labels.len(),
            });
        }
        Ok(ScoredBatch { scores, labels })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[PuLabel] {
        &self.labels
    }

    fn counts(&self) -> (usize, usize) {
        let n_p = self
            .labels
            .iter()
            .filter(|l| **l == PuLabel::Positive)
            .count();
        (n_p, self.labels.len() - n_p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskBreakdown {
    pub risk: f64,
    /// R+_p: positive risk of the positives.
    pub pos_risk: f64,
    /// R-_p: negative risk of the positives.
    pub pos_neg_risk: f64,
    /// R-_u: negative risk of the unlabeled pool.
    pub unl_neg_risk: f64,
    pub clamped: bool,
}

fn components(
    batch: &ScoredBatch,
    loss: SurrogateLoss,
) -> Result<(f64, f64, f64, usize, usize), PuError> {
    let (n_p, n_u) = batch.counts();
    if n_p == 0 {
        return Err(PuError::MissingPositives);
    }
    if n_u == 0 {
        return Err(PuError::MissingUnlabeled);
    }
    let mut pos = 0.0;
    let mut pos_neg = 0.0;
    let mut unl_neg = 0.0;
    for (&g, &label) in batch.scores.iter().zip(&batch.labels) {
        match label {
            PuLabel::Positive => {
                pos += loss.value(g);
                pos_neg += loss.value(-g);
            }
            PuLabel::Unlabeled => unl_neg += loss.value(-g),
        }
    }
    Ok((
        pos / n_p as f64,
        pos_neg / n_p as f64,
        unl_neg / n_u as f64,
        n_p,
        n_u,
    ))
}

/// The PU risk estimate for one batch.
pub fn pu_risk(batch: &ScoredBatch, cfg: &PuConfig) -> Result<RiskBreakdown, PuError> {
    let (pos_risk, pos_neg_risk, unl_neg_risk, _, _) = components(batch, cfg.loss)?;
    let correction = unl_neg_risk - cfg.prior * pos_neg_risk;
    let clamp = cfg.estimator == Estimator::NonNegative && correction < -cfg.beta;
    let risk = if clamp {
        cfg.prior * pos_risk - cfg.beta
    } else {
        cfg.prior * pos_risk + correction
    };
    Ok(RiskBreakdown {
        risk,
        pos_risk,
        pos_neg_risk,
        unl_neg_risk,
        clamped: clamp,
    })
}

/// Per-element d risk / d score coefficients for the same batch.
///
/// In the clamped branch the positive-risk term is dropped and the
/// coefficients are those of `-gamma * (R-_u - pi * R-_p)`.
pub fn pu_grad_coefficients(batch: &ScoredBatch, cfg: &PuConfig) -> Result<Vec<f64>, PuError> {
    let (_, pos_neg_risk, unl_neg_risk, n_p, n_u) = components(batch, cfg.loss)?;
    let correction = unl_neg_risk - cfg.prior * pos_neg_risk;
    let clamp = cfg.estimator == Estimator::NonNegative && correction < -cfg.beta;
    let n_p = n_p as f64;
    let n_u = n_u as f64;

    let coeffs = batch
        .scores
        .iter()
        .zip(&batch.labels)
        .map(|(&g, &label)| match (label, clamp) {
            (PuLabel::Positive, false) => {
                cfg.prior / n_p * (cfg.loss.derivative(g) + cfg.loss.derivative(-g))
            }
            (PuLabel::Unlabeled, false) => -cfg.loss.derivative(-g) / n_u,
            (PuLabel::Positive, true) => -cfg.gamma * cfg.prior / n_p * cfg.loss.derivative(-g),
            (PuLabel::Unlabeled, true) => cfg.gamma * cfg.loss.derivative(-g) / n_u,
        })
        .collect();
    Ok(coeffs)
}

/// Weighted binary cross-entropy over raw logits, with `pos_weight`
/// scaling the positive terms. Returns the mean loss and its derivative
/// with respect to every score.
pub fn bce_loss(
    scores: &[f64],
    labels: &[bool],
    pos_weight: f64,
) -> Result<(f64, Vec<f64>), PuError> {
    if scores.is_empty() {
        return Err(PuError::EmptyBatch);
    }
    if scores.len() != labels.len() {
        return Err(PuError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    let n = scores.len() as f64;
    let mut total = 0.0;
    let mut grads = Vec::with_capacity(scores.len());
    for (&g, &y) in scores.iter().zip(labels) {
        if y {
            total += pos_weight * softplus(-g);
            grads.push(pos_weight * (-stable_sigmoid(-g)) / n);
        } else {
            total += softplus(g);
            grads.push(stable_sigmoid(g) / n);
        }
    }
    Ok((total / n, grads))
}

/// 1 / (1 + e^-x) without overflow on large |x|.
pub fn stable_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^x) without overflow on large |x|.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(scores: Vec<f64>, labels: Vec<PuLabel>) -> ScoredBatch {
        ScoredBatch::new(scores, labels).unwrap()
    }

    const P: PuLabel = PuLabel::Positive;
    const U: PuLabel = PuLabel::Unlabeled;

    #[test]
    fn sigmoid_loss_values() {
        assert_eq!(SurrogateLoss::Sigmoid.value(0.0), 0.5);
        assert!(SurrogateLoss::Sigmoid.value(1e4) < 1e-12);
        assert!((SurrogateLoss::Sigmoid.value(-1e4) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn logistic_loss_values() {
        assert!((SurrogateLoss::Logistic.value(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(SurrogateLoss::Logistic.value(1e4) < 1e-12);
        // Asymptotically linear on the negative side.
        assert!((SurrogateLoss::Logistic.value(-100.0) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn risk_all_zero_scores() {
        let b = batch(vec![0.0; 4], vec![P, P, U, U]);
        let r = pu_risk(&b, &PuConfig::default()).unwrap();
        assert_eq!(r.risk, 0.5);
        assert_eq!(r.pos_risk, 0.5);
        assert_eq!(r.pos_neg_risk, 0.5);
        assert_eq!(r.unl_neg_risk, 0.5);
        assert!(!r.clamped);
    }

    #[test]
    fn risk_constant_half_for_any_prior_at_zero_scores() {
        // pi*0.5 + 0.5 - pi*0.5 == 0.5 exactly, for every prior.
        for &prior in &[0.001, 0.05, 0.3, 0.5, 0.77, 0.999] {
            let cfg = PuConfig {
                prior,
                ..PuConfig::default()
            };
            let b = batch(vec![0.0; 5], vec![P, U, U, P, U]);
            assert_eq!(pu_risk(&b, &cfg).unwrap().risk, 0.5, "prior {prior}");
        }
    }

    #[test]
    fn risk_clamps_on_confident_batch() {
        // Positive scored strongly positive, unlabeled strongly negative:
        // the correction sinks below zero and is clamped away.
        let b = batch(vec![50.0, -50.0], vec![P, U]);
        let r = pu_risk(&b, &PuConfig::default()).unwrap();
        assert!((r.pos_risk).abs() < 1e-20);
        assert!((r.pos_neg_risk - 1.0).abs() < 1e-12);
        assert!(r.unl_neg_risk.abs() < 1e-20);
        assert!(r.clamped);
        assert!(r.risk.abs() < 1e-20);
    }

    #[test]
    fn risk_hand_computed_three_elements() {
        let b = batch(vec![0.0, 3f64.ln(), 3f64.ln()], vec![P, U, U]);
        let r = pu_risk(&b, &PuConfig::default()).unwrap();
        assert!((r.pos_risk - 0.5).abs() < 1e-12);
        assert!((r.pos_neg_risk - 0.5).abs() < 1e-12);
        assert!((r.unl_neg_risk - 0.75).abs() < 1e-12);
        assert!((r.risk - 0.75).abs() < 1e-12);
        assert!(!r.clamped);
    }

    #[test]
    fn unbiased_estimator_can_go_negative() {
        let cfg = PuConfig {
            estimator: Estimator::Unbiased,
            ..PuConfig::default()
        };
        let b = batch(vec![50.0, -50.0], vec![P, U]);
        let r = pu_risk(&b, &cfg).unwrap();
        assert!(!r.clamped);
        assert!(r.risk < 0.0);
    }

    #[test]
    fn missing_sides_rejected() {
        let all_pos = batch(vec![0.0, 0.0], vec![P, P]);
        assert!(matches!(
            pu_risk(&all_pos, &PuConfig::default()),
            Err(PuError::MissingUnlabeled)
        ));
        let all_unl = batch(vec![0.0, 0.0], vec![U, U]);
        assert!(matches!(
            pu_risk(&all_unl, &PuConfig::default()),
            Err(PuError::MissingPositives)
        ));
    }

    #[test]
    fn batch_construction_errors() {
        assert!(matches!(
            ScoredBatch::new(vec![], vec![]),
            Err(PuError::EmptyBatch)
        ));
        assert!(matches!(
            ScoredBatch::new(vec![0.0], vec![P, U]),
            Err(PuError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn grad_zero_scores_unlabeled_coefficient() {
        let b = batch(vec![0.0; 4], vec![P, U, U, U]);
        let cfg = PuConfig::default();
        let coeffs = pu_grad_coefficients(&b, &cfg).unwrap();
        // l'(0) = -0.25 for the sigmoid loss, so unlabeled get 0.25 / n_u.
        for &c in &coeffs[1..] {
            assert!((c - 0.25 / 3.0).abs() < 1e-15);
        }
        // positives: pi / n_p * (l'(0) + l'(0)) = -0.5 * pi.
        assert!((coeffs[0] - (-0.5 * cfg.prior)).abs() < 1e-15);
    }

    #[test]
    fn grad_matches_finite_differences_unclamped() {
        let scores = vec![0.3, -0.8, 1.2, 0.1, -0.4];
        let labels = vec![P, U, U, P, U];
        for loss in [SurrogateLoss::Sigmoid, SurrogateLoss::Logistic] {
            let cfg = PuConfig {
                loss,
                ..PuConfig::default()
            };
            let b = batch(scores.clone(), labels.clone());
            let analytic = pu_grad_coefficients(&b, &cfg).unwrap();
            let step = 1e-5;
            for i in 0..scores.len() {
                let mut plus = scores.clone();
                plus[i] += step;
                let mut minus = scores.clone();
                minus[i] -= step;
                let rp = pu_risk(&batch(plus, labels.clone()), &cfg).unwrap().risk;
                let rm = pu_risk(&batch(minus, labels.clone()), &cfg).unwrap().risk;
                let fd = (rp - rm) / (2.0 * step);
                let rel = (analytic[i] - fd).abs() / analytic[i].abs().max(fd.abs()).max(1e-6);
                assert!(
                    rel < 1e-4,
                    "coefficient {i}: analytic {} fd {fd}",
                    analytic[i]
                );
            }
        }
    }

    #[test]
    fn grad_clamped_branch_is_scaled_correction_descent() {
        let cfg = PuConfig {
            gamma: 0.6,
            ..PuConfig::default()
        };
        let b = batch(vec![50.0, -50.0], vec![P, U]);
        assert!(pu_risk(&b, &cfg).unwrap().clamped);
        let coeffs = pu_grad_coefficients(&b, &cfg).unwrap();
        let loss = cfg.loss;
        // d(-gamma * (R-_u - pi * R-_p)) / dg, written out by hand.
        let expected_pos = -cfg.gamma * cfg.prior * loss.derivative(-50.0);
        let expected_unl = cfg.gamma * loss.derivative(50.0);
        assert!((coeffs[0] - expected_pos).abs() < 1e-15);
        assert!((coeffs[1] - expected_unl).abs() < 1e-15);
    }

    #[test]
    fn bce_examples() {
        let (v, _) = bce_loss(&[0.0], &[true], 1.0).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
        let (v3, _) = bce_loss(&[0.0], &[true], 3.0).unwrap();
        assert!((v3 - 3.0 * std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn bce_gradient_matches_finite_differences() {
        let scores = vec![0.5, -1.0, 2.0, 0.0];
        let labels = vec![true, false, true, false];
        let (_, grads) = bce_loss(&scores, &labels, 2.5).unwrap();
        let step = 1e-6;
        for i in 0..scores.len() {
            let mut plus = scores.clone();
            plus[i] += step;
            let mut minus = scores.clone();
            minus[i] -= step;
            let (vp, _) = bce_loss(&plus, &labels, 2.5).unwrap();
            let (vm, _) = bce_loss(&minus, &labels, 2.5).unwrap();
            let fd = (vp - vm) / (2.0 * step);
            let rel = (grads[i] - fd).abs() / grads[i].abs().max(fd.abs()).max(1e-6);
            assert!(rel < 1e-6, "score {i}: analytic {} fd {fd}", grads[i]);
        }
    }
}
