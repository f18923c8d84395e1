//! Confusion-matrix metrics, macro F1, precision-recall curves, threshold
//! tuning, and multi-seed aggregation.
//!
//! The positive class is the deceptive (lie) class throughout. Scores are
//! thresholded inclusively (predict lie iff score >= threshold) and 0/0
//! ratios are defined as 0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("scores ({scores}) and golds ({golds}) differ in length")]
    LengthMismatch { scores: usize, golds: usize },
    #[error("gold labels contain no positives")]
    NoPositives,
}

#[derive(Debug, Error)]
pub enum MultiSeedError<E> {
    #[error("seed list is empty")]
    EmptySeeds,
    #[error(transparent)]
    Run(E),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Count predictions at an inclusive threshold; `golds` holds `true` for
/// deceptive messages and must not include unannotated ones.
pub fn confusion(
    scores: &[f64],
    golds: &[bool],
    threshold: f64,
) -> Result<ConfusionMatrix, EvalError> {
    if scores.len() != golds.len() {
        return Err(EvalError::LengthMismatch {
            scores: scores.len(),
            golds: golds.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&score, &lie) in scores.iter().zip(golds) {
        let predicted_lie = score >= threshold;
        match (predicted_lie, lie) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub macro_f1: f64,
    pub lie_precision: f64,
    pub lie_recall: f64,
    pub lie_f1: f64,
    pub truth_precision: f64,
    pub truth_recall: f64,
    pub truth_f1: f64,
    pub threshold: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Per-class precision/recall/F1 and their unweighted mean, with 0/0
/// defined as 0.
pub fn macro_f1(cm: &ConfusionMatrix, threshold: f64) -> MetricsReport {
    let lie_precision = ratio(cm.tp, cm.tp + cm.fp);
    let lie_recall = ratio(cm.tp, cm.tp + cm.fn_);
    let lie_f1 = f1(lie_precision, lie_recall);
    let truth_precision = ratio(cm.tn, cm.tn + cm.fn_);
    let truth_recall = ratio(cm.tn, cm.tn + cm.fp);
    let truth_f1 = f1(truth_precision, truth_recall);
    MetricsReport {
        macro_f1: (lie_f1 + truth_f1) / 2.0,
        lie_precision,
        lie_recall,
        lie_f1,
        truth_precision,
        truth_recall,
        truth_f1,
        threshold,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// One point per distinct score value taken as an inclusive threshold,
/// sorted by descending threshold.
pub fn pr_curve(scores: &[f64], golds: &[bool]) -> Result<Vec<PrPoint>, EvalError> {
    if scores.len() != golds.len() {
        return Err(EvalError::LengthMismatch {
            scores: scores.len(),
            golds: golds.len(),
        });
    }
    let total_lies = golds.iter().filter(|&&g| g).count() as u64;
    if total_lies == 0 {
        return Err(EvalError::NoPositives);
    }

    let mut pairs: Vec<(f64, bool)> = scores.iter().copied().zip(golds.iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

    let mut points = Vec::new();
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut i = 0;
    while i < pairs.len() {
        let threshold = pairs[i].0;
        // absorb the whole run of equal scores before emitting the point
        while i < pairs.len() && pairs[i].0 == threshold {
            if pairs[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(PrPoint {
            threshold,
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, total_lies),
        });
    }
    Ok(points)
}

/// Pick the PR-curve threshold maximizing lie F1, breaking ties toward the
/// lowest threshold (the recall-maximizing side). Returns the threshold
/// and the full report at that threshold.
pub fn tune_threshold(scores: &[f64], golds: &[bool]) -> Result<(f64, MetricsReport), EvalError> {
    let points = pr_curve(scores, golds)?;
    let mut best: Option<(f64, f64)> = None; // (f1, threshold)
    for p in &points {
        let candidate = f1(p.precision, p.recall);
        let better = match best {
            None => true,
            Some((best_f1, _)) => candidate >= best_f1,
        };
        if better {
            best = Some((candidate, p.threshold));
        }
    }
    let (_, threshold) = best.expect("pr_curve returns at least one point");
    let cm = confusion(scores, golds, threshold)?;
    Ok((threshold, macro_f1(&cm, threshold)))
}

/// Alternative tuning rule: maximize recall subject to a precision floor,
/// falling back to F1 maximization when no curve point meets the floor.
pub fn tune_threshold_with_floor(
    scores: &[f64],
    golds: &[bool],
    precision_floor: f64,
) -> Result<(f64, MetricsReport), EvalError> {
    let points = pr_curve(scores, golds)?;
    let mut best: Option<(f64, f64)> = None; // (recall, threshold)
    for p in &points {
        if p.precision < precision_floor {
            continue;
        }
        let better = match best {
            None => true,
            Some((best_recall, _)) => p.recall >= best_recall,
        };
        if better {
            best = Some((p.recall, p.threshold));
        }
    }
    match best {
        Some((_, threshold)) => {
            let cm = confusion(scores, golds, threshold)?;
            Ok((threshold, macro_f1(&cm, threshold)))
        }
        None => tune_threshold(scores, golds),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedSummary {
    pub per_seed: Vec<MetricsReport>,
    pub mean_macro_f1: f64,
    pub std_macro_f1: f64,
}

/// Run the full seeded experiment once per seed and aggregate the mean and
/// population standard deviation of the test macro F1.
pub fn multi_seed_report<F, E>(mut run: F, seeds: &[u64]) -> Result<SeedSummary, MultiSeedError<E>>
where
    F: FnMut(u64) -> Result<MetricsReport, E>,
{
    if seeds.is_empty() {
        return Err(MultiSeedError::EmptySeeds);
    }
    let mut per_seed = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        per_seed.push(run(seed).map_err(MultiSeedError::Run)?);
    }
    // Constant inputs (identical deterministic runs) get the exact answer.
    if per_seed.iter().all(|r| r.macro_f1 == per_seed[0].macro_f1) {
        return Ok(SeedSummary {
            mean_macro_f1: per_seed[0].macro_f1,
            std_macro_f1: 0.0,
            per_seed,
        });
    }
    let n = per_seed.len() as f64;
    let mean = per_seed.iter().map(|r| r.macro_f1).sum::<f64>() / n;
    let var = per_seed
        .iter()
        .map(|r| (r.macro_f1 - mean).powi(2))
        .sum::<f64>()
        / n;
    Ok(SeedSummary {
        per_seed,
        mean_macro_f1: mean,
        std_macro_f1: var.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_basic() {
        let cm = confusion(&[0.9, 0.2], &[true, false], 0.5).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 1,
                fp: 0,
                fn_: 0,
                tn: 1
            }
        );
    }

    #[test]
    fn confusion_boundary_thresholds() {
        let scores = [0.9, 0.2, 0.4];
        let golds = [true, false, true];
        let all = confusion(&scores, &golds, 0.0).unwrap();
        assert_eq!(all.fn_ + all.tn, 0);
        let none = confusion(&scores, &golds, 0.91).unwrap();
        assert_eq!(none.tp + none.fp, 0);
    }

    #[test]
    fn confusion_length_mismatch() {
        assert!(matches!(
            confusion(&[0.1], &[true, false], 0.5),
            Err(EvalError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn macro_f1_perfect() {
        let cm = ConfusionMatrix {
            tp: 3,
            fp: 0,
            fn_: 0,
            tn: 7,
        };
        assert_eq!(macro_f1(&cm, 0.5).macro_f1, 1.0);
    }

    #[test]
    fn macro_f1_hand_computed() {
        let cm = ConfusionMatrix {
            tp: 2,
            fp: 1,
            fn_: 0,
            tn: 1,
        };
        let report = macro_f1(&cm, 0.5);
        assert!((report.lie_f1 - 0.8).abs() < 1e-12);
        assert!((report.truth_f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((report.macro_f1 - (0.8 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn macro_f1_symmetric_case() {
        let cm = ConfusionMatrix {
            tp: 1,
            fp: 1,
            fn_: 1,
            tn: 1,
        };
        assert!((macro_f1(&cm, 0.5).macro_f1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn macro_f1_empty_is_zero() {
        let cm = ConfusionMatrix::default();
        assert_eq!(macro_f1(&cm, 0.5).macro_f1, 0.0);
    }

    #[test]
    fn pr_curve_single_top_lie() {
        let scores = [0.9, 0.5, 0.3];
        let golds = [true, false, true];
        let points = pr_curve(&scores, &golds).unwrap();
        assert_eq!(points.len(), 3);
        assert_eq!(points[0].precision, 1.0);
        assert_eq!(points[0].recall, 0.5);
        assert_eq!(points.last().unwrap().recall, 1.0);
    }

    #[test]
    fn pr_curve_ties_collapse_to_one_point() {
        let scores = [0.5, 0.5, 0.5];
        let golds = [true, false, true];
        let points = pr_curve(&scores, &golds).unwrap();
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].recall, 1.0);
    }

    #[test]
    fn pr_curve_requires_positives() {
        assert!(matches!(
            pr_curve(&[0.5], &[false]),
            Err(EvalError::NoPositives)
        ));
    }

    #[test]
    fn tune_threshold_four_point_example() {
        let scores = [0.9, 0.8, 0.4, 0.1];
        let golds = [true, false, true, false];
        let (threshold, report) = tune_threshold(&scores, &golds).unwrap();
        assert_eq!(threshold, 0.4);
        assert!((report.lie_f1 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn tune_threshold_separable() {
        let scores = [0.9, 0.8, 0.2, 0.1];
        let golds = [true, true, false, false];
        let (threshold, report) = tune_threshold(&scores, &golds).unwrap();
        assert_eq!(threshold, 0.8);
        assert_eq!(report.lie_f1, 1.0);
        assert_eq!(report.macro_f1, 1.0);
    }

    #[test]
    fn tune_threshold_degenerate_equal_scores() {
        let scores = [0.7, 0.7, 0.7];
        let golds = [true, false, true];
        let (threshold, report) = tune_threshold(&scores, &golds).unwrap();
        assert_eq!(threshold, 0.7);
        assert_eq!(report.lie_recall, 1.0);
    }

    #[test]
    fn precision_floor_rule() {
        let scores = [0.9, 0.8, 0.4, 0.1];
        let golds = [true, false, true, false];
        // Floor 0.9: only the first point (precision 1.0) qualifies.
        let (threshold, _) = tune_threshold_with_floor(&scores, &golds, 0.9).unwrap();
        assert_eq!(threshold, 0.9);
        // Unreachable floor falls back to the F1 rule.
        let (fallback, _) = tune_threshold_with_floor(&scores, &golds, 1.1).unwrap();
        assert_eq!(fallback, 0.4);
    }

    #[test]
    fn multi_seed_zero_std_on_identical_runs() {
        let fixed = MetricsReport {
            macro_f1: 0.8,
            lie_precision: 0.7,
            lie_recall: 0.9,
            lie_f1: 0.79,
            truth_precision: 0.9,
            truth_recall: 0.7,
            truth_f1: 0.79,
            threshold: 0.5,
        };
        let summary =
            multi_seed_report::<_, std::convert::Infallible>(|_| Ok(fixed), &[1, 1, 1]).unwrap();
        assert_eq!(summary.mean_macro_f1, 0.8);
        assert_eq!(summary.std_macro_f1, 0.0);
        assert_eq!(summary.per_seed.len(), 3);
    }

    #[test]
    fn multi_seed_empty_list_errors() {
        let err = multi_seed_report::<_, std::convert::Infallible>(
            |_| {
                Ok(MetricsReport {
                    macro_f1: 0.0,
                    lie_precision: 0.0,
                    lie_recall: 0.0,
                    lie_f1: 0.0,
                    truth_precision: 0.0,
                    truth_recall: 0.0,
                    truth_f1: 0.0,
                    threshold: 0.5,
                })
            },
            &[],
        )
        .unwrap_err();
        assert!(matches!(err, MultiSeedError::EmptySeeds));
    }
}
