//! Evaluation metrics: ROC-AUC, PRC-AUC (average precision), weighted RMSE
//! and MAE, per-task aggregation and the positive-rate metric
//! recommendation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Clone)]
pub enum MetricError {
    #[error("scores, labels and weights must have equal lengths")]
    LengthMismatch,
    #[error("weights must be non-negative")]
    NegativeWeight,
    #[error("subset contains a single class")]
    SingleClass,
    #[error("subset contains no positives")]
    NoPositives,
    #[error("no weighted rows")]
    EmptyInput,
    #[error("all tasks were skipped")]
    AllTasksSkipped,
}

/// Metric identifiers used across the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricId {
    RocAuc,
    PrcAuc,
    Rmse,
    Mae,
}

impl MetricId {
    pub fn higher_is_better(self) -> bool {
        matches!(self, MetricId::RocAuc | MetricId::PrcAuc)
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricId::RocAuc => "roc_auc",
            MetricId::PrcAuc => "prc_auc",
            MetricId::Rmse => "rmse",
            MetricId::Mae => "mae",
        }
    }
}

impl std::fmt::Display for MetricId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MetricId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "roc_auc" => Ok(MetricId::RocAuc),
            "prc_auc" => Ok(MetricId::PrcAuc),
            "rmse" => Ok(MetricId::Rmse),
            "mae" => Ok(MetricId::Mae),
            other => Err(format!("unknown metric '{other}'")),
        }
    }
}

/// Scores with labels and per-row weights; weight 0 excludes a row.
#[derive(Debug, Clone)]
pub struct ScoredLabels<'a> {
    pub scores: &'a [f64],
    pub labels: &'a [f64],
    pub weights: &'a [f64],
}

impl<'a> ScoredLabels<'a> {
    pub fn new(
        scores: &'a [f64],
        labels: &'a [f64],
        weights: &'a [f64],
    ) -> Result<Self, MetricError> {
        if scores.len() != labels.len() || scores.len() != weights.len() {
            return Err(MetricError::LengthMismatch);
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(MetricError::NegativeWeight);
        }
        Ok(ScoredLabels {
            scores,
            labels,
            weights,
        })
    }

    fn active(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.scores
            .iter()
            .zip(self.labels)
            .zip(self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|((&s, &y), &w)| (s, y, w))
    }
}

/// Weighted Mann–Whitney statistic: P(score_pos > score_neg) + 0.5·P(tie),
/// identical to the trapezoidal area under the ROC curve.
pub fn roc_auc(s: &ScoredLabels) -> Result<f64, MetricError> {
    let mut rows: Vec<(f64, f64, f64)> = s.active().collect();
    let pos_w: f64 = rows.iter().filter(|r| r.1 > 0.5).map(|r| r.2).sum();
    let neg_w: f64 = rows.iter().filter(|r| r.1 <= 0.5).map(|r| r.2).sum();
    if pos_w == 0.0 || neg_w == 0.0 {
        return Err(MetricError::SingleClass);
    }
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

    let mut auc = 0.0;
    let mut neg_below = 0.0;
    let mut i = 0;
    while i < rows.len() {
        let mut j = i;
        let mut tie_pos = 0.0;
        let mut tie_neg = 0.0;
        while j < rows.len() && rows[j].0 == rows[i].0 {
            if rows[j].1 > 0.5 {
                tie_pos += rows[j].2;
            } else {
                tie_neg += rows[j].2;
            }
            j += 1;
        }
        auc += tie_pos * (neg_below + 0.5 * tie_neg);
        neg_below += tie_neg;
        i = j;
    }
    Ok(auc / (pos_w * neg_w))
}

/// Average precision: Σ_k (R_k − R_{k−1})·P_k over descending-score
/// thresholds, with tied scores processed as one block. No linear
/// interpolation between PR points.
pub fn prc_auc(s: &ScoredLabels) -> Result<f64, MetricError> {
    let mut rows: Vec<(f64, f64, f64)> = s.active().collect();
    let pos_w: f64 = rows.iter().filter(|r| r.1 > 0.5).map(|r| r.2).sum();
    if pos_w == 0.0 {
        return Err(MetricError::NoPositives);
    }
    rows.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

    let mut ap = 0.0;
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut prev_recall = 0.0;
    let mut i = 0;
    while i < rows.len() {
        let mut j = i;
        while j < rows.len() && rows[j].0 == rows[i].0 {
            if rows[j].1 > 0.5 {
                tp += rows[j].2;
            } else {
                fp += rows[j].2;
            }
            j += 1;
        }
        let recall = tp / pos_w;
        let precision = tp / (tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    Ok(ap)
}

/// Weighted root-mean-square error; weights normalize internally.
pub fn rmse(s: &ScoredLabels) -> Result<f64, MetricError> {
    let (sum, wsum) = s.active().fold((0.0, 0.0), |(acc, wacc), (p, y, w)| {
        (acc + w * (p - y) * (p - y), wacc + w)
    });
    if wsum == 0.0 {
        return Err(MetricError::EmptyInput);
    }
    Ok((sum / wsum).sqrt())
}

/// Weighted mean absolute error; weights normalize internally.
pub fn mae(s: &ScoredLabels) -> Result<f64, MetricError> {
    let (sum, wsum) = s.active().fold((0.0, 0.0), |(acc, wacc), (p, y, w)| {
        (acc + w * (p - y).abs(), wacc + w)
    });
    if wsum == 0.0 {
        return Err(MetricError::EmptyInput);
    }
    Ok(sum / wsum)
}

pub fn evaluate(metric: MetricId, s: &ScoredLabels) -> Result<f64, MetricError> {
    match metric {
        MetricId::RocAuc => roc_auc(s),
        MetricId::PrcAuc => prc_auc(s),
        MetricId::Rmse => rmse(s),
        MetricId::Mae => mae(s),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Classification,
    Regression,
}

/// Classification tasks take PRC-AUC when the positive rate drops below 2%
/// and ROC-AUC otherwise; regression tasks take the configured preference
/// (MAE for QM-style datasets, RMSE otherwise).
pub fn recommend_metric(kind: TaskKind, positive_rate: f64, regression_choice: MetricId) -> MetricId {
    match kind {
        TaskKind::Classification => {
            if positive_rate < 0.02 {
                MetricId::PrcAuc
            } else {
                MetricId::RocAuc
            }
        }
        TaskKind::Regression => regression_choice,
    }
}

/// Per-task metric values for one subset, with the mean over non-skipped
/// tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: MetricId,
    pub subset: String,
    pub per_task: Vec<Option<f64>>,
    pub mean: f64,
    pub skipped: Vec<usize>,
}

/// Arithmetic mean over non-skipped tasks; `None` entries are recorded in
/// the skip list.
pub fn mean_over_tasks(
    metric: MetricId,
    subset: &str,
    per_task: Vec<Option<f64>>,
) -> Result<MetricReport, MetricError> {
    let skipped: Vec<usize> = per_task
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_none())
        .map(|(i, _)| i)
        .collect();
    let values: Vec<f64> = per_task.iter().filter_map(|v| *v).collect();
    if values.is_empty() {
        return Err(MetricError::AllTasksSkipped);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(MetricReport {
        metric,
        subset: subset.to_string(),
        per_task,
        mean,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scored<'a>(s: &'a [f64], y: &'a [f64], w: &'a [f64]) -> ScoredLabels<'a> {
        ScoredLabels::new(s, y, w).unwrap()
    }

    #[test]
    fn roc_auc_pair_counting() {
        let w = [1.0; 4];
        let s = scored(&[0.9, 0.8, 0.3, 0.2], &[1.0, 0.0, 1.0, 0.0], &w);
        assert!((roc_auc(&s).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn roc_auc_extremes() {
        let w = [1.0; 4];
        let perfect = scored(&[0.9, 0.8, 0.2, 0.1], &[1.0, 1.0, 0.0, 0.0], &w);
        assert_eq!(roc_auc(&perfect).unwrap(), 1.0);
        let ties = scored(&[0.5, 0.5, 0.5, 0.5], &[1.0, 1.0, 0.0, 0.0], &w);
        assert_eq!(roc_auc(&ties).unwrap(), 0.5);
    }

    #[test]
    fn roc_auc_single_class() {
        let w = [1.0; 2];
        let s = scored(&[0.4, 0.6], &[1.0, 1.0], &w);
        assert_eq!(roc_auc(&s), Err(MetricError::SingleClass));
        // Weight-0 rows don't count toward class presence.
        let w = [1.0, 0.0];
        let s = scored(&[0.4, 0.6], &[1.0, 0.0], &w);
        assert_eq!(roc_auc(&s), Err(MetricError::SingleClass));
    }

    #[test]
    fn prc_auc_threshold_enumeration() {
        let w = [1.0; 3];
        let s = scored(&[0.9, 0.8, 0.3], &[1.0, 0.0, 1.0], &w);
        let expected = 0.5 * 1.0 + 0.5 * (2.0 / 3.0);
        assert!((prc_auc(&s).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn prc_auc_perfect_and_empty() {
        let w = [1.0; 3];
        let s = scored(&[0.9, 0.8, 0.1], &[1.0, 1.0, 0.0], &w);
        assert_eq!(prc_auc(&s).unwrap(), 1.0);
        let s = scored(&[0.9, 0.8, 0.1], &[0.0, 0.0, 0.0], &w);
        assert_eq!(prc_auc(&s), Err(MetricError::NoPositives));
    }

    #[test]
    fn regression_metrics() {
        let w = [1.0, 1.0];
        let s = scored(&[0.0, 0.0], &[3.0, 4.0], &w);
        assert!((rmse(&s).unwrap() - 12.5f64.sqrt()).abs() < 1e-12);
        assert!((mae(&s).unwrap() - 3.5).abs() < 1e-12);
        // Perfect predictions.
        let s = scored(&[3.0, 4.0], &[3.0, 4.0], &w);
        assert_eq!(rmse(&s).unwrap(), 0.0);
        assert_eq!(mae(&s).unwrap(), 0.0);
        // Scaling weights changes nothing.
        let w2 = [2.0, 2.0];
        let a = scored(&[0.0, 0.0], &[3.0, 4.0], &w);
        let b = scored(&[0.0, 0.0], &[3.0, 4.0], &w2);
        assert_eq!(rmse(&a).unwrap(), rmse(&b).unwrap());
        assert_eq!(mae(&a).unwrap(), mae(&b).unwrap());
    }

    #[test]
    fn recommendation_rule() {
        assert_eq!(
            recommend_metric(TaskKind::Classification, 0.014, MetricId::Rmse),
            MetricId::PrcAuc
        );
        assert_eq!(
            recommend_metric(TaskKind::Classification, 0.5, MetricId::Rmse),
            MetricId::RocAuc
        );
        assert_eq!(
            recommend_metric(TaskKind::Classification, 0.002, MetricId::Rmse),
            MetricId::PrcAuc
        );
        assert_eq!(
            recommend_metric(TaskKind::Regression, 0.0, MetricId::Mae),
            MetricId::Mae
        );
    }

    #[test]
    fn task_means_and_skips() {
        let r = mean_over_tasks(MetricId::RocAuc, "test", vec![Some(0.8), Some(0.6)]).unwrap();
        assert!((r.mean - 0.7).abs() < 1e-12);
        assert!(r.skipped.is_empty());

        let r = mean_over_tasks(MetricId::RocAuc, "test", vec![Some(0.8), None]).unwrap();
        assert_eq!(r.mean, 0.8);
        assert_eq!(r.skipped, vec![1]);

        assert_eq!(
            mean_over_tasks(MetricId::RocAuc, "test", vec![None, None]),
            Err(MetricError::AllTasksSkipped)
        );
    }

    #[test]
    fn report_serializes_expected_fields() {
        let r = mean_over_tasks(MetricId::PrcAuc, "valid", vec![Some(0.5), None]).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        for key in ["metric", "subset", "per_task", "mean", "skipped"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert_eq!(json["metric"], "prc_auc");
    }
}
