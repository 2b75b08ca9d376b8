//! Evaluation metrics and per-seed report aggregation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    /// Macro average over the classes present in the truth labels.
    pub precision: f64,
    pub recall: f64,
    /// Multiclass (Gorodkin) Matthews correlation.
    pub mcc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    /// `None` when the truth vector is constant.
    pub r2: Option<f64>,
    pub mae: f64,
    pub mse: f64,
    /// `None` when either side has no rank variance.
    pub spearman: Option<f64>,
}

fn check_lengths(a: usize, b: usize, min: usize) -> Result<()> {
    if a != b {
        return Err(Error::Domain(format!("truth has {a} entries but predictions have {b}")));
    }
    if a < min {
        return Err(Error::Domain(format!("need at least {min} entries, got {a}")));
    }
    Ok(())
}

pub fn classification_metrics<T: Ord>(truth: &[T], predicted: &[T]) -> Result<ClassificationMetrics> {
    check_lengths(truth.len(), predicted.len(), 1)?;
    let classes: Vec<&T> = truth.iter().chain(predicted).collect::<BTreeSet<_>>().into_iter().collect();
    let index = |x: &T| classes.binary_search(&x).expect("class collected above");
    let m = classes.len();
    let mut confusion = vec![vec![0u64; m]; m];
    for (t, p) in truth.iter().zip(predicted) {
        confusion[index(t)][index(p)] += 1;
    }
    let n = truth.len() as f64;
    let true_counts: Vec<f64> = (0..m).map(|i| confusion[i].iter().sum::<u64>() as f64).collect();
    let pred_counts: Vec<f64> = (0..m).map(|j| (0..m).map(|i| confusion[i][j]).sum::<u64>() as f64).collect();
    let correct: f64 = (0..m).map(|i| confusion[i][i] as f64).sum();

    let present: Vec<usize> = (0..m).filter(|&i| true_counts[i] > 0.0).collect();
    let precision = present
        .iter()
        .map(|&i| if pred_counts[i] > 0.0 { confusion[i][i] as f64 / pred_counts[i] } else { 0.0 })
        .sum::<f64>()
        / present.len() as f64;
    let recall = present.iter().map(|&i| confusion[i][i] as f64 / true_counts[i]).sum::<f64>() / present.len() as f64;

    let cov_tp = correct * n - (0..m).map(|i| pred_counts[i] * true_counts[i]).sum::<f64>();
    let cov_pp = n * n - pred_counts.iter().map(|p| p * p).sum::<f64>();
    let cov_tt = n * n - true_counts.iter().map(|t| t * t).sum::<f64>();
    let denom = (cov_pp * cov_tt).sqrt();
    let mcc = if denom > 0.0 { cov_tp / denom } else { 0.0 };

    Ok(ClassificationMetrics { accuracy: correct / n, precision, recall, mcc })
}

/// Ranks starting at 1 with tied values sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        None
    } else {
        Some(sab / (saa * sbb).sqrt())
    }
}

pub fn regression_metrics(truth: &[f64], predicted: &[f64]) -> Result<RegressionMetrics> {
    check_lengths(truth.len(), predicted.len(), 2)?;
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    let ss_res: f64 = truth.iter().zip(predicted).map(|(t, p)| (t - p) * (t - p)).sum();
    let mae = truth.iter().zip(predicted).map(|(t, p)| (t - p).abs()).sum::<f64>() / n;
    let r2 = if ss_tot > 0.0 { Some(1.0 - ss_res / ss_tot) } else { None };
    let spearman = pearson(&average_ranks(truth), &average_ranks(predicted));
    Ok(RegressionMetrics { r2, mae, mse: ss_res / n, spearman })
}

/// F1 score with anomalies as the positive class; 0 when precision and
/// recall are both 0.
pub fn f1_binary(truth: &[bool], predicted: &[bool]) -> Result<f64> {
    check_lengths(truth.len(), predicted.len(), 0)?;
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for (&t, &p) in truth.iter().zip(predicted) {
        match (t, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
    let recall = if tp + fn_ > 0 { tp as f64 / (tp + fn_) as f64 } else { 0.0 };
    Ok(if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classification,
    Regression,
    Anomaly,
}

/// One seed's metrics. A `None` metric was undefined for that seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub seed: u64,
    pub metrics: BTreeMap<String, Option<f64>>,
}

impl MetricRow {
    pub fn classification(seed: u64, m: &ClassificationMetrics) -> Self {
        let metrics = [("accuracy", m.accuracy), ("precision", m.precision), ("recall", m.recall), ("mcc", m.mcc)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), Some(v)))
            .collect();
        MetricRow { seed, metrics }
    }

    pub fn regression(seed: u64, m: &RegressionMetrics) -> Self {
        let metrics = [("r2", m.r2), ("mae", Some(m.mae)), ("mse", Some(m.mse)), ("spearman", m.spearman)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        MetricRow { seed, metrics }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub seeds: Vec<u64>,
    pub rows: Vec<MetricRow>,
    /// Arithmetic mean per metric; `None` if any seed left it undefined.
    pub means: BTreeMap<String, Option<f64>>,
}

impl EvalReport {
    pub fn from_rows(task: Task, rows: Vec<MetricRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Domain("evaluation report needs at least one seed".into()));
        }
        let names: BTreeSet<&String> = rows.iter().flat_map(|r| r.metrics.keys()).collect();
        let means = names
            .into_iter()
            .map(|name| {
                let vals: Option<Vec<f64>> = rows.iter().map(|r| r.metrics.get(name).copied().flatten()).collect();
                let mean = vals.map(|v| v.iter().sum::<f64>() / v.len() as f64);
                (name.clone(), mean)
            })
            .collect();
        let seeds = rows.iter().map(|r| r.seed).collect();
        Ok(EvalReport { task, seeds, rows, means })
    }

    pub fn mean(&self, metric: &str) -> Option<f64> {
        self.means.get(metric).copied().flatten()
    }
}
