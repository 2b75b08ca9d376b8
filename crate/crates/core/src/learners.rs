//! Classification and regression by inverse-distance weighting over the
//! fitted metric.
//!
//! Each prediction carries the normalized weight of every neighbor that
//! produced it. Those weights are exactly the ones used to form the
//! prediction, so they sum to one and dropping a case removes precisely its
//! share.

use serde::{Deserialize, Serialize};

use crate::conviction::residual_conviction;
use crate::data::{knn_query, Dataset, FeatureKind, NeighborSet, Value};
use crate::distance::DistanceConfig;
use crate::error::{Error, Result};
use crate::residuals::CaseErrors;

/// One neighbor's share of a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Influence {
    pub id: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// Label token for classification, real value for regression.
    pub value: Value,
    /// Encoded form of `value` (category code or the real itself).
    pub code: f64,
    pub influences: Vec<Influence>,
    pub residual_conviction: Option<f64>,
}

/// Default neighbor count: `⌈√n⌉` clamped to `[1, 30]`.
pub fn default_k(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).clamp(1, 30)
}

/// Normalized inverse-distance weights of a neighbor set.
pub fn inverse_distance_weights(neighbors: &NeighborSet) -> Vec<f64> {
    let inv: Vec<f64> = neighbors.distances().map(|d| 1.0 / d).collect();
    let total: f64 = inv.iter().sum();
    inv.into_iter().map(|w| w / total).collect()
}

/// Weighted mean of `values` under normalized `weights`.
pub(crate) fn weighted_mean(values: impl IntoIterator<Item = f64>, weights: &[f64]) -> f64 {
    values.into_iter().zip(weights).map(|(v, &w)| v * w).sum()
}

/// Code with the largest summed weight; ties go to the smallest code.
pub(crate) fn weighted_mode(codes: impl IntoIterator<Item = f64>, weights: &[f64]) -> f64 {
    let mut scores: Vec<(f64, f64)> = Vec::new();
    for (c, &w) in codes.into_iter().zip(weights) {
        match scores.iter_mut().find(|(code, _)| *code == c) {
            Some(entry) => entry.1 += w,
            None => scores.push((c, w)),
        }
    }
    scores.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = scores[0];
    for &s in &scores[1..] {
        if s.1 > best.1 {
            best = s;
        }
    }
    best.0
}

fn target_of(dataset: &Dataset, want_categorical: bool) -> Result<usize> {
    let t = dataset
        .target()
        .ok_or_else(|| Error::Config("dataset has no target feature".into()))?;
    let kind = &dataset.specs()[t].kind;
    match (want_categorical, kind) {
        (true, FeatureKind::Nominal(_) | FeatureKind::Ordinal(_)) | (false, FeatureKind::Continuous) => Ok(t),
        (true, _) => Err(Error::Config(format!(
            "classification needs a categorical target, '{}' is continuous",
            dataset.specs()[t].name
        ))),
        (false, _) => Err(Error::Config(format!(
            "regression needs a continuous target, '{}' is categorical",
            dataset.specs()[t].name
        ))),
    }
}

fn neighbors_for_target(
    dataset: &Dataset,
    query: &[f64],
    target: usize,
    k: usize,
    cfg: &DistanceConfig,
) -> Result<NeighborSet> {
    let metric = cfg.without_feature(target)?;
    knn_query(dataset, query, k, &metric, None)
}

fn influences(neighbors: &NeighborSet, weights: &[f64]) -> Vec<Influence> {
    neighbors.ids().zip(weights).map(|(id, &weight)| Influence { id, weight }).collect()
}

/// Predict a categorical target by inverse-distance-weighted vote.
///
/// The target is masked out of the metric. Class scores are summed inverse
/// distances; ties go to the lexicographically smallest label.
pub fn classify(dataset: &Dataset, query: &[f64], k: usize, cfg: &DistanceConfig) -> Result<Prediction> {
    let target = target_of(dataset, true)?;
    let neighbors = neighbors_for_target(dataset, query, target, k, cfg)?;
    let weights = inverse_distance_weights(&neighbors);
    let code = weighted_mode(neighbors.ids().map(|id| dataset.row(id)[target]), &weights);
    Ok(Prediction {
        value: dataset.specs()[target].decode(code),
        code,
        influences: influences(&neighbors, &weights),
        residual_conviction: None,
    })
}

/// Predict a continuous target as the inverse-distance-weighted mean.
pub fn regress(dataset: &Dataset, query: &[f64], k: usize, cfg: &DistanceConfig) -> Result<Prediction> {
    let target = target_of(dataset, false)?;
    let neighbors = neighbors_for_target(dataset, query, target, k, cfg)?;
    let weights = inverse_distance_weights(&neighbors);
    let y = weighted_mean(neighbors.ids().map(|id| dataset.row(id)[target]), &weights);
    Ok(Prediction { value: Value::Real(y), code: y, influences: influences(&neighbors, &weights), residual_conviction: None })
}

/// Run whichever predictor fits the target kind.
pub fn predict(dataset: &Dataset, query: &[f64], k: usize, cfg: &DistanceConfig) -> Result<Prediction> {
    let target = dataset
        .target()
        .ok_or_else(|| Error::Config("dataset has no target feature".into()))?;
    if dataset.specs()[target].kind.is_continuous() {
        regress(dataset, query, k, cfg)
    } else {
        classify(dataset, query, k, cfg)
    }
}

/// Predict and, when the query carries an observed target value, attach the
/// residual conviction of that prediction.
pub fn predict_with_explanation(
    dataset: &Dataset,
    query: &[f64],
    k: usize,
    cfg: &DistanceConfig,
    case_errors: Option<&CaseErrors>,
) -> Result<Prediction> {
    let mut prediction = predict(dataset, query, k, cfg)?;
    let target = dataset.target().expect("checked by predict");
    if query[target].is_finite() {
        prediction.residual_conviction =
            Some(residual_conviction(dataset, query, target, prediction.code, k, cfg, case_errors)?);
    }
    Ok(prediction)
}
