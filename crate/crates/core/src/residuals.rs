//! Leave-one-out feature residuals and inverse residual weighting.
//!
//! A feature's residual is the mean absolute error of predicting it for each
//! held-out case from that case's neighbors on the other features. Residuals
//! set the LK scale of each feature and, inverted, its weight. Because the
//! neighbors depend on the metric and the metric depends on the residuals,
//! [`fit_residuals_iterative`] alternates the two until the residuals settle.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{knn_query, Dataset, FeatureKind};
use crate::distance::{residual_floor, DistanceConfig};
use crate::error::{Error, Result};
use crate::learners::{inverse_distance_weights, weighted_mean, weighted_mode};

/// Per-case, per-feature absolute LOO errors from the last residual pass.
///
/// Cases left out of a sampled pass have no entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseErrors {
    n_features: usize,
    errors: Vec<Option<f64>>,
}

impl CaseErrors {
    pub fn new(n_cases: usize, n_features: usize) -> Self {
        CaseErrors { n_features, errors: vec![None; n_cases * n_features] }
    }

    pub fn get(&self, case: usize, feature: usize) -> Option<f64> {
        self.errors.get(case * self.n_features + feature).copied().flatten()
    }

    pub fn set(&mut self, case: usize, feature: usize, error: f64) {
        self.errors[case * self.n_features + feature] = Some(error);
    }

    pub fn n_cases(&self) -> usize {
        self.errors.len() / self.n_features.max(1)
    }
}

/// Residuals from one leave-one-out pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooResiduals {
    pub residuals: Vec<f64>,
    pub case_errors: CaseErrors,
}

/// Outcome of the iterative residual fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualFit {
    pub residuals: Vec<f64>,
    pub weights: Vec<f64>,
    pub floors: Vec<f64>,
    pub iterations_run: usize,
    /// Max relative residual change of each iteration.
    pub history: Vec<f64>,
    pub converged: bool,
    pub case_errors: CaseErrors,
}

impl ResidualFit {
    /// The metric defined by the fitted residuals and weights.
    pub fn metric(&self, dataset: &Dataset, p: f64) -> Result<DistanceConfig> {
        DistanceConfig::new(dataset.specs(), p, self.weights.clone(), self.residuals.clone(), self.floors.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub k: usize,
    pub p: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Number of cases to hold out per pass; `None` holds out every case.
    pub sample: Option<usize>,
    pub seed: u64,
}

impl FitOptions {
    pub fn new(k: usize) -> Self {
        FitOptions { k, p: 0.0, max_iter: 10, tol: 0.01, sample: None, seed: 0 }
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Median absolute deviation from the median.
pub fn median_absolute_deviation(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = median(&v);
    let mut dev: Vec<f64> = v.iter().map(|x| (x - m).abs()).collect();
    dev.sort_by(f64::total_cmp);
    median(&dev)
}

/// Spread of one feature used for its initial residual and floor: the MAD
/// for continuous and ordinal features, the mismatch rate against the modal
/// category for nominal features.
pub fn feature_dispersion(dataset: &Dataset, feature: usize) -> f64 {
    let col = dataset.column(feature);
    match &dataset.specs()[feature].kind {
        FeatureKind::Nominal(cats) => {
            if col.is_empty() {
                return 0.0;
            }
            let mut counts = vec![0usize; cats.len()];
            for &c in &col {
                counts[c as usize] += 1;
            }
            let modal = counts.iter().copied().max().unwrap_or(0);
            1.0 - modal as f64 / col.len() as f64
        }
        _ => median_absolute_deviation(&col),
    }
}

fn is_constant(dataset: &Dataset, feature: usize) -> bool {
    let mut values = dataset.cases().map(|c| c.values[feature]);
    match values.next() {
        Some(first) => values.all(|v| v == first),
        None => true,
    }
}

/// Leave-one-out prediction of `feature` for a stored case from its `k`
/// nearest neighbors on the other features.
///
/// Continuous features use the inverse-distance-weighted mean; nominal and
/// ordinal features use the inverse-distance-weighted mode.
pub fn loo_predict_feature(dataset: &Dataset, case_id: usize, feature: usize, k: usize, cfg: &DistanceConfig) -> Result<f64> {
    let metric = cfg.without_feature(feature)?;
    loo_predict_masked(dataset, case_id, feature, k, &metric)
}

fn loo_predict_masked(dataset: &Dataset, case_id: usize, feature: usize, k: usize, metric: &DistanceConfig) -> Result<f64> {
    if dataset.len() < 2 {
        return Err(Error::InsufficientData { what: "leave-one-out prediction", required: 2, available: dataset.len() });
    }
    if case_id >= dataset.len() {
        return Err(Error::Domain(format!("case id {case_id} out of range")));
    }
    let neighbors = knn_query(dataset, dataset.row(case_id), k, metric, Some(case_id))?;
    let weights = inverse_distance_weights(&neighbors);
    let values = neighbors.ids().map(|id| dataset.row(id)[feature]);
    Ok(match dataset.specs()[feature].kind {
        FeatureKind::Continuous => weighted_mean(values, &weights),
        _ => weighted_mode(values, &weights),
    })
}

fn absolute_error(kind: &FeatureKind, observed: f64, predicted: f64) -> f64 {
    match kind {
        FeatureKind::Nominal(_) => {
            if observed == predicted {
                0.0
            } else {
                1.0
            }
        }
        _ => (observed - predicted).abs(),
    }
}

/// Order-independent mean: sort, then sum.
fn stable_mean(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// One leave-one-out pass: mean absolute LOO error of every feature.
///
/// With `sample = Some(m)` only a seeded uniform sample of `m` cases is held
/// out, which approximates the full mean at `O(m·N)` cost.
pub fn compute_feature_residuals(
    dataset: &Dataset,
    k: usize,
    cfg: &DistanceConfig,
    sample: Option<usize>,
    seed: u64,
) -> Result<LooResiduals> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::InsufficientData { what: "residual estimation", required: 2, available: n });
    }
    let held_out: Vec<usize> = match sample {
        Some(m) if m < n => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut ids = index::sample(&mut rng, n, m.max(1)).into_vec();
            ids.sort_unstable();
            ids
        }
        _ => (0..n).collect(),
    };
    let n_features = dataset.n_features();
    let metrics = (0..n_features).map(|f| cfg.without_feature(f)).collect::<Result<Vec<_>>>()?;

    let per_case: Vec<Vec<f64>> = held_out
        .par_iter()
        .map(|&id| {
            (0..n_features)
                .map(|f| {
                    let predicted = loo_predict_masked(dataset, id, f, k, &metrics[f])?;
                    Ok(absolute_error(&dataset.specs()[f].kind, dataset.row(id)[f], predicted))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut case_errors = CaseErrors::new(n, n_features);
    for (&id, errs) in held_out.iter().zip(&per_case) {
        for (f, &e) in errs.iter().enumerate() {
            case_errors.set(id, f, e);
        }
    }
    let residuals = (0..n_features)
        .map(|f| {
            let mut col: Vec<f64> = per_case.iter().map(|e| e[f]).collect();
            stable_mean(&mut col)
        })
        .collect();
    Ok(LooResiduals { residuals, case_errors })
}

/// Inverse residual weights `w_i = 1 / r_i^q`.
///
/// `q = p` for `p > 0`. At `p = 0` the literal exponent would make every
/// weight 1, so `q = 1` is used there and the weights are normalized to sum
/// to one, matching the geometric-mean metric.
pub fn irw_weights(residuals: &[f64], p: f64) -> Vec<f64> {
    let q = if p > 0.0 { p } else { 1.0 };
    let w: Vec<f64> = residuals.iter().map(|&r| 1.0 / r.powf(q)).collect();
    if p == 0.0 {
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    } else {
        w
    }
}

/// IRW weights with constant features zeroed; if every feature is constant
/// the weights fall back to uniform.
fn masked_weights(scales: &[f64], constant: &[bool], p: f64) -> Vec<f64> {
    if constant.iter().all(|&c| c) {
        return vec![1.0; scales.len()];
    }
    let kept: Vec<f64> = scales.iter().zip(constant).filter(|(_, &c)| !c).map(|(&s, _)| s).collect();
    let mut kept_w = irw_weights(&kept, p).into_iter();
    constant.iter().map(|&c| if c { 0.0 } else { kept_w.next().unwrap() }).collect()
}

/// Alternate leave-one-out residual estimation and reweighting.
///
/// Iteration 0 takes each feature's dispersion as its residual with uniform
/// weights. Each iteration then recomputes residuals under the current
/// metric and derives new weights from them, stopping once the largest
/// relative residual change drops below `tol` or after `max_iter` passes.
/// Running out of iterations is reported through `converged`, not as an
/// error.
pub fn fit_residuals_iterative(dataset: &Dataset, opts: &FitOptions) -> Result<ResidualFit> {
    if opts.max_iter == 0 {
        return Err(Error::Config("max_iter must be at least 1".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if opts.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let n_features = dataset.n_features();
    let dispersion: Vec<f64> = (0..n_features).map(|f| feature_dispersion(dataset, f)).collect();
    let floors: Vec<f64> = dispersion.iter().map(|&d| residual_floor(d)).collect();
    let constant: Vec<bool> = (0..n_features).map(|f| is_constant(dataset, f)).collect();

    let mut residuals = dispersion;
    let mut weights = masked_weights(&vec![1.0; n_features], &constant, 1.0);
    let mut history = Vec::new();
    let mut converged = false;
    let mut case_errors = CaseErrors::new(dataset.len(), n_features);

    for _ in 0..opts.max_iter {
        let cfg = DistanceConfig::new(dataset.specs(), opts.p, weights.clone(), residuals.clone(), floors.clone())?;
        let pass = compute_feature_residuals(dataset, opts.k, &cfg, opts.sample, opts.seed)?;
        let change = pass
            .residuals
            .iter()
            .zip(&residuals)
            .zip(&floors)
            .map(|((&new, &old), &floor)| (new - old).abs() / old.max(floor))
            .fold(0.0, f64::max);
        let scales: Vec<f64> = pass.residuals.iter().zip(&floors).map(|(&r, &f)| r.max(f)).collect();
        weights = masked_weights(&scales, &constant, opts.p);
        residuals = pass.residuals;
        case_errors = pass.case_errors;
        history.push(change);
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(ResidualFit { residuals, weights, floors, iterations_run: history.len(), history, converged, case_errors })
}
