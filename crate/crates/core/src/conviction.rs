//! Distance contribution, surprisal and conviction.
//!
//! The distance contribution `φ(x)` of a point is the harmonic mean of the
//! distances to its `k` nearest neighbors. Dividing it by the norm of the
//! residual vector gives its surprisal. Convictions are ratios of expected to
//! observed surprisal, so values near 1 are ordinary and values well below
//! 1 flag something unusual:
//!
//! * similarity conviction compares `φ(x)` with the mean `φ` of its
//!   neighbors;
//! * familiarity conviction measures how much idealizing a point's share
//!   of the `φ` distribution changes that distribution (KL divergence),
//!   relative to the average over all points;
//! * residual conviction compares a prediction's error with the LOO errors
//!   of the neighbors that produced it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{knn_query, Dataset, FeatureKind, NeighborSet};
use crate::distance::DistanceConfig;
use crate::error::{Error, Result};
use crate::residuals::CaseErrors;

/// Upper bound reported for convictions whose denominator vanishes.
pub const CONVICTION_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurprisalContext {
    /// `‖r‖_p`, the mean of the exponential residual model (`1/λ`).
    pub r_norm: f64,
    pub k: usize,
}

impl SurprisalContext {
    pub fn new(r_norm: f64, k: usize) -> Result<Self> {
        if !(r_norm > 0.0) || !r_norm.is_finite() {
            return Err(Error::Domain(format!("residual norm must be positive, got {r_norm}")));
        }
        Ok(SurprisalContext { r_norm, k })
    }

    pub fn from_metric(cfg: &DistanceConfig, k: usize) -> Result<Self> {
        Self::new(cfg.residual_norm(), k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvictionReport {
    pub phi: f64,
    pub surprisal: f64,
    pub pi_f: Option<f64>,
    pub pi_s: f64,
    pub expected_phi: f64,
}

/// Harmonic mean of the neighbor distances.
pub fn distance_contribution(neighbors: &NeighborSet) -> Result<f64> {
    if neighbors.is_empty() {
        return Err(Error::Domain("distance contribution of an empty neighbor set".into()));
    }
    let inv_sum: f64 = neighbors.distances().map(|d| 1.0 / d).sum();
    Ok(neighbors.len() as f64 / inv_sum)
}

/// `I(x) = φ(x) / ‖r‖_p`.
pub fn self_information(phi: f64, ctx: &SurprisalContext) -> f64 {
    phi / ctx.r_norm
}

/// Normalize distance contributions into point probabilities.
pub fn point_probabilities(phis: &[f64]) -> Result<Vec<f64>> {
    if phis.is_empty() {
        return Err(Error::Domain("point probabilities of an empty set".into()));
    }
    if phis.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::Domain("distance contributions must be finite and non-negative".into()));
    }
    let mut sorted = phis.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total: f64 = sorted.iter().sum();
    if total == 0.0 {
        return Err(Error::Domain("all distance contributions are zero".into()));
    }
    Ok(phis.iter().map(|&p| p / total).collect())
}

/// `D_KL(p ‖ q)` in nats over a shared support. Zero-mass terms of `p`
/// contribute nothing.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi / qi).ln())
        .sum()
}

/// `D_KL(L ‖ L_j)` for every `j`, where `L_j` is `L` with element `j`
/// replaced by `1/n` and renormalized.
///
/// Writing `s = 1 − l_j + 1/n`, every other element of `L_j` is `l_i / s`,
/// so the divergence collapses to `ln s + l_j·ln(n·l_j)`. With
/// `u = n·l_j − 1` this is `f(u)/n + g(u/n)` for `f(u) = (1+u)ln(1+u) − u`
/// and `g(a) = ln(1−a) + a`; both are evaluated by series near zero, where
/// the direct form cancels.
pub fn familiarity_divergences(probabilities: &[f64]) -> Vec<f64> {
    let n = probabilities.len() as f64;
    probabilities
        .iter()
        .map(|&l| {
            let u = n * l - 1.0;
            (entropy_gap(u) / n + log_gap(u / n)).max(0.0)
        })
        .collect()
}

const SERIES_CUTOFF: f64 = 0.1;

/// `(1+u)·ln(1+u) − u` for `u ≥ −1`.
fn entropy_gap(u: f64) -> f64 {
    if u.abs() >= SERIES_CUTOFF {
        let own = if u > -1.0 { (1.0 + u) * u.ln_1p() } else { 0.0 };
        return own - u;
    }
    // Σ_{m≥2} (−1)^m u^m / (m(m−1))
    let mut sum = 0.0;
    let mut pow = u * u;
    for m in 2..60 {
        let term = pow / (m * (m - 1)) as f64;
        sum += if m % 2 == 0 { term } else { -term };
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        pow *= u;
    }
    sum
}

/// `ln(1−a) + a` for `a < 1`.
fn log_gap(a: f64) -> f64 {
    if a.abs() >= SERIES_CUTOFF {
        return (-a).ln_1p() + a;
    }
    // −Σ_{m≥2} a^m / m
    let mut sum = 0.0;
    let mut pow = a * a;
    for m in 2..60 {
        let term = pow / m as f64;
        sum -= term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        pow *= a;
    }
    sum
}

/// Familiarity conviction `mean(D) / D_j` from a vector of distance
/// contributions.
pub fn familiarity_from_phis(phis: &[f64]) -> Result<Vec<f64>> {
    let l = point_probabilities(phis)?;
    let d = familiarity_divergences(&l);
    let mut sorted = d.clone();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / d.len() as f64;
    if mean == 0.0 {
        return Ok(vec![1.0; d.len()]);
    }
    Ok(d.iter().map(|&dj| if dj > 0.0 { (mean / dj).min(CONVICTION_CAP) } else { CONVICTION_CAP }).collect())
}

/// Distance contribution of every stored case over its `k` nearest other
/// cases.
pub fn case_phis(dataset: &Dataset, cfg: &DistanceConfig, k: usize) -> Result<Vec<f64>> {
    if dataset.len() < 2 {
        return Err(Error::InsufficientData { what: "distance contributions", required: 2, available: dataset.len() });
    }
    (0..dataset.len())
        .into_par_iter()
        .map(|id| {
            let nb = knn_query(dataset, dataset.row(id), k, cfg, Some(id))?;
            distance_contribution(&nb)
        })
        .collect()
}

/// Familiarity conviction of every stored case.
pub fn familiarity_conviction(dataset: &Dataset, cfg: &DistanceConfig, k: usize) -> Result<Vec<f64>> {
    familiarity_from_phis(&case_phis(dataset, cfg, k)?)
}

fn similarity_inner(
    dataset: &Dataset,
    query: &[f64],
    exclude: Option<usize>,
    k: usize,
    cfg: &DistanceConfig,
    phis: Option<&[f64]>,
) -> Result<ConvictionReport> {
    if dataset.len() < k + 1 {
        return Err(Error::InsufficientData { what: "similarity conviction", required: k + 1, available: dataset.len() });
    }
    let ctx = SurprisalContext::from_metric(cfg, k)?;
    let neighbors = knn_query(dataset, query, k, cfg, exclude)?;
    let phi = distance_contribution(&neighbors)?;
    let neighbor_phis: Vec<f64> = match phis {
        Some(all) => neighbors.ids().map(|id| all[id]).collect(),
        None => neighbors
            .ids()
            .map(|id| distance_contribution(&knn_query(dataset, dataset.row(id), k, cfg, Some(id))?))
            .collect::<Result<_>>()?,
    };
    let expected_phi = neighbor_phis.iter().sum::<f64>() / neighbor_phis.len() as f64;
    Ok(ConvictionReport { phi, surprisal: self_information(phi, &ctx), pi_f: None, pi_s: expected_phi / phi, expected_phi })
}

/// Similarity conviction of an external query.
pub fn similarity_conviction(dataset: &Dataset, query: &[f64], k: usize, cfg: &DistanceConfig) -> Result<ConvictionReport> {
    similarity_inner(dataset, query, None, k, cfg, None)
}

/// Similarity conviction of an external query reusing precomputed
/// [`case_phis`].
pub fn similarity_conviction_with_phis(
    dataset: &Dataset,
    query: &[f64],
    k: usize,
    cfg: &DistanceConfig,
    phis: &[f64],
) -> Result<ConvictionReport> {
    if phis.len() != dataset.len() {
        return Err(Error::Domain("cached distance contributions do not match the dataset".into()));
    }
    similarity_inner(dataset, query, None, k, cfg, Some(phis))
}

/// Similarity conviction of a stored case, excluded from its own neighbors.
pub fn similarity_conviction_of_case(dataset: &Dataset, id: usize, k: usize, cfg: &DistanceConfig) -> Result<ConvictionReport> {
    if id >= dataset.len() {
        return Err(Error::Domain(format!("case id {id} out of range")));
    }
    similarity_inner(dataset, dataset.row(id), Some(id), k, cfg, None)
}

/// Residual conviction of a prediction for `feature`.
///
/// The expected error is the mean cached LOO error of `feature` over the
/// query's `k` nearest neighbors (the feature itself masked from the
/// metric); neighbors without a cached error contribute the global residual.
/// The observed error is floored at the feature's residual floor and the
/// ratio is capped at [`CONVICTION_CAP`]. Nominal features use 0/1 errors.
pub fn residual_conviction(
    dataset: &Dataset,
    query: &[f64],
    feature: usize,
    prediction: f64,
    k: usize,
    cfg: &DistanceConfig,
    case_errors: Option<&CaseErrors>,
) -> Result<f64> {
    let cache = case_errors.ok_or(Error::MissingResidualCache)?;
    if cache.n_cases() != dataset.len() {
        return Err(Error::Domain("residual cache does not match the dataset".into()));
    }
    if feature >= dataset.n_features() {
        return Err(Error::Domain(format!("feature index {feature} out of range")));
    }
    let observed = query[feature];
    if !observed.is_finite() {
        return Err(Error::Domain(format!(
            "query has no observed value for feature '{}'",
            dataset.specs()[feature].name
        )));
    }
    let metric = cfg.without_feature(feature)?;
    let neighbors = knn_query(dataset, query, k, &metric, None)?;
    let fallback = cfg.scales()[feature];
    let expected: f64 = neighbors
        .ids()
        .map(|id| cache.get(id, feature).unwrap_or(fallback))
        .sum::<f64>()
        / neighbors.len() as f64;
    let error = match dataset.specs()[feature].kind {
        FeatureKind::Nominal(_) => {
            if observed == prediction {
                0.0
            } else {
                1.0
            }
        }
        _ => (observed - prediction).abs(),
    };
    let denominator = error.max(cfg.floors()[feature]);
    Ok((expected / denominator).min(CONVICTION_CAP))
}

/// Sorted distances from each case to its `k` nearest other cases, kept so
/// that the effect of inserting one extra point can be computed without a
/// full rescan.
#[derive(Debug, Clone)]
pub struct FamiliarityIndex {
    k: usize,
    neighbor_distances: Vec<Vec<f64>>,
    phis: Vec<f64>,
}

impl FamiliarityIndex {
    pub fn build(dataset: &Dataset, cfg: &DistanceConfig, k: usize) -> Result<Self> {
        if dataset.len() < 2 {
            return Err(Error::InsufficientData { what: "familiarity conviction", required: 2, available: dataset.len() });
        }
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        let neighbor_distances: Vec<Vec<f64>> = (0..dataset.len())
            .into_par_iter()
            .map(|id| Ok(knn_query(dataset, dataset.row(id), k, cfg, Some(id))?.distances().collect()))
            .collect::<Result<_>>()?;
        let phis = neighbor_distances.iter().map(|d| harmonic_mean(d)).collect();
        Ok(FamiliarityIndex { k, neighbor_distances, phis })
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    /// Familiarity conviction of every stored case.
    pub fn case_convictions(&self) -> Result<Vec<f64>> {
        familiarity_from_phis(&self.phis)
    }

    /// Familiarity conviction of an external query, computed as if it were
    /// appended to the dataset. Stored cases whose neighborhoods the query
    /// would enter get their `φ` recomputed on a scratch copy.
    pub fn query_conviction(&self, dataset: &Dataset, query: &[f64], cfg: &DistanceConfig) -> Result<f64> {
        if dataset.len() != self.phis.len() {
            return Err(Error::Domain("familiarity index does not match the dataset".into()));
        }
        let to_query: Vec<f64> = dataset.cases().map(|c| cfg.distance(query, c.values)).collect();
        let mut own: Vec<f64> = to_query.clone();
        own.sort_by(f64::total_cmp);
        own.truncate(self.k);

        let mut phis = Vec::with_capacity(self.phis.len() + 1);
        for (i, nd) in self.neighbor_distances.iter().enumerate() {
            let d = to_query[i];
            // the query gets the largest id, so it loses distance ties
            if nd.len() < self.k || d < *nd.last().expect("non-empty") {
                let mut updated = nd.clone();
                let pos = updated.partition_point(|&x| x <= d);
                updated.insert(pos, d);
                updated.truncate(self.k);
                phis.push(harmonic_mean(&updated));
            } else {
                phis.push(self.phis[i]);
            }
        }
        phis.push(harmonic_mean(&own));
        let convictions = familiarity_from_phis(&phis)?;
        Ok(*convictions.last().expect("query appended"))
    }
}

fn harmonic_mean(d: &[f64]) -> f64 {
    d.len() as f64 / d.iter().map(|x| 1.0 / x).sum::<f64>()
}
