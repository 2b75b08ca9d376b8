//! LK-Laplace distance terms and the combined Minkowski-family metric.
//!
//! Every per-feature difference `δ` is replaced by the expected absolute
//! difference between two Laplace variables centred `δ` apart with a shared
//! scale `b`:
//!
//! ```text
//! d_LK(δ, b) = δ + ½·e^(−δ/b)·(3b + δ)
//! ```
//!
//! The term is never zero, so the `p = 0` geometric-mean metric never
//! collapses when two cases agree on one feature. The scale `b` of each
//! feature is its residual `r_i`, clamped from below by a per-feature floor.
//!
//! [`lk_numeric_oracle`] evaluates the defining double integral by
//! quadrature and is kept alongside the closed form so tests can compare
//! the two routes.

mod quadrature;

pub use quadrature::{gauss_legendre, lk_numeric_oracle, QuadratureSettings};

use serde::{Deserialize, Serialize};

use crate::data::{FeatureKind, FeatureSpec};
use crate::error::{Error, Result};

/// Smallest floor any feature may use.
pub const MIN_RESIDUAL_FLOOR: f64 = 1e-12;
/// Floor relative to a feature's median absolute deviation.
pub const RELATIVE_RESIDUAL_FLOOR: f64 = 1e-6;

/// Closed-form LK distance between two Laplace variables with means `mu`
/// apart and common scale `b`.
pub fn lk_laplace(mu: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::Domain(format!("LK scale must be positive and finite, got {b}")));
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::Domain(format!("LK mean difference must be finite and >= 0, got {mu}")));
    }
    Ok(lk_term(mu, b))
}

#[inline]
pub(crate) fn lk_term(mu: f64, b: f64) -> f64 {
    mu + 0.5 * (-mu / b).exp() * (3.0 * b + mu)
}

/// Floor for one feature's residual: `max(1e-12, 1e-6 × mad)`.
pub fn residual_floor(mad: f64) -> f64 {
    (RELATIVE_RESIDUAL_FLOOR * mad).max(MIN_RESIDUAL_FLOOR)
}

/// How a feature's raw difference is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DifferenceRule {
    /// `|a − b|` on reals or on ordinal ranks.
    Absolute,
    /// 0 when equal, 1 otherwise.
    Mismatch,
}

impl DifferenceRule {
    pub fn for_kind(kind: &FeatureKind) -> Self {
        match kind {
            FeatureKind::Continuous | FeatureKind::Ordinal(_) => DifferenceRule::Absolute,
            FeatureKind::Nominal(_) => DifferenceRule::Mismatch,
        }
    }

    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            DifferenceRule::Absolute => (a - b).abs(),
            DifferenceRule::Mismatch => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }
}

/// Per-feature difference for encoded values.
///
/// Continuous features compare reals, nominal features compare category
/// codes for equality and ordinal features subtract ranks.
pub fn feature_difference(spec: &FeatureSpec, a: f64, b: f64) -> Result<f64> {
    spec.validate_code(a)?;
    spec.validate_code(b)?;
    Ok(DifferenceRule::for_kind(&spec.kind).apply(a, b))
}

/// Parameters of the combined metric.
///
/// Holds the Lebesgue parameter `p`, per-feature weights, residuals (the LK
/// scale) and residual floors, plus a mask of the features that take part.
/// Masking is how a feature is predicted from the others: the masked feature
/// is dropped from `Ξ` entirely, so it neither contributes a term nor counts
/// toward the `|Ξ|`-th root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceConfig {
    p: f64,
    rules: Vec<DifferenceRule>,
    weights: Vec<f64>,
    residuals: Vec<f64>,
    floors: Vec<f64>,
    active: Vec<bool>,
    // derived
    scales: Vec<f64>,
    term_weights: Vec<f64>,
    n_active: usize,
}

impl DistanceConfig {
    pub fn new(
        specs: &[FeatureSpec],
        p: f64,
        weights: Vec<f64>,
        residuals: Vec<f64>,
        floors: Vec<f64>,
    ) -> Result<Self> {
        let rules = specs.iter().map(|s| DifferenceRule::for_kind(&s.kind)).collect();
        Self::from_rules(rules, p, weights, residuals, floors)
    }

    /// Unit weights, residuals of 1 and the minimum floor.
    pub fn uniform(specs: &[FeatureSpec], p: f64) -> Result<Self> {
        let n = specs.len();
        Self::new(specs, p, vec![1.0; n], vec![1.0; n], vec![MIN_RESIDUAL_FLOOR; n])
    }

    pub fn from_rules(
        rules: Vec<DifferenceRule>,
        p: f64,
        weights: Vec<f64>,
        residuals: Vec<f64>,
        floors: Vec<f64>,
    ) -> Result<Self> {
        let n = rules.len();
        if n == 0 {
            return Err(Error::Config("distance needs at least one feature".into()));
        }
        if weights.len() != n || residuals.len() != n || floors.len() != n {
            return Err(Error::Config(format!(
                "distance config arity mismatch: {n} features, {} weights, {} residuals, {} floors",
                weights.len(),
                residuals.len(),
                floors.len()
            )));
        }
        if !(p >= 0.0) || !p.is_finite() {
            return Err(Error::Config(format!("Lebesgue parameter p must be finite and >= 0, got {p}")));
        }
        for (i, ((&w, &r), &f)) in weights.iter().zip(&residuals).zip(&floors).enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Config(format!("weight of feature {i} must be finite and >= 0, got {w}")));
            }
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::Config(format!("residual of feature {i} must be finite and >= 0, got {r}")));
            }
            if !(f > 0.0) || !f.is_finite() {
                return Err(Error::Config(format!("residual floor of feature {i} must be positive, got {f}")));
            }
        }
        let mut cfg = DistanceConfig {
            p,
            rules,
            weights,
            residuals,
            floors,
            active: vec![true; n],
            scales: Vec::new(),
            term_weights: Vec::new(),
            n_active: 0,
        };
        cfg.derive()?;
        Ok(cfg)
    }

    fn derive(&mut self) -> Result<()> {
        self.scales = self.residuals.iter().zip(&self.floors).map(|(&r, &f)| r.max(f)).collect();
        self.n_active = self.active.iter().filter(|&&a| a).count();
        if self.n_active == 0 {
            self.term_weights = vec![0.0; self.rules.len()];
            return Ok(());
        }
        let total: f64 = self
            .weights
            .iter()
            .zip(&self.active)
            .filter(|(_, &a)| a)
            .map(|(&w, _)| w)
            .sum();
        if !(total > 0.0) {
            return Err(Error::Config("active feature weights sum to zero".into()));
        }
        self.term_weights = self
            .weights
            .iter()
            .zip(&self.active)
            .map(|(&w, &a)| match (a, self.p == 0.0) {
                (false, _) => 0.0,
                (true, true) => w / total,
                (true, false) => w,
            })
            .collect();
        Ok(())
    }

    /// Copy of this config with `feature` removed from the metric.
    ///
    /// Masking the last active feature is allowed: the empty metric puts
    /// every pair of cases at distance 1, so neighbor order falls back to
    /// case ids.
    pub fn without_feature(&self, feature: usize) -> Result<Self> {
        if feature >= self.rules.len() {
            return Err(Error::Config(format!("feature index {feature} out of range")));
        }
        let mut cfg = self.clone();
        cfg.active[feature] = false;
        let remaining: f64 = cfg.weights.iter().zip(&cfg.active).filter(|(_, &a)| a).map(|(&w, _)| w).sum();
        if remaining == 0.0 {
            // only zero-weight features left: nothing distinguishes cases
            cfg.active.iter_mut().for_each(|a| *a = false);
        }
        cfg.derive()?;
        Ok(cfg)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n_features(&self) -> usize {
        self.rules.len()
    }

    /// Number of features taking part in the metric (`|Ξ|`).
    pub fn n_active(&self) -> usize {
        self.n_active
    }

    pub fn is_active(&self, feature: usize) -> bool {
        self.active[feature]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights as they enter the metric: masked features zeroed and, for
    /// `p = 0`, normalized over the active features.
    pub fn effective_weights(&self) -> &[f64] {
        &self.term_weights
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn floors(&self) -> &[f64] {
        &self.floors
    }

    /// Residuals clamped to their floors; these are the LK scales.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn rules(&self) -> &[DifferenceRule] {
        &self.rules
    }

    /// p-norm of the scale vector over active features, used as `1/λ` when
    /// turning distance contributions into surprisal. `p = 0` uses the 1-norm.
    pub fn residual_norm(&self) -> f64 {
        let q = if self.p == 0.0 { 1.0 } else { self.p };
        let sum: f64 = self
            .scales
            .iter()
            .zip(&self.active)
            .filter(|(_, &a)| a)
            .map(|(&s, _)| s.powf(q))
            .sum();
        sum.powf(1.0 / q)
    }

    /// Combined distance between two encoded rows. Arity is only
    /// debug-checked; use [`combined_distance`] at API boundaries.
    #[inline]
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.rules.len());
        debug_assert_eq!(y.len(), self.rules.len());
        if self.n_active == 0 {
            return 1.0;
        }
        let terms = self
            .rules
            .iter()
            .zip(&self.active)
            .zip(&self.term_weights)
            .zip(&self.scales)
            .zip(x.iter().zip(y))
            .filter(|((((_, &a), _), _), _)| a);
        if self.p == 0.0 {
            // weighted geometric mean, accumulated in log space
            let log_sum: f64 = terms
                .map(|((((rule, _), &w), &b), (&xi, &yi))| w * lk_term(rule.apply(xi, yi), b).ln())
                .sum();
            (log_sum / self.n_active as f64).exp()
        } else {
            let sum: f64 = terms
                .map(|((((rule, _), &w), &b), (&xi, &yi))| w * lk_term(rule.apply(xi, yi), b).powf(self.p))
                .sum();
            sum.powf(1.0 / self.p)
        }
    }
}

/// Combined metric over two encoded rows with arity checking.
pub fn combined_distance(x: &[f64], y: &[f64], cfg: &DistanceConfig) -> Result<f64> {
    let n = cfg.n_features();
    if x.len() != n || y.len() != n {
        return Err(Error::Domain(format!(
            "row arity mismatch: metric has {n} features, rows have {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(cfg.distance(x, y))
}
