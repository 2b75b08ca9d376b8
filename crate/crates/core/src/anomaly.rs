//! Conviction-thresholded anomaly detection.

use serde::{Deserialize, Serialize};

use crate::conviction::{case_phis, similarity_conviction_with_phis, FamiliarityIndex};
use crate::data::Dataset;
use crate::distance::DistanceConfig;
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionMode {
    /// Similarity conviction against a model trained on inliers only.
    Similarity,
    /// Familiarity conviction of the query inserted into the model.
    Familiarity,
}

impl std::str::FromStr for DetectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "similarity" => Ok(DetectionMode::Similarity),
            "familiarity" => Ok(DetectionMode::Familiarity),
            other => Err(Error::Config(format!("unknown detection mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalyVerdict {
    pub score: f64,
    pub mode: DetectionMode,
    pub is_anomaly: bool,
    pub threshold: f64,
}

impl AnomalyVerdict {
    pub fn new(score: f64, mode: DetectionMode, threshold: f64) -> Self {
        AnomalyVerdict { score, mode, is_anomaly: score < threshold, threshold }
    }
}

/// Scores many queries against one model, computing the per-case state
/// once. Never mutates the dataset.
#[derive(Debug, Clone)]
pub struct Detector<'a> {
    dataset: &'a Dataset,
    cfg: &'a DistanceConfig,
    k: usize,
    mode: DetectionMode,
    threshold: f64,
    phis: Vec<f64>,
    familiarity: Option<FamiliarityIndex>,
}

impl<'a> Detector<'a> {
    pub fn new(dataset: &'a Dataset, cfg: &'a DistanceConfig, k: usize, mode: DetectionMode, threshold: f64) -> Result<Self> {
        if !threshold.is_finite() {
            return Err(Error::Config(format!("threshold must be finite, got {threshold}")));
        }
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        let (phis, familiarity) = match mode {
            DetectionMode::Similarity => {
                if dataset.len() < k + 1 {
                    return Err(Error::InsufficientData {
                        what: "similarity detection",
                        required: k + 1,
                        available: dataset.len(),
                    });
                }
                (case_phis(dataset, cfg, k)?, None)
            }
            DetectionMode::Familiarity => {
                let index = FamiliarityIndex::build(dataset, cfg, k)?;
                (index.phis().to_vec(), Some(index))
            }
        };
        Ok(Detector { dataset, cfg, k, mode, threshold, phis, familiarity })
    }

    pub fn score(&self, query: &[f64]) -> Result<f64> {
        if query.len() != self.dataset.n_features() {
            return Err(Error::Domain(format!(
                "query has {} values, dataset has {} features",
                query.len(),
                self.dataset.n_features()
            )));
        }
        match &self.familiarity {
            None => Ok(similarity_conviction_with_phis(self.dataset, query, self.k, self.cfg, &self.phis)?.pi_s),
            Some(index) => index.query_conviction(self.dataset, query, self.cfg),
        }
    }

    pub fn detect(&self, query: &[f64]) -> Result<AnomalyVerdict> {
        Ok(AnomalyVerdict::new(self.score(query)?, self.mode, self.threshold))
    }
}

/// Flag `query` as anomalous when its conviction falls below `threshold`.
pub fn detect(
    dataset: &Dataset,
    query: &[f64],
    mode: DetectionMode,
    threshold: f64,
    k: usize,
    cfg: &DistanceConfig,
) -> Result<AnomalyVerdict> {
    Detector::new(dataset, cfg, k, mode, threshold)?.detect(query)
}
