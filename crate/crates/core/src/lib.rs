//! Nonparametric k-nearest-neighbor learning in surprisal space.
//!
//! Features are compared through the LK-Laplace expected distance, scaled by
//! per-feature leave-one-out residuals and combined with inverse residual
//! weights. On top of the same metric sit inverse-distance classifiers and
//! regressors, conviction measures (familiarity, similarity, residual) and a
//! conviction-thresholded anomaly detector.
//!
//! ```
//! use surprisal_core::data::{Dataset, FeatureSpec};
//! use surprisal_core::residuals::{fit_residuals_iterative, FitOptions};
//!
//! let specs = vec![FeatureSpec::continuous("x"), FeatureSpec::continuous("y")];
//! let values: Vec<f64> = (0..20).flat_map(|i| [i as f64, 2.0 * i as f64]).collect();
//! let data = Dataset::from_encoded(specs, values, None).unwrap();
//! let fit = fit_residuals_iterative(&data, &FitOptions::new(3)).unwrap();
//! let metric = fit.metric(&data, 0.0).unwrap();
//! assert!(metric.distance(data.row(0), data.row(1)) > 0.0);
//! ```

pub mod anomaly;
pub mod conviction;
pub mod data;
pub mod distance;
pub mod error;
pub mod learners;
pub mod metrics;
pub mod residuals;

pub use data::{Dataset, FeatureKind, FeatureSpec, Value};
pub use distance::DistanceConfig;
pub use error::{Error, Result};
