//! Seeded generators for random test instances and synthetic benchmarks.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use surprisal_core::data::{Dataset, FeatureKind, FeatureSpec};
use surprisal_core::DistanceConfig;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetKind {
    None,
    Nominal,
    Continuous,
}

fn random_kind(rng: &mut ChaCha8Rng) -> FeatureKind {
    match rng.random_range(0..6) {
        0 => FeatureKind::nominal(["a", "b", "c"]).unwrap(),
        1 => FeatureKind::ordinal(["lo", "mid", "hi"]).unwrap(),
        _ => FeatureKind::Continuous,
    }
}

fn random_code(rng: &mut ChaCha8Rng, kind: &FeatureKind, coarse: bool) -> f64 {
    match kind {
        FeatureKind::Continuous if coarse => rng.random_range(0..4) as f64,
        FeatureKind::Continuous => normal(rng) * 3.0,
        FeatureKind::Nominal(c) | FeatureKind::Ordinal(c) => rng.random_range(0..c.len()) as f64,
    }
}

/// Random mixed-kind dataset. Coarse instances draw continuous values from a
/// small integer grid so that distance ties are common. The target, if any,
/// is the last feature.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, n_features: usize, target: TargetKind) -> Dataset {
    let coarse = rng.random_bool(0.3);
    let mut specs: Vec<FeatureSpec> = (0..n_features).map(|i| FeatureSpec::new(format!("f{i}"), random_kind(rng))).collect();
    let target_idx = match target {
        TargetKind::None => None,
        TargetKind::Nominal => {
            specs[n_features - 1] = FeatureSpec::new("y", FeatureKind::nominal(["a", "b", "c"]).unwrap());
            Some(n_features - 1)
        }
        TargetKind::Continuous => {
            specs[n_features - 1] = FeatureSpec::continuous("y");
            Some(n_features - 1)
        }
    };
    let mut values = Vec::with_capacity(n * n_features);
    for _ in 0..n {
        for s in &specs {
            values.push(random_code(rng, &s.kind, coarse));
        }
    }
    Dataset::from_encoded(specs, values, target_idx).unwrap()
}

pub fn random_query(rng: &mut ChaCha8Rng, dataset: &Dataset) -> Vec<f64> {
    let coarse = rng.random_bool(0.3);
    dataset.specs().iter().map(|s| random_code(rng, &s.kind, coarse)).collect()
}

/// Random metric inputs: p from a small set, positive weights, residuals
/// that may be zero (so floors matter).
pub fn random_metric(rng: &mut ChaCha8Rng, dataset: &Dataset) -> DistanceConfig {
    let n = dataset.n_features();
    let p = [0.0, 0.0, 0.5, 1.0, 2.0][rng.random_range(0..5)];
    let weights = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
    let residuals = (0..n).map(|_| if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.05..2.0) }).collect();
    let floors = (0..n).map(|_| 1e-6).collect();
    DistanceConfig::new(dataset.specs(), p, weights, residuals, floors).unwrap()
}

pub fn continuous_dataset(rows: &[Vec<f64>]) -> Dataset {
    let n = rows[0].len();
    let specs = (0..n).map(|i| FeatureSpec::continuous(format!("x{i}"))).collect();
    Dataset::from_encoded(specs, rows.concat(), None).unwrap()
}

pub fn gaussian_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| normal(rng)).collect()).collect()
}

pub fn grid(side: usize) -> Vec<Vec<f64>> {
    let mut rows = Vec::new();
    for i in 0..side {
        for j in 0..side {
            rows.push(vec![i as f64, j as f64]);
        }
    }
    rows
}

/// 200×3: two noisy copies of a latent signal plus one pure-noise column.
pub fn informative_noise(seed: u64, n: usize) -> Dataset {
    let mut r = rng(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let t = normal(&mut r);
            vec![t + 0.1 * normal(&mut r), 2.0 * t + 0.1 * normal(&mut r), normal(&mut r)]
        })
        .collect();
    continuous_dataset(&rows)
}

/// Point uniformly distributed in a spherical shell of radii `[r0, r1]`.
pub fn shell_point(rng: &mut ChaCha8Rng, dim: usize, r0: f64, r1: f64) -> Vec<f64> {
    let dir: Vec<f64> = (0..dim).map(|_| normal(rng)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let u: f64 = rng.random();
    let d = dim as i32;
    let radius = (r0.powi(d) + u * (r1.powi(d) - r0.powi(d))).powf(1.0 / dim as f64);
    dir.iter().map(|v| v / norm * radius).collect()
}
