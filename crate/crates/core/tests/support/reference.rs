//! Brute-force reference implementations used as test oracles. Everything
//! here is written directly from the defining formulas, without sharing code
//! with the library.
#![allow(dead_code)]

use std::collections::BTreeMap;

use surprisal_core::data::{Dataset, FeatureKind};
use surprisal_core::residuals::CaseErrors;
use surprisal_core::DistanceConfig;

pub const CAP: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct RefMetric {
    pub p: f64,
    pub weights: Vec<f64>,
    pub scales: Vec<f64>,
    pub floors: Vec<f64>,
    pub nominal: Vec<bool>,
    pub active: Vec<bool>,
}

impl RefMetric {
    /// Reads only the raw inputs of `cfg` (p, weights, residuals, floors).
    pub fn of(dataset: &Dataset, cfg: &DistanceConfig) -> Self {
        RefMetric {
            p: cfg.p(),
            weights: cfg.weights().to_vec(),
            scales: cfg.residuals().iter().zip(cfg.floors()).map(|(&r, &f)| if r > f { r } else { f }).collect(),
            floors: cfg.floors().to_vec(),
            nominal: dataset.specs().iter().map(|s| matches!(s.kind, FeatureKind::Nominal(_))).collect(),
            active: vec![true; dataset.n_features()],
        }
    }

    pub fn masked(&self, feature: usize) -> Self {
        let mut m = self.clone();
        m.active[feature] = false;
        let left: f64 = (0..m.active.len()).filter(|&i| m.active[i]).map(|i| m.weights[i]).sum();
        if left == 0.0 {
            m.active = vec![false; m.active.len()];
        }
        m
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let idx: Vec<usize> = (0..x.len()).filter(|&i| self.active[i]).collect();
        if idx.is_empty() {
            return 1.0;
        }
        let term = |i: usize| {
            let mu = if self.nominal[i] {
                if x[i] == y[i] {
                    0.0
                } else {
                    1.0
                }
            } else {
                (x[i] - y[i]).abs()
            };
            lk(mu, self.scales[i])
        };
        if self.p == 0.0 {
            let total: f64 = idx.iter().map(|&i| self.weights[i]).sum();
            let mut prod = 1.0;
            for &i in &idx {
                prod *= term(i).powf(self.weights[i] / total);
            }
            prod.powf(1.0 / idx.len() as f64)
        } else {
            let mut sum = 0.0;
            for &i in &idx {
                sum += self.weights[i] * term(i).powf(self.p);
            }
            sum.powf(1.0 / self.p)
        }
    }

    pub fn residual_norm(&self) -> f64 {
        let q = if self.p == 0.0 { 1.0 } else { self.p };
        let mut s = 0.0;
        for i in 0..self.scales.len() {
            if self.active[i] {
                s += self.scales[i].powf(q);
            }
        }
        s.powf(1.0 / q)
    }
}

pub fn lk(mu: f64, b: f64) -> f64 {
    mu + 0.5 * (-mu / b).exp() * (3.0 * b + mu)
}

/// Every case sorted by (distance, id), then truncated to `k`.
pub fn knn(dataset: &Dataset, query: &[f64], k: usize, m: &RefMetric, exclude: Option<usize>) -> Vec<(usize, f64)> {
    let mut all = Vec::new();
    for id in 0..dataset.len() {
        if Some(id) != exclude {
            all.push((id, m.distance(query, dataset.row(id))));
        }
    }
    all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

pub fn harmonic(ds: &[(usize, f64)]) -> f64 {
    let mut inv = 0.0;
    for &(_, d) in ds {
        inv += 1.0 / d;
    }
    ds.len() as f64 / inv
}

pub fn case_phis(dataset: &Dataset, m: &RefMetric, k: usize) -> Vec<f64> {
    (0..dataset.len()).map(|id| harmonic(&knn(dataset, dataset.row(id), k, m, Some(id)))).collect()
}

/// KL divergence of `L` from `L_j` for every `j`, built element by element.
pub fn familiarity_divergences(phis: &[f64]) -> Vec<f64> {
    let n = phis.len();
    let total: f64 = phis.iter().sum();
    let l: Vec<f64> = phis.iter().map(|p| p / total).collect();
    (0..n)
        .map(|j| {
            let mut lj = l.clone();
            lj[j] = 1.0 / n as f64;
            let s: f64 = lj.iter().sum();
            lj.iter_mut().for_each(|v| *v /= s);
            let mut kl = 0.0;
            for i in 0..n {
                if l[i] > 0.0 {
                    kl += l[i] * (l[i] / lj[i]).ln();
                }
            }
            kl
        })
        .collect()
}

pub fn familiarity(phis: &[f64]) -> Vec<f64> {
    let d = familiarity_divergences(phis);
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    if mean <= 0.0 {
        return vec![1.0; d.len()];
    }
    d.iter().map(|&dj| if dj > 0.0 { (mean / dj).min(CAP) } else { CAP }).collect()
}

pub struct RefSimilarity {
    pub phi: f64,
    pub expected_phi: f64,
    pub pi_s: f64,
    pub surprisal: f64,
}

pub fn similarity(dataset: &Dataset, query: &[f64], exclude: Option<usize>, k: usize, m: &RefMetric) -> RefSimilarity {
    let nb = knn(dataset, query, k, m, exclude);
    let phi = harmonic(&nb);
    let mut e = 0.0;
    for &(id, _) in &nb {
        e += harmonic(&knn(dataset, dataset.row(id), k, m, Some(id)));
    }
    let expected_phi = e / nb.len() as f64;
    RefSimilarity { phi, expected_phi, pi_s: expected_phi / phi, surprisal: phi / m.residual_norm() }
}

pub fn residual_conviction(
    dataset: &Dataset,
    query: &[f64],
    feature: usize,
    prediction: f64,
    k: usize,
    m: &RefMetric,
    cache: &CaseErrors,
) -> f64 {
    let nb = knn(dataset, query, k, &m.masked(feature), None);
    let mut expected = 0.0;
    for &(id, _) in &nb {
        expected += cache.get(id, feature).unwrap_or(m.scales[feature]);
    }
    expected /= nb.len() as f64;
    let err = if m.nominal[feature] {
        if query[feature] == prediction {
            0.0
        } else {
            1.0
        }
    } else {
        (query[feature] - prediction).abs()
    };
    let denom = if err > m.floors[feature] { err } else { m.floors[feature] };
    (expected / denom).min(CAP)
}

/// Inverse-distance vote; returns (winning code, per-neighbor weights).
pub fn classify(dataset: &Dataset, query: &[f64], k: usize, m: &RefMetric) -> (f64, Vec<(usize, f64)>) {
    let t = dataset.target().unwrap();
    let nb = knn(dataset, query, k, &m.masked(t), None);
    let mut score: BTreeMap<i64, f64> = BTreeMap::new();
    for &(id, d) in &nb {
        *score.entry(dataset.row(id)[t] as i64).or_insert(0.0) += 1.0 / d;
    }
    let mut best: Option<(i64, f64)> = None;
    for (&c, &s) in &score {
        if best.map_or(true, |(_, bs)| s > bs) {
            best = Some((c, s));
        }
    }
    (best.unwrap().0 as f64, influences(&nb))
}

pub fn regress(dataset: &Dataset, query: &[f64], k: usize, m: &RefMetric) -> (f64, Vec<(usize, f64)>) {
    let t = dataset.target().unwrap();
    let nb = knn(dataset, query, k, &m.masked(t), None);
    let (mut num, mut den) = (0.0, 0.0);
    for &(id, d) in &nb {
        num += dataset.row(id)[t] / d;
        den += 1.0 / d;
    }
    (num / den, influences(&nb))
}

fn influences(nb: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let total: f64 = nb.iter().map(|&(_, d)| 1.0 / d).sum();
    nb.iter().map(|&(id, d)| (id, (1.0 / d) / total)).collect()
}

// ---- metrics ----

pub fn accuracy(t: &[u32], p: &[u32]) -> f64 {
    t.iter().zip(p).filter(|(a, b)| a == b).count() as f64 / t.len() as f64
}

fn classes_in(t: &[u32]) -> Vec<u32> {
    let mut c = t.to_vec();
    c.sort();
    c.dedup();
    c
}

pub fn macro_precision(t: &[u32], p: &[u32]) -> f64 {
    let classes = classes_in(t);
    let mut s = 0.0;
    for &c in &classes {
        let predicted = p.iter().filter(|&&x| x == c).count();
        let hit = t.iter().zip(p).filter(|&(&a, &b)| a == c && b == c).count();
        s += if predicted == 0 { 0.0 } else { hit as f64 / predicted as f64 };
    }
    s / classes.len() as f64
}

pub fn macro_recall(t: &[u32], p: &[u32]) -> f64 {
    let classes = classes_in(t);
    let mut s = 0.0;
    for &c in &classes {
        let actual = t.iter().filter(|&&x| x == c).count();
        let hit = t.iter().zip(p).filter(|&(&a, &b)| a == c && b == c).count();
        s += hit as f64 / actual as f64;
    }
    s / classes.len() as f64
}

/// Multiclass MCC as the correlation between one-hot truth and prediction
/// matrices.
pub fn mcc(t: &[u32], p: &[u32]) -> f64 {
    let mut classes: Vec<u32> = t.iter().chain(p).copied().collect();
    classes.sort();
    classes.dedup();
    let n = t.len() as f64;
    let (mut cxy, mut cxx, mut cyy) = (0.0, 0.0, 0.0);
    for &c in &classes {
        let mx = t.iter().filter(|&&v| v == c).count() as f64 / n;
        let my = p.iter().filter(|&&v| v == c).count() as f64 / n;
        for (&a, &b) in t.iter().zip(p) {
            let x = if a == c { 1.0 } else { 0.0 } - mx;
            let y = if b == c { 1.0 } else { 0.0 } - my;
            cxy += x * y;
            cxx += x * x;
            cyy += y * y;
        }
    }
    if cxx == 0.0 || cyy == 0.0 {
        0.0
    } else {
        cxy / (cxx * cyy).sqrt()
    }
}

pub fn r2(t: &[f64], p: &[f64]) -> Option<f64> {
    let mean = t.iter().sum::<f64>() / t.len() as f64;
    let tot: f64 = t.iter().map(|v| (v - mean).powi(2)).sum();
    let res: f64 = t.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum();
    if tot == 0.0 {
        None
    } else {
        Some(1.0 - res / tot)
    }
}

pub fn mae(t: &[f64], p: &[f64]) -> f64 {
    t.iter().zip(p).map(|(a, b)| (a - b).abs()).sum::<f64>() / t.len() as f64
}

pub fn mse(t: &[f64], p: &[f64]) -> f64 {
    t.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / t.len() as f64
}

/// Rank by counting: 1 + #smaller + (#equal − 1)/2.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let less = v.iter().filter(|&&y| y < x).count() as f64;
            let eq = v.iter().filter(|&&y| y == x).count() as f64;
            1.0 + less + (eq - 1.0) / 2.0
        })
        .collect()
}

pub fn spearman(t: &[f64], p: &[f64]) -> Option<f64> {
    let (a, b) = (ranks(t), ranks(p));
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        None
    } else {
        Some(cov / (va * vb).sqrt())
    }
}

pub fn f1(t: &[bool], p: &[bool]) -> f64 {
    let tp = t.iter().zip(p).filter(|&(&a, &b)| a && b).count() as f64;
    let fp = t.iter().zip(p).filter(|&(&a, &b)| !a && b).count() as f64;
    let fn_ = t.iter().zip(p).filter(|&(&a, &b)| a && !b).count() as f64;
    if tp == 0.0 {
        0.0
    } else {
        2.0 * tp / (2.0 * tp + fp + fn_)
    }
}
