use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::distance::DistanceConfig;
use crate::error::{Error, Result};

/// What a neighbor set was computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QueryRef {
    /// A stored case, excluded from its own neighbors.
    Case(usize),
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: usize,
    pub distance: f64,
}

impl Neighbor {
    /// Ascending distance, ties by ascending id.
    fn order(&self, other: &Self) -> Ordering {
        self.distance.total_cmp(&other.distance).then(self.id.cmp(&other.id))
    }
}

/// The `k` nearest cases to a query, nearest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborSet {
    pub query: QueryRef,
    pub entries: Vec<Neighbor>,
    /// Requested neighbor count; `entries` may be shorter when fewer cases
    /// are available.
    pub k: usize,
}

impl NeighborSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|n| n.id)
    }

    pub fn distances(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|n| n.distance)
    }
}

/// Exact k-nearest-neighbor search by full scan.
///
/// `exclude` removes one case id from the candidates (leave-one-out). Asking
/// for more neighbors than remain returns all of them.
pub fn knn_query(
    dataset: &Dataset,
    query: &[f64],
    k: usize,
    metric: &DistanceConfig,
    exclude: Option<usize>,
) -> Result<NeighborSet> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if dataset.is_empty() {
        return Err(Error::InsufficientData { what: "neighbor search", required: 1, available: 0 });
    }
    if query.len() != dataset.n_features() || metric.n_features() != dataset.n_features() {
        return Err(Error::Domain(format!(
            "arity mismatch: dataset has {} features, query {}, metric {}",
            dataset.n_features(),
            query.len(),
            metric.n_features()
        )));
    }
    let mut all: Vec<Neighbor> = dataset
        .cases()
        .filter(|c| Some(c.id) != exclude)
        .map(|c| Neighbor { id: c.id, distance: metric.distance(query, c.values) })
        .collect();
    if k < all.len() {
        all.select_nth_unstable_by(k - 1, Neighbor::order);
        all.truncate(k);
    }
    all.sort_unstable_by(Neighbor::order);
    let query = match exclude {
        Some(id) => QueryRef::Case(id),
        None => QueryRef::External,
    };
    Ok(NeighborSet { query, entries: all, k })
}
