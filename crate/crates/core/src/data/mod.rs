//! Typed tabular data, schema handling and brute-force neighbor search.
//!
//! Values are stored encoded as `f64`: continuous features hold the reading
//! itself, nominal features hold the index of the token in the feature's
//! lexicographically sorted category list, and ordinal features hold the
//! rank of the token in its declared order. Encoding once at load time
//! keeps the metric free of string handling.

mod loader;
mod neighbors;
mod schema;

pub use loader::{load_dataset, load_queries, read_dataset, read_queries, QueryTable};
pub use neighbors::{knn_query, Neighbor, NeighborSet, QueryRef};
pub use schema::{ColumnSchema, KindName, Schema};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kind of a feature, with the category list for categorical kinds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    Continuous,
    /// Unordered categories, kept sorted so that code order is token order.
    Nominal(Vec<String>),
    /// Categories in rank order.
    Ordinal(Vec<String>),
}

impl FeatureKind {
    pub fn nominal<I, S>(categories: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut cats: Vec<String> = categories.into_iter().map(Into::into).collect();
        check_categories(&cats)?;
        cats.sort();
        Ok(FeatureKind::Nominal(cats))
    }

    pub fn ordinal<I, S>(categories: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let cats: Vec<String> = categories.into_iter().map(Into::into).collect();
        check_categories(&cats)?;
        Ok(FeatureKind::Ordinal(cats))
    }

    pub fn categories(&self) -> Option<&[String]> {
        match self {
            FeatureKind::Continuous => None,
            FeatureKind::Nominal(c) | FeatureKind::Ordinal(c) => Some(c),
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, FeatureKind::Continuous)
    }

    pub fn is_categorical(&self) -> bool {
        !self.is_continuous()
    }
}

fn check_categories(cats: &[String]) -> Result<()> {
    if cats.is_empty() {
        return Err(Error::Schema("category list must not be empty".into()));
    }
    let mut seen = HashSet::new();
    for c in cats {
        if !seen.insert(c.as_str()) {
            return Err(Error::Schema(format!("duplicate category token '{c}'")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
}

impl FeatureSpec {
    pub fn continuous(name: impl Into<String>) -> Self {
        FeatureSpec { name: name.into(), kind: FeatureKind::Continuous }
    }

    pub fn new(name: impl Into<String>, kind: FeatureKind) -> Self {
        FeatureSpec { name: name.into(), kind }
    }

    /// Encode a raw value for this feature.
    pub fn encode(&self, value: &Value) -> Result<f64> {
        match (&self.kind, value) {
            (FeatureKind::Continuous, Value::Real(x)) => {
                if x.is_finite() {
                    Ok(*x)
                } else {
                    Err(Error::Domain(format!("feature '{}' got non-finite value {x}", self.name)))
                }
            }
            (FeatureKind::Continuous, Value::Token(t)) => t.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| {
                Error::Domain(format!("feature '{}' is continuous but got '{t}'", self.name))
            }),
            (kind, Value::Token(t)) => {
                let cats = kind.categories().expect("categorical kind");
                self.code_of(cats, t)
            }
            (_, Value::Real(x)) => {
                Err(Error::Domain(format!("feature '{}' is categorical but got real {x}", self.name)))
            }
        }
    }

    fn code_of(&self, cats: &[String], token: &str) -> Result<f64> {
        let pos = match &self.kind {
            FeatureKind::Nominal(_) => cats.binary_search_by(|c| c.as_str().cmp(token)).ok(),
            _ => cats.iter().position(|c| c == token),
        };
        pos.map(|i| i as f64).ok_or_else(|| {
            Error::Schema(format!("token '{token}' is not a declared category of feature '{}'", self.name))
        })
    }

    /// Check that an encoded value is legal for this feature.
    pub fn validate_code(&self, code: f64) -> Result<()> {
        match self.kind.categories() {
            None if code.is_finite() => Ok(()),
            None => Err(Error::Domain(format!("feature '{}' got non-finite value", self.name))),
            Some(cats) => {
                if code >= 0.0 && code.fract() == 0.0 && (code as usize) < cats.len() {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("code {code} is outside the categories of feature '{}'", self.name)))
                }
            }
        }
    }

    /// Human-readable form of an encoded value.
    pub fn decode(&self, code: f64) -> Value {
        match self.kind.categories() {
            None => Value::Real(code),
            Some(cats) => match cats.get(code as usize) {
                Some(t) if code >= 0.0 && code.fract() == 0.0 => Value::Token(t.clone()),
                _ => Value::Real(code),
            },
        }
    }
}

/// A raw, un-encoded cell value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Token(String),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(x)
    }
}

impl From<&str> for Value {
    fn from(t: &str) -> Self {
        Value::Token(t.to_string())
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Real(x) => write!(f, "{x}"),
            Value::Token(t) => f.write_str(t),
        }
    }
}

/// Borrowed view of one stored case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case<'a> {
    pub id: usize,
    pub values: &'a [f64],
}

/// Immutable case store. Case ids are the dense row indices `0..N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    specs: Vec<FeatureSpec>,
    values: Vec<f64>,
    n_cases: usize,
    target: Option<usize>,
}

impl Dataset {
    /// Build from raw rows, encoding and validating each cell.
    pub fn from_rows(specs: Vec<FeatureSpec>, rows: &[Vec<Value>], target: Option<usize>) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.len() * specs.len());
        for (row_idx, row) in rows.iter().enumerate() {
            if row.len() != specs.len() {
                return Err(Error::Schema(format!(
                    "row {} has {} values but the schema declares {} features",
                    row_idx + 1,
                    row.len(),
                    specs.len()
                )));
            }
            for (spec, v) in specs.iter().zip(row) {
                values.push(spec.encode(v)?);
            }
        }
        Self::from_encoded(specs, values, target)
    }

    /// Build from an already encoded row-major matrix.
    pub fn from_encoded(specs: Vec<FeatureSpec>, values: Vec<f64>, target: Option<usize>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Schema("dataset needs at least one feature".into()));
        }
        let mut names = HashSet::new();
        for s in &specs {
            if !names.insert(s.name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature name '{}'", s.name)));
            }
        }
        if let Some(t) = target {
            if t >= specs.len() {
                return Err(Error::Schema(format!("target index {t} out of range")));
            }
        }
        if values.len() % specs.len() != 0 {
            return Err(Error::Schema("encoded value count is not a multiple of the feature count".into()));
        }
        let n_cases = values.len() / specs.len();
        for (i, row) in values.chunks_exact(specs.len()).enumerate() {
            for (spec, &v) in specs.iter().zip(row) {
                spec.validate_code(v).map_err(|e| Error::Schema(format!("case {i}: {e}")))?;
            }
        }
        Ok(Dataset { specs, values, n_cases, target })
    }

    pub fn specs(&self) -> &[FeatureSpec] {
        &self.specs
    }

    pub fn n_features(&self) -> usize {
        self.specs.len()
    }

    pub fn len(&self) -> usize {
        self.n_cases
    }

    pub fn is_empty(&self) -> bool {
        self.n_cases == 0
    }

    pub fn target(&self) -> Option<usize> {
        self.target
    }

    pub fn row(&self, id: usize) -> &[f64] {
        let f = self.specs.len();
        &self.values[id * f..(id + 1) * f]
    }

    pub fn case(&self, id: usize) -> Case<'_> {
        Case { id, values: self.row(id) }
    }

    pub fn cases(&self) -> impl Iterator<Item = Case<'_>> {
        self.values.chunks_exact(self.specs.len()).enumerate().map(|(id, values)| Case { id, values })
    }

    /// All values of one feature in case order.
    pub fn column(&self, feature: usize) -> Vec<f64> {
        self.cases().map(|c| c.values[feature]).collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.name == name)
    }

    /// New dataset holding the given cases, renumbered densely in the given order.
    pub fn subset(&self, ids: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(ids.len() * self.specs.len());
        for &id in ids {
            values.extend_from_slice(self.row(id));
        }
        Dataset { specs: self.specs.clone(), values, n_cases: ids.len(), target: self.target }
    }

    /// Copy with one extra case appended; its id is the old `len()`.
    pub fn with_case(&self, row: &[f64]) -> Result<Dataset> {
        if row.len() != self.specs.len() {
            return Err(Error::Domain(format!(
                "case arity {} does not match {} features",
                row.len(),
                self.specs.len()
            )));
        }
        for (spec, &v) in self.specs.iter().zip(row) {
            spec.validate_code(v)?;
        }
        let mut values = self.values.clone();
        values.extend_from_slice(row);
        Ok(Dataset { specs: self.specs.clone(), values, n_cases: self.n_cases + 1, target: self.target })
    }

    /// Encode a query row. A `None` entry is only allowed for the target.
    pub fn encode_query(&self, values: &[Option<Value>]) -> Result<Vec<f64>> {
        if values.len() != self.specs.len() {
            return Err(Error::Domain(format!(
                "query has {} values but the dataset has {} features",
                values.len(),
                self.specs.len()
            )));
        }
        self.specs
            .iter()
            .zip(values)
            .enumerate()
            .map(|(i, (spec, v))| match v {
                Some(v) => spec.encode(v),
                None if Some(i) == self.target => Ok(f64::NAN),
                None => Err(Error::Domain(format!("query is missing a value for feature '{}'", spec.name))),
            })
            .collect()
    }
}
