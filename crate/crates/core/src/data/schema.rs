//! Schema documents.
//!
//! A schema is a TOML file with one table per CSV column:
//!
//! ```toml
//! [columns.petal_length]
//! kind = "continuous"
//!
//! [columns.grade]
//! kind = "ordinal"
//! categories = ["low", "medium", "high"]   # rank order
//!
//! [columns.species]
//! kind = "nominal"
//! categories = ["setosa", "versicolor"]    # optional; inferred from data when absent
//! target = true
//! ```
//!
//! Column order comes from the CSV header, not from the schema.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Continuous,
    Nominal,
    Ordinal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSchema {
    pub kind: KindName,
    #[serde(default)]
    pub categories: Option<Vec<String>>,
    #[serde(default)]
    pub target: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schema {
    pub columns: BTreeMap<String, ColumnSchema>,
}

impl Schema {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        text.parse()
    }

    pub fn target(&self) -> Option<&str> {
        self.columns.iter().find(|(_, c)| c.target).map(|(n, _)| n.as_str())
    }

    fn validate(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(Error::Schema("schema declares no columns".into()));
        }
        let targets = self.columns.values().filter(|c| c.target).count();
        if targets > 1 {
            return Err(Error::Schema(format!("schema marks {targets} columns as target; at most one allowed")));
        }
        for (name, col) in &self.columns {
            match (col.kind, &col.categories) {
                (KindName::Ordinal, None) => {
                    return Err(Error::Schema(format!("ordinal column '{name}' must list its categories in rank order")))
                }
                (KindName::Continuous, Some(_)) => {
                    return Err(Error::Schema(format!("continuous column '{name}' cannot declare categories")))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Schema {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let schema: Schema = toml::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }
}
