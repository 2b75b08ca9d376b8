//! CSV ingestion against a [`Schema`].

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::schema::{KindName, Schema};
use super::{Dataset, FeatureKind, FeatureSpec, Value};
use crate::error::{Error, Result};

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader)
}

fn csv_error(err: csv::Error, fallback_row: usize) -> Error {
    let row = err
        .position()
        .map(|p| p.record() as usize)
        .unwrap_or(fallback_row);
    Error::Parse { row, column: String::new(), message: err.to_string() }
}

/// Read every record as strings, rejecting empty cells.
fn read_records<R: Read>(rdr: &mut csv::Reader<R>, headers: &[String]) -> Result<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row_no = i + 1;
        let rec = rec.map_err(|e| csv_error(e, row_no))?;
        let mut row = Vec::with_capacity(rec.len());
        for (j, cell) in rec.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::Parse {
                    row: row_no,
                    column: headers[j].clone(),
                    message: "missing value".into(),
                });
            }
            row.push(cell.to_string());
        }
        rows.push(row);
    }
    Ok(rows)
}

fn read_headers<R: Read>(rdr: &mut csv::Reader<R>) -> Result<Vec<String>> {
    let headers = rdr.headers().map_err(|e| csv_error(e, 0))?;
    if headers.is_empty() {
        return Err(Error::Parse { row: 0, column: String::new(), message: "CSV has no header row".into() });
    }
    Ok(headers.iter().map(str::to_string).collect())
}

fn encode_cell(spec: &FeatureSpec, cell: &str, row: usize) -> Result<f64> {
    match &spec.kind {
        FeatureKind::Continuous => match cell.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(Error::Parse {
                row,
                column: spec.name.clone(),
                message: format!("expected a finite number, found '{cell}'"),
            }),
        },
        _ => spec
            .encode(&Value::Token(cell.to_string()))
            .map_err(|e| Error::Schema(format!("row {row}, column '{}': {e}", spec.name))),
    }
}

/// Load a CSV file as a [`Dataset`].
pub fn load_dataset(csv_path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    read_dataset(open(csv_path.as_ref())?, schema)
}

/// Like [`load_dataset`] but from any reader.
pub fn read_dataset<R: Read>(reader: R, schema: &Schema) -> Result<Dataset> {
    let mut rdr = csv_reader(reader);
    let headers = read_headers(&mut rdr)?;
    for h in &headers {
        if !schema.columns.contains_key(h) {
            return Err(Error::Schema(format!("CSV column '{h}' is not declared in the schema")));
        }
    }
    for name in schema.columns.keys() {
        if !headers.contains(name) {
            return Err(Error::Schema(format!("schema column '{name}' is missing from the CSV header")));
        }
    }
    let rows = read_records(&mut rdr, &headers)?;

    let mut specs = Vec::with_capacity(headers.len());
    let mut target = None;
    for (j, name) in headers.iter().enumerate() {
        let col = &schema.columns[name];
        let kind = match (col.kind, &col.categories) {
            (KindName::Continuous, _) => FeatureKind::Continuous,
            (KindName::Ordinal, Some(c)) => FeatureKind::ordinal(c.iter().cloned())
                .map_err(|e| Error::Schema(format!("column '{name}': {e}")))?,
            (KindName::Ordinal, None) => unreachable!("validated by Schema"),
            (KindName::Nominal, Some(c)) => FeatureKind::nominal(c.iter().cloned())
                .map_err(|e| Error::Schema(format!("column '{name}': {e}")))?,
            (KindName::Nominal, None) => {
                let seen: BTreeSet<&str> = rows.iter().map(|r| r[j].as_str()).collect();
                if seen.is_empty() {
                    return Err(Error::Schema(format!(
                        "nominal column '{name}' has no declared categories and no data to infer them from"
                    )));
                }
                FeatureKind::nominal(seen)?
            }
        };
        if col.target {
            target = Some(j);
        }
        specs.push(FeatureSpec::new(name.clone(), kind));
    }

    let mut values = Vec::with_capacity(rows.len() * specs.len());
    for (i, row) in rows.iter().enumerate() {
        for (spec, cell) in specs.iter().zip(row) {
            values.push(encode_cell(spec, cell, i + 1)?);
        }
    }
    Dataset::from_encoded(specs, values, target)
}

/// Query rows encoded against a fitted dataset's feature specs.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryTable {
    /// Encoded rows in dataset feature order; the target slot holds NaN when
    /// the file has no target column.
    pub rows: Vec<Vec<f64>>,
    /// Whether the file carried the target column.
    pub has_target: bool,
    /// Raw cells of the extra (truth) column, when one was requested.
    pub extra: Option<Vec<String>>,
}

/// Load query rows for `dataset` from a CSV file.
///
/// Columns are matched by name. Every non-target feature must be present,
/// the target column is optional, and `extra_column` names one additional
/// column (for example ground-truth anomaly flags) that is passed through
/// unparsed. Any other column is an error.
pub fn load_queries(csv_path: impl AsRef<Path>, dataset: &Dataset, extra_column: Option<&str>) -> Result<QueryTable> {
    read_queries(open(csv_path.as_ref())?, dataset, extra_column)
}

pub fn read_queries<R: Read>(reader: R, dataset: &Dataset, extra_column: Option<&str>) -> Result<QueryTable> {
    let mut rdr = csv_reader(reader);
    let headers = read_headers(&mut rdr)?;
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h.as_str(), i)).collect();
    for h in &headers {
        if dataset.feature_index(h).is_none() && Some(h.as_str()) != extra_column {
            return Err(Error::Schema(format!("query column '{h}' is not a feature of the dataset")));
        }
    }
    let mut positions = Vec::with_capacity(dataset.n_features());
    for (f, spec) in dataset.specs().iter().enumerate() {
        match index.get(spec.name.as_str()) {
            Some(&j) => positions.push(Some(j)),
            None if Some(f) == dataset.target() => positions.push(None),
            None => return Err(Error::Schema(format!("query file is missing feature column '{}'", spec.name))),
        }
    }
    let extra_pos = match extra_column {
        Some(name) => Some(
            *index
                .get(name)
                .ok_or_else(|| Error::Schema(format!("query file has no column '{name}'")))?,
        ),
        None => None,
    };
    let has_target = dataset.target().is_some_and(|t| positions[t].is_some());

    let records = read_records(&mut rdr, &headers)?;
    let mut rows = Vec::with_capacity(records.len());
    let mut extra = extra_pos.map(|_| Vec::with_capacity(records.len()));
    for (i, rec) in records.iter().enumerate() {
        let row = dataset
            .specs()
            .iter()
            .zip(&positions)
            .map(|(spec, pos)| match pos {
                Some(j) => encode_cell(spec, &rec[*j], i + 1),
                None => Ok(f64::NAN),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
        if let (Some(j), Some(out)) = (extra_pos, extra.as_mut()) {
            out.push(rec[j].clone());
        }
    }
    Ok(QueryTable { rows, has_target, extra })
}
