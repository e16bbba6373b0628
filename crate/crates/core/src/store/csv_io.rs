//! CSV ingestion. The column layout is fixed: `id`, `f0..f{d-1}`, optional
//! trailing `score`. UTF-8, comma separator, `.` decimal point, header
//! required. Row numbers in errors are 1-based file lines (header = line 1).

use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};
use crate::store::FeatureSet;

pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<FeatureSet> {
    let file = File::open(path.as_ref())?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);

    let headers = reader.headers().map_err(|e| Error::Csv {
        row: 1,
        msg: format!("unreadable header: {e}"),
    })?;
    let (dim, has_scores) = parse_header(headers)?;
    let expected_fields = 1 + dim + usize::from(has_scores);

    let mut ids = Vec::new();
    let mut seen = std::collections::HashMap::new();
    let mut data = Vec::new();
    let mut scores = if has_scores { Some(Vec::new()) } else { None };

    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Csv {
            row: line,
            msg: format!("unreadable record: {e}"),
        })?;
        if record.len() != expected_fields {
            return Err(Error::Csv {
                row: line,
                msg: format!("expected {expected_fields} fields, got {}", record.len()),
            });
        }
        let id = record.get(0).unwrap_or("");
        if id.is_empty() {
            return Err(Error::Csv {
                row: line,
                msg: "missing id".into(),
            });
        }
        if let Some(&prev_line) = seen.get(id) {
            return Err(Error::DuplicateId {
                id: id.to_string(),
                first_row: prev_line,
                second_row: line,
            });
        }
        seen.insert(id.to_string(), line);
        ids.push(id.to_string());
        for col in 0..dim {
            let cell = record.get(col + 1).unwrap();
            let value: f64 = cell.parse().map_err(|_| Error::Csv {
                row: line,
                msg: format!("non-numeric value {cell:?} in column f{col}"),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFinite { row: line, col });
            }
            data.push(value);
        }
        if let Some(scores) = scores.as_mut() {
            let cell = record.get(dim + 1).unwrap();
            let value: f64 = cell.parse().map_err(|_| Error::Csv {
                row: line,
                msg: format!("non-numeric score {cell:?}"),
            })?;
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ScoreOutOfRange { row: line, value });
            }
            scores.push(value);
        }
    }

    FeatureSet::new(ids, dim, data, scores)
}

/// Validates the fixed header layout and returns (dim, has_scores).
fn parse_header(headers: &csv::StringRecord) -> Result<(usize, bool)> {
    let cols: Vec<&str> = headers.iter().collect();
    if cols.first() != Some(&"id") {
        return Err(Error::Csv {
            row: 1,
            msg: format!("first column must be \"id\", got {:?}", cols.first().unwrap_or(&"")),
        });
    }
    let has_scores = cols.last() == Some(&"score");
    let feature_cols = &cols[1..cols.len() - usize::from(has_scores)];
    if feature_cols.is_empty() {
        return Err(Error::EmptyDimension);
    }
    for (i, col) in feature_cols.iter().enumerate() {
        let expected = format!("f{i}");
        if *col != expected {
            return Err(Error::Csv {
                row: 1,
                msg: format!("expected column {expected:?}, got {col:?}"),
            });
        }
    }
    Ok((feature_cols.len(), has_scores))
}
