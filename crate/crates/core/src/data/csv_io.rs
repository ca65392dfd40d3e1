use std::collections::BTreeSet;
use std::fs::File;
use std::path::Path;

use super::{Column, Dataset, FeatureKind};
use crate::{Error, Result};

/// Load a headed CSV file. Columns whose non-empty cells all parse as numbers become
/// numeric features, everything else is categorical. Empty cells are missing.
pub fn load_csv(path: impl AsRef<Path>, target_name: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let target_col = headers
        .iter()
        .position(|h| h == target_name)
        .ok_or_else(|| Error::MissingTargetColumn(target_name.to_string()))?;

    let mut cells: Vec<Vec<Option<String>>> = vec![Vec::new(); headers.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::RaggedRow {
                row: row + 1,
                expected: headers.len(),
                found: record.len(),
            });
        }
        for (j, field) in record.iter().enumerate() {
            cells[j].push(if field.is_empty() {
                None
            } else {
                Some(field.to_string())
            });
        }
    }
    if cells[target_col].is_empty() {
        return Err(Error::EmptyDataset);
    }

    let raw_target = std::mem::take(&mut cells[target_col]);
    let (target, labels) = encode_target(&raw_target)?;

    let mut names = Vec::new();
    let mut kinds = Vec::new();
    let mut columns = Vec::new();
    for (j, col) in cells.into_iter().enumerate() {
        if j == target_col {
            continue;
        }
        names.push(headers[j].clone());
        match parse_numeric(&col) {
            Some(values) => {
                kinds.push(FeatureKind::Numeric);
                columns.push(Column::Numeric(values));
            }
            None => {
                kinds.push(FeatureKind::Categorical);
                columns.push(Column::Text(col));
            }
        }
    }
    Ok(Dataset::new(names, kinds, columns, target)?.with_target_name(target_name, labels))
}

fn parse_numeric(col: &[Option<String>]) -> Option<Vec<f64>> {
    col.iter()
        .map(|cell| match cell {
            None => Some(f64::NAN),
            Some(s) => s.parse::<f64>().ok().filter(|v| v.is_finite()),
        })
        .collect()
}

/// Map the two distinct target values to 0/1: numeric order when both parse,
/// lexicographic otherwise.
fn encode_target(raw: &[Option<String>]) -> Result<(Vec<u8>, [String; 2])> {
    let mut distinct = BTreeSet::new();
    for (row, cell) in raw.iter().enumerate() {
        match cell {
            Some(v) => {
                distinct.insert(v.as_str());
            }
            None => return Err(Error::MissingTargetValue(row + 1)),
        }
    }
    match distinct.len() {
        1 => return Err(Error::SingleClassTarget),
        2 => {}
        k => return Err(Error::NonBinaryTarget(k)),
    }
    let mut levels: Vec<&str> = distinct.into_iter().collect();
    if let (Ok(a), Ok(b)) = (levels[0].parse::<f64>(), levels[1].parse::<f64>()) {
        if b < a {
            levels.swap(0, 1);
        }
    }
    let target = raw
        .iter()
        .map(|c| u8::from(c.as_deref() == Some(levels[1])))
        .collect();
    Ok((target, [levels[0].to_string(), levels[1].to_string()]))
}

/// Write an encoded (all-numeric) dataset back to CSV with the target as last column.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    let mut header: Vec<&str> = ds.feature_names().iter().map(String::as_str).collect();
    header.push(ds.target_name());
    writer.write_record(&header)?;
    let columns: Vec<&Column> = (0..ds.n_features()).map(|j| ds.column(j)).collect();
    let mut record = Vec::with_capacity(header.len());
    for row in 0..ds.n_rows() {
        record.clear();
        for col in &columns {
            record.push(match col {
                Column::Numeric(v) if v[row].is_nan() => String::new(),
                Column::Numeric(v) => format!("{}", v[row]),
                Column::Text(v) => v[row].clone().unwrap_or_default(),
            });
        }
        record.push(ds.target_labels()[ds.target()[row] as usize].clone());
        writer.write_record(&record)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
