use std::path::Path;

use ndarray::Array2;

use super::Dataset;
use crate::error::{Result, ShapError};

/// Load a headed numeric CSV. When `label_column` is given, that column is
/// split out as the label vector. Data rows are numbered from 1 in errors.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| ShapError::Data(format!("cannot open {}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| ShapError::Data(format!("cannot read header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let label_idx = match label_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| ShapError::Data(format!("label column '{name}' not found in header")))?,
        ),
        None => None,
    };

    let width = header.len();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut n = 0usize;
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| ShapError::Data(format!("row {row}: {e}")))?;
        if rec.len() != width {
            return Err(ShapError::Data(format!(
                "row {row} has {} fields, header has {width}",
                rec.len()
            )));
        }
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                ShapError::Data(format!("non-numeric value '{cell}' at row {row}, column {}", header[j]))
            })?;
            if Some(j) == label_idx {
                labels.push(v);
            } else {
                values.push(v);
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(ShapError::Data(format!("{} has no data rows", path.display())));
    }
    let m = width - usize::from(label_idx.is_some());
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != label_idx)
        .map(|(_, h)| h.clone())
        .collect();
    let features = Array2::from_shape_vec((n, m), values).expect("row widths checked");
    Ok(Dataset::new(features, Some(names), label_idx.map(|_| labels))?
        .with_provenance(format!("csv:{}", path.display())))
}

/// Write a dataset with its labels (if any) as the last column `label_name`.
pub fn save_csv(data: &Dataset, path: impl AsRef<Path>, label_name: &str) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())
        .map_err(|e| ShapError::Data(format!("cannot create {}: {e}", path.as_ref().display())))?;
    let mut header: Vec<&str> = data.names().iter().map(String::as_str).collect();
    if data.labels().is_some() {
        header.push(label_name);
    }
    let map = |e: csv::Error| ShapError::Data(e.to_string());
    w.write_record(&header).map_err(map)?;
    for (i, r) in data.features().rows().into_iter().enumerate() {
        let mut rec: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
        if let Some(l) = data.labels() {
            rec.push(format!("{:?}", l[i]));
        }
        w.write_record(&rec).map_err(map)?;
    }
    w.flush()?;
    Ok(())
}
