use std::path::Path;

use bopi_core::llr::{encode_dataset, Dataset, RawTable};
use log::info;

use crate::error::{CliError, Result};

/// Reads a comma-separated file with a header row.
pub fn read_csv(path: &Path) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(CliError::Data(format!("{}: missing header row", path.display())));
    }
    let rows = rdr
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()
        .map_err(|e| csv_error(path, e))?;
    Ok(RawTable { headers, rows })
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Data(format!("{}: malformed CSV: {other:?}", path.display())),
    }
}

/// Reads and encodes `path`; `response` defaults to the last column.
pub fn load_dataset(path: &Path, response: Option<&str>) -> Result<Dataset> {
    let raw = read_csv(path)?;
    let response = match response {
        Some(r) => r.to_string(),
        None => raw.headers.last().cloned().expect("header checked nonempty"),
    };
    let (data, report) = encode_dataset(&raw, &response).map_err(|e| CliError::Data(e.to_string()))?;
    if report.dropped_rows > 0 {
        info!("dropped {} rows with missing values", report.dropped_rows);
    }
    if data.n_features() == 0 {
        return Err(CliError::Data(format!("{}: no usable feature columns", path.display())));
    }
    Ok(data)
}
