//! Observation files: one or more decimal numbers per line, `#` comments,
//! blank lines ignored.

use std::path::Path;

use rgbiw::inference::Dataset;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("line {line}: cannot parse `{token}` as a number")]
    Parse { line: usize, token: String },

    #[error("no observations found")]
    Empty,

    #[error("line {line}: observation {value} is not strictly positive")]
    Nonpositive { line: usize, value: f64 },

    #[error("scale must be finite and strictly positive, got {0}")]
    InvalidScale(f64),
}

/// Reads `path` and divides every value by `scale` before validation.
pub fn load_dataset(path: &Path, scale: Option<f64>) -> Result<Dataset, DataError> {
    let text = std::fs::read_to_string(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let label = path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    );
    parse_dataset(&text, scale, &label)
}

pub fn parse_dataset(text: &str, scale: Option<f64>, label: &str) -> Result<Dataset, DataError> {
    let divisor = match scale {
        Some(s) if !(s > 0.0 && s.is_finite()) => return Err(DataError::InvalidScale(s)),
        Some(s) => s,
        None => 1.0,
    };
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        for token in body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
        {
            let raw: f64 = token.parse().map_err(|_| DataError::Parse {
                line: line_no,
                token: token.to_string(),
            })?;
            let value = raw / divisor;
            if !(value > 0.0 && value.is_finite()) {
                return Err(DataError::Nonpositive {
                    line: line_no,
                    value: raw,
                });
            }
            values.push(value);
        }
    }
    if values.is_empty() {
        return Err(DataError::Empty);
    }
    let note = match scale {
        Some(s) => format!("divided by {s}"),
        None => "as read".to_string(),
    };
    Dataset::new(values, label, &note).map_err(|_| DataError::Empty)
}
