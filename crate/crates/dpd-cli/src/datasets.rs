//! Built-in example datasets and CSV ingestion.
//!
//! The four built-ins are the two classical examples every report in this
//! project exercises — telephone line-fault differences and Darwin's
//! paired plant heights — each in a full and an outlier-deleted variant.
//! CSV loading is deliberately strict: one numeric column, an optional
//! single header row (detected by a non-numeric first row), and hard
//! errors with row/column coordinates for anything that does not parse.

use std::fmt;
use std::io::{self, Write};
use std::path::Path;

use dpd_core::divergence::Dataset;

/// A named, immutable vector of observations with its provenance line.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedDataset {
    /// Identifier used on the command line and in reports.
    pub name: String,
    /// Observations in original order.
    pub values: Vec<f64>,
    /// One-line citation of where the numbers come from.
    pub source: String,
}

impl NamedDataset {
    /// View as a core [`Dataset`] for estimation and testing.
    pub fn to_dataset(&self) -> Dataset {
        Dataset::new(self.values.clone(), self.name.clone())
            .expect("built-in and parsed datasets are finite and nonempty")
    }
}

/// Errors from dataset lookup and CSV ingestion.
#[derive(Debug)]
pub enum DataError {
    /// The requested built-in name does not exist.
    UnknownDataset(String),
    /// The file could not be read.
    Io {
        /// Offending path.
        path: String,
        /// Underlying error.
        source: io::Error,
    },
    /// A cell failed to parse as a finite real.
    Parse {
        /// Offending path.
        path: String,
        /// 1-based row in the file (header row counts).
        row: usize,
        /// 0-based column index that was requested.
        column: usize,
        /// The cell content (trimmed) that failed.
        cell: String,
    },
    /// The file contained no data rows.
    Empty {
        /// Offending path.
        path: String,
    },
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::UnknownDataset(name) => write!(
                f,
                "unknown dataset '{name}' (built-ins: {})",
                BUILTIN_NAMES.join(", ")
            ),
            DataError::Io { path, source } => write!(f, "cannot read '{path}': {source}"),
            DataError::Parse { path, row, column, cell } => write!(
                f,
                "'{path}': row {row}, column {column}: cannot parse '{cell}' as a finite number"
            ),
            DataError::Empty { path } => write!(f, "'{path}' contains no data rows"),
        }
    }
}

impl std::error::Error for DataError {}

/// Names accepted by [`load_builtin`].
pub const BUILTIN_NAMES: [&str; 4] =
    ["telephone", "telephone_cleaned", "darwin", "darwin_cleaned"];

const TELEPHONE: [f64; 14] = [
    -988.0, -135.0, -78.0, 3.0, 59.0, 83.0, 93.0, 110.0, 189.0, 197.0, 204.0, 229.0, 289.0,
    310.0,
];

const DARWIN: [f64; 15] = [
    -67.0, -48.0, 6.0, 8.0, 14.0, 16.0, 23.0, 24.0, 28.0, 29.0, 41.0, 49.0, 56.0, 60.0, 75.0,
];

/// Look up one of the built-in datasets.
///
/// # Errors
/// [`DataError::UnknownDataset`] for anything outside
/// [`BUILTIN_NAMES`].
pub fn load_builtin(name: &str) -> Result<NamedDataset, DataError> {
    let (values, source): (Vec<f64>, &str) = match name {
        "telephone" => (
            TELEPHONE.to_vec(),
            "Differences in inverse rates of telephone line faults (Welch, 1987)",
        ),
        "telephone_cleaned" => (
            TELEPHONE[1..].to_vec(),
            "Telephone line-fault differences (Welch, 1987) with the gross outlier -988 removed",
        ),
        "darwin" => (
            DARWIN.to_vec(),
            "Darwin's paired height differences of cross- vs self-fertilized Zea mays \
             (Darwin, 1876; Fisher, 1935)",
        ),
        "darwin_cleaned" => (
            DARWIN[2..].to_vec(),
            "Darwin's Zea mays differences (Darwin, 1876) with the two negative pairs removed",
        ),
        other => return Err(DataError::UnknownDataset(other.to_string())),
    };
    Ok(NamedDataset { name: name.to_string(), values, source: source.to_string() })
}

fn parse_cell(trimmed: &str) -> Option<f64> {
    // Tolerate typographic minus signs from copy-pasted tables.
    let ascii = trimmed.replace('\u{2212}', "-");
    match ascii.parse::<f64>() {
        Ok(v) if v.is_finite() => Some(v),
        _ => None,
    }
}

fn cell_text<'a>(line: &'a str, column: usize) -> &'a str {
    let cell = line.split(',').nth(column).unwrap_or("").trim();
    // Tolerate a quoted numeric cell.
    cell.strip_prefix('"')
        .and_then(|c| c.strip_suffix('"'))
        .map(str::trim)
        .unwrap_or(cell)
}

/// Load one column of a CSV file.
///
/// A single header row is skipped automatically when its selected cell
/// does not parse as a number but the row has text in it; every
/// subsequent cell must parse. Blank trailing lines are tolerated; blank
/// lines anywhere else are empty cells and rejected.
///
/// # Errors
/// [`DataError::Io`] when the file cannot be read, [`DataError::Parse`]
/// with the 1-based physical row for the first bad or missing cell,
/// [`DataError::Empty`] when no data rows remain.
pub fn load_csv(path: &Path, column: usize) -> Result<NamedDataset, DataError> {
    let path_str = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path_str.clone(),
        source,
    })?;
    let mut lines: Vec<&str> = text.lines().collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }

    let mut values = Vec::new();
    for (index, line) in lines.iter().enumerate() {
        let row = index + 1;
        let cell = cell_text(line, column);
        match parse_cell(cell) {
            Some(v) => values.push(v),
            None if row == 1 && line.split(',').any(|c| !c.trim().is_empty()) => {
                continue; // header row
            }
            None => {
                return Err(DataError::Parse {
                    path: path_str,
                    row,
                    column,
                    cell: cell.to_string(),
                })
            }
        }
    }
    if values.is_empty() {
        return Err(DataError::Empty { path: path_str });
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".to_string());
    Ok(NamedDataset { name, values, source: format!("loaded from {path_str}") })
}

/// Serialize one value per line under a `value` header, with 17
/// significant digits so reloading reproduces every `f64` bit-exactly.
///
/// # Errors
/// Propagates writer errors.
pub fn write_csv<W: Write>(dataset: &NamedDataset, mut writer: W) -> io::Result<()> {
    writeln!(writer, "value")?;
    for v in &dataset.values {
        writeln!(writer, "{v:.16e}")?;
    }
    Ok(())
}

/// Resolve a `--data` argument: `builtin:<name>` or a CSV path.
///
/// # Errors
/// As [`load_builtin`] / [`load_csv`].
pub fn resolve(data: &str, column: usize) -> Result<NamedDataset, DataError> {
    match data.strip_prefix("builtin:") {
        Some(name) => load_builtin(name),
        None => load_csv(Path::new(data), column),
    }
}
