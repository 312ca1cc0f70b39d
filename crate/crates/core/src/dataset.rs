//! Reading reference datasets and generating synthetic ones.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::DatasetFormat;
use crate::error::{Error, Result};
use crate::scaler::{Bounds, Dataset};

/// Loads a CSV file with a header row naming the input features.
///
/// Row numbers in errors are 1-based file lines (the header is line 1),
/// columns are 1-based.
pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset> {
    match format {
        DatasetFormat::Csv => {
            let file = std::fs::File::open(path).map_err(|source| Error::Io {
                path: path.to_owned(),
                source,
            })?;
            read_csv(file, path)
        }
    }
}

pub fn read_csv<R: std::io::Read>(reader: R, path: &Path) -> Result<Dataset> {
    let parse_err = |row: usize, column: usize, message: String| Error::DatasetParse {
        path: path.to_owned(),
        row,
        column,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| parse_err(1, 1, e.to_string()))?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(Error::Dataset(format!("{}: file is empty", path.display())));
    }
    let columns: Vec<String> = headers.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| parse_err(line, 1, e.to_string()))?;
        let mut row = Vec::with_capacity(columns.len());
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, j + 1, format!("`{field}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line, j + 1, format!("`{field}` is not finite")));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Dataset(format!("{}: header but no data rows", path.display())));
    }
    Dataset::new(columns, rows)
}

/// Writes a header row and one line per row; floats use their shortest
/// round-trip form.
pub fn write_csv<W: std::io::Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Dataset(e.to_string());
    w.write_record(dataset.columns()).map_err(io)?;
    for row in dataset.rows() {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Dataset(e.to_string()))
}

/// `rows` independent uniform draws inside `bounds`, one column per bound,
/// drawn row by row from a ChaCha8 stream.
pub fn uniform_dataset(columns: Vec<String>, bounds: &[Bounds], rows: usize, seed: u64) -> Result<Dataset> {
    if columns.len() != bounds.len() {
        return Err(Error::Dimension {
            expected: columns.len(),
            actual: bounds.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows)
        .map(|_| {
            bounds
                .iter()
                .map(|b| b.min + (b.max - b.min) * rng.random::<f64>())
                .collect()
        })
        .collect();
    Dataset::new(columns, data)
}
