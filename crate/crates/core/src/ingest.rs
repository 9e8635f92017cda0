//! Loading sensor tables into a [`Dataset`].
//!
//! Two layouts are understood: the UCI Air Quality export (`;` separated,
//! decimal commas, `-200` as the missing marker, leading `Date`/`Time`
//! columns and trailing empty columns) and plain delimited numeric CSV.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use log::warn;
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::matrix::take_rows;

/// Missing marker used by the UCI Air Quality export.
pub const UCI_MISSING_SENTINEL: f64 = -200.0;

/// A row-major numeric table with a missingness mask.
///
/// Missing cells hold `NaN` in `values`; the mask is authoritative.
#[derive(Debug, Clone)]
pub struct Dataset {
    values: Array2<f64>,
    feature_names: Vec<String>,
    missing_mask: Array2<bool>,
}

impl Dataset {
    pub fn new(
        values: Array2<f64>,
        feature_names: Vec<String>,
        missing_mask: Array2<bool>,
    ) -> Result<Self> {
        if values.dim() != missing_mask.dim() {
            return Err(Error::DimensionMismatch(format!(
                "values are {:?} but missing mask is {:?}",
                values.dim(),
                missing_mask.dim()
            )));
        }
        if feature_names.len() != values.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                values.ncols()
            )));
        }
        for ((row, col), v) in values.indexed_iter() {
            if !missing_mask[(row, col)] && !v.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
        }
        Ok(Self {
            values,
            feature_names,
            missing_mask,
        })
    }

    /// Wrap a matrix, treating non-finite cells as missing.
    pub fn from_matrix(values: Array2<f64>, feature_names: Vec<String>) -> Result<Self> {
        let mask = values.mapv(|v| !v.is_finite());
        let values = values.mapv(|v| if v.is_finite() { v } else { f64::NAN });
        Self::new(values, feature_names, mask)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn missing_mask(&self) -> &Array2<bool> {
        &self.missing_mask
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn n_missing(&self) -> usize {
        self.missing_mask.iter().filter(|&&m| m).count()
    }

    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.missing_mask[(row, col)]
    }

    /// Non-missing entries of one feature, in row order.
    pub fn observed(&self, col: usize) -> Vec<f64> {
        self.values
            .column(col)
            .iter()
            .zip(self.missing_mask.column(col))
            .filter(|(_, &m)| !m)
            .map(|(&v, _)| v)
            .collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            values: take_rows(&self.values, idx),
            feature_names: self.feature_names.clone(),
            missing_mask: take_rows(&self.missing_mask, idx),
        }
    }

    /// Keep the named features in the given order.
    pub fn select_features<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let idx = names
            .iter()
            .map(|name| {
                let name = name.as_ref();
                self.feature_names
                    .iter()
                    .position(|f| f == name)
                    .ok_or_else(|| Error::MissingFeature(name.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            values: self.values.select(ndarray::Axis(1), &idx),
            feature_names: idx.iter().map(|&j| self.feature_names[j].clone()).collect(),
            missing_mask: self.missing_mask.select(ndarray::Axis(1), &idx),
        })
    }

    /// Canonical CSV: `,` delimiter, `.` decimals, empty cell for missing.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().from_writer(writer);
        w.write_record(&self.feature_names)?;
        let mut record = Vec::with_capacity(self.n_features());
        for (row, mask) in self.values.outer_iter().zip(self.missing_mask.outer_iter()) {
            record.clear();
            for (v, &m) in row.iter().zip(mask.iter()) {
                record.push(if m { String::new() } else { v.to_string() });
            }
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<csv writer>".into(),
            source: e,
        })?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// A dataset plus the non-fatal issues met while reading it.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub dataset: Dataset,
    pub warnings: Vec<String>,
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    Ok(buf)
}

fn header_names(record: &csv::ByteRecord, warnings: &mut Vec<String>) -> Vec<String> {
    record
        .iter()
        .enumerate()
        .map(|(j, field)| {
            let name = String::from_utf8_lossy(field);
            if std::str::from_utf8(field).is_err() {
                let msg = format!("header column {j} is not valid UTF-8; replaced as `{name}`");
                warn!("{msg}");
                warnings.push(msg);
            }
            name.trim().to_string()
        })
        .collect()
}

fn is_blank(field: &[u8]) -> bool {
    field.iter().all(u8::is_ascii_whitespace)
}

fn parse_uci_cell(field: &[u8]) -> Option<f64> {
    let text = std::str::from_utf8(field).ok()?.trim();
    if text.is_empty() {
        return None;
    }
    let v: f64 = text.replace(',', ".").parse().ok()?;
    (v.is_finite() && v != UCI_MISSING_SENTINEL).then_some(v)
}

/// Load the UCI Air Quality export.
///
/// `Date` and `Time` are dropped, `-200` becomes missing, and rows or columns
/// that are empty throughout are removed. With `feature_selection`, only the
/// named columns are kept, in the order given.
pub fn load_uci_air_quality(
    path: impl AsRef<Path>,
    feature_selection: Option<&[String]>,
) -> Result<Loaded> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b';')
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes.as_slice());

    let mut warnings = Vec::new();
    let mut records = reader.byte_records();
    let header = match records.next() {
        Some(r) => r?,
        None => return Err(Error::EmptyFile),
    };
    let names = header_names(&header, &mut warnings);
    let width = names.len();

    let mut rows: Vec<csv::ByteRecord> = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(is_blank) {
            continue;
        }
        if record.len() != width {
            return Err(Error::MalformedRow {
                line,
                expected: width,
                found: record.len(),
            });
        }
        rows.push(record);
    }
    if rows.is_empty() {
        return Err(Error::NoDataRows);
    }

    let is_timestamp = |name: &str| name.eq_ignore_ascii_case("date") || name.eq_ignore_ascii_case("time");
    let columns: Vec<usize> = match feature_selection {
        Some(selection) => selection
            .iter()
            .map(|want| {
                names
                    .iter()
                    .position(|n| n == want && !is_timestamp(n))
                    .ok_or_else(|| Error::MissingFeature(want.clone()))
            })
            .collect::<Result<_>>()?,
        None => (0..width)
            .filter(|&j| !is_timestamp(&names[j]))
            .filter(|&j| rows.iter().any(|r| !is_blank(&r[j])))
            .collect(),
    };

    let n = rows.len();
    let d = columns.len();
    let mut values = Array2::from_elem((n, d), f64::NAN);
    let mut mask = Array2::from_elem((n, d), true);
    let mut unparsable = 0usize;
    for (i, row) in rows.iter().enumerate() {
        for (jj, &j) in columns.iter().enumerate() {
            let field = &row[j];
            match parse_uci_cell(field) {
                Some(v) => {
                    values[(i, jj)] = v;
                    mask[(i, jj)] = false;
                }
                None => {
                    let text = String::from_utf8_lossy(field);
                    let text = text.trim();
                    if !text.is_empty() && text.replace(',', ".").parse::<f64>().is_err() {
                        unparsable += 1;
                    }
                }
            }
        }
    }
    if unparsable > 0 {
        let msg = format!("{unparsable} non-numeric cells treated as missing");
        warn!("{msg}");
        warnings.push(msg);
    }

    let feature_names = columns
        .iter()
        .map(|&j| {
            if names[j].is_empty() {
                format!("column_{j}")
            } else {
                names[j].clone()
            }
        })
        .collect();
    Ok(Loaded {
        dataset: Dataset::new(values, feature_names, mask)?,
        warnings,
    })
}

/// Load a header-first delimited numeric file.
///
/// Cells equal to one of `missing_tokens`, empty, or unparsable are marked
/// missing. Columns without a single numeric cell are dropped with a warning.
pub fn load_csv<S: AsRef<str>>(
    path: impl AsRef<Path>,
    delimiter: u8,
    missing_tokens: &[S],
) -> Result<Loaded> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(Error::EmptyFile);
    }
    let tokens: HashSet<&str> = missing_tokens.iter().map(AsRef::as_ref).collect();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes.as_slice());

    let mut warnings = Vec::new();
    let mut records = reader.byte_records();
    let header = match records.next() {
        Some(r) => r?,
        None => return Err(Error::EmptyFile),
    };
    let names = header_names(&header, &mut warnings);
    let width = names.len();

    let mut cells: Vec<Vec<Option<f64>>> = Vec::new();
    for record in records {
        let record = record?;
        if record.len() != width {
            return Err(Error::MalformedRow {
                line: record.position().map_or(0, |p| p.line()),
                expected: width,
                found: record.len(),
            });
        }
        let row = record
            .iter()
            .map(|field| {
                let text = std::str::from_utf8(field).ok()?.trim();
                if text.is_empty() || tokens.contains(text) {
                    return None;
                }
                text.parse::<f64>().ok().filter(|v| v.is_finite())
            })
            .collect();
        cells.push(row);
    }
    if cells.is_empty() {
        return Err(Error::NoDataRows);
    }

    let mut keep = Vec::new();
    for (j, name) in names.iter().enumerate() {
        if cells.iter().any(|r| r[j].is_some()) {
            keep.push(j);
        } else {
            let msg = format!("dropping non-numeric column `{name}`");
            warn!("{msg}");
            warnings.push(msg);
        }
    }
    if keep.is_empty() {
        return Err(Error::NoNumericColumns);
    }

    let n = cells.len();
    let mut values = Array2::from_elem((n, keep.len()), f64::NAN);
    let mut mask = Array2::from_elem((n, keep.len()), true);
    for (i, row) in cells.iter().enumerate() {
        for (jj, &j) in keep.iter().enumerate() {
            if let Some(v) = row[j] {
                values[(i, jj)] = v;
                mask[(i, jj)] = false;
            }
        }
    }
    let feature_names = keep.iter().map(|&j| names[j].clone()).collect();
    Ok(Loaded {
        dataset: Dataset::new(values, feature_names, mask)?,
        warnings,
    })
}
