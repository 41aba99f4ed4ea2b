use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    /// Tab for `.tsv`/`.tab` paths, comma otherwise.
    #[default]
    Auto,
    Comma,
    Tab,
}

impl Delimiter {
    fn byte_for(self, path: Option<&Path>) -> u8 {
        match self {
            Delimiter::Comma => b',',
            Delimiter::Tab => b'\t',
            Delimiter::Auto => {
                let ext = path
                    .and_then(|p| p.extension())
                    .and_then(|e| e.to_str())
                    .map(str::to_ascii_lowercase);
                if matches!(ext.as_deref(), Some("tsv" | "tab")) {
                    b'\t'
                } else {
                    b','
                }
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadOptions {
    pub delimiter: Delimiter,
    /// First line holds column names.
    pub header: bool,
    /// Zero-based column holding class labels; removed from the features.
    pub label_column: Option<usize>,
    /// File with one label per line, in row order.
    pub label_file: Option<PathBuf>,
}

/// Maps arbitrary label strings to `0..k` in first-appearance order.
fn map_labels<'a>(raw: impl IntoIterator<Item = &'a str>) -> Vec<usize> {
    let mut ids: HashMap<&str, usize> = HashMap::new();
    raw.into_iter()
        .map(|s| {
            let next = ids.len();
            *ids.entry(s).or_insert(next)
        })
        .collect()
}

fn parse_text(text: &str, delimiter: u8, opts: &LoadOptions) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(opts.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            row: e.position().map(|p| p.line() as usize).unwrap_or(0),
            column: None,
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(rows + 1);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Parse {
                    row: line,
                    column: None,
                    message: format!("expected {w} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        for (j, cell) in record.iter().enumerate() {
            if Some(j) == opts.label_column {
                labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: line,
                column: Some(j + 1),
                message: format!("'{cell}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: line,
                    column: Some(j + 1),
                    message: format!("'{cell}' is not finite"),
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    let width = width.ok_or_else(|| Error::Data("no data rows".into()))?;
    if let Some(c) = opts.label_column {
        if c >= width {
            return Err(Error::Config(format!("label column {c} is out of range for {width} columns")));
        }
    }
    let cols = width - usize::from(opts.label_column.is_some());
    if cols == 0 {
        return Err(Error::Data("no feature columns".into()));
    }
    let x = DataMatrix::new(rows, cols, values)?;
    if opts.label_column.is_some() {
        return x.with_labels(map_labels(labels.iter().map(String::as_str)));
    }
    Ok(x)
}

/// Parses delimited text already in memory.
pub fn parse_matrix(text: &str, opts: &LoadOptions) -> Result<DataMatrix> {
    let x = parse_text(text, opts.delimiter.byte_for(None), opts)?;
    attach_label_file(x, opts)
}

fn attach_label_file(x: DataMatrix, opts: &LoadOptions) -> Result<DataMatrix> {
    let Some(path) = &opts.label_file else {
        return Ok(x);
    };
    if opts.label_column.is_some() {
        return Err(Error::Config("give either a label column or a label file, not both".into()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if raw.len() != x.rows() {
        return Err(Error::Data(format!(
            "label file {} has {} labels for {} rows",
            path.display(),
            raw.len(),
            x.rows()
        )));
    }
    x.with_labels(map_labels(raw))
}

/// Reads a comma- or tab-separated numeric matrix.
pub fn load_matrix(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<DataMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let x = parse_text(&text, opts.delimiter.byte_for(Some(path)), opts)?;
    attach_label_file(x, opts)
}

/// Renders the matrix as delimited text. Values use the shortest decimal
/// form that parses back to the same `f64`. Labels, when present and
/// requested, become a leading column.
pub fn format_matrix(x: &DataMatrix, delimiter: u8, with_labels: bool) -> String {
    let sep = delimiter as char;
    let mut out = String::with_capacity(x.rows() * x.cols() * 12);
    let labels = x.labels().filter(|_| with_labels);
    for i in 0..x.rows() {
        let mut first = true;
        if let Some(l) = labels {
            out.push_str(&l[i].to_string());
            first = false;
        }
        for v in x.row(i) {
            if !first {
                out.push(sep);
            }
            first = false;
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

/// Writes the matrix atomically. See [`format_matrix`].
pub fn save_matrix(path: impl AsRef<Path>, x: &DataMatrix, with_labels: bool) -> Result<()> {
    let path = path.as_ref();
    let text = format_matrix(x, Delimiter::Auto.byte_for(Some(path)), with_labels);
    write_atomic(path, text.as_bytes())
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
