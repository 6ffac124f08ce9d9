//! JSON-lines files with a versioned header line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const SUITE_FORMAT: &str = "menli-suite";
pub const SCORES_FORMAT: &str = "menli-scores";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub version: u32,
    /// Format-specific metadata carried alongside the version.
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Header {
    pub fn new(format: &str) -> Self {
        Header { format: format.to_string(), version: FORMAT_VERSION, extra: Map::new() }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Result<Self> {
        let value = serde_json::to_value(value).map_err(|e| Error::Invalid(e.to_string()))?;
        self.extra.insert(key.to_string(), value);
        Ok(self)
    }
}

/// Writes a header line followed by one record per line.
pub fn write<T: Serialize>(path: &Path, header: &Header, records: impl IntoIterator<Item = T>) -> Result<usize> {
    let mut out = BufWriter::new(File::create(path)?);
    let mut n = 0;
    writeln!(out, "{}", to_line(header)?)?;
    for rec in records {
        writeln!(out, "{}", to_line(&rec)?)?;
        n += 1;
    }
    out.flush()?;
    Ok(n)
}

pub fn to_line<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Invalid(format!("cannot serialize record: {e}")))
}

/// Lines of a JSON-lines file with 1-based line numbers, blank lines skipped.
pub fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            lines.push((i + 1, line));
        }
    }
    Ok(lines)
}

fn check_header(path: &Path, line: usize, text: &str, format: &str) -> Result<Option<Header>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::parse(path, line, e.to_string()))?;
    if value.get("format").is_none() {
        return Ok(None);
    }
    let header: Header = serde_json::from_value(value).map_err(|e| Error::parse(path, line, e.to_string()))?;
    if header.format != format {
        return Err(Error::parse(path, line, format!("expected format `{format}`, found `{}`", header.format)));
    }
    if header.version != FORMAT_VERSION {
        return Err(Error::parse(path, line, format!("unsupported {format} version {}", header.version)));
    }
    Ok(Some(header))
}

/// Reads a file of `T` records. With `require_header` the first line must be
/// a header of `format`; otherwise a header is optional.
pub fn read<T: DeserializeOwned>(path: &Path, format: &str, require_header: bool) -> Result<(Option<Header>, Vec<(usize, T)>)> {
    let mut lines = read_lines(path)?.into_iter().peekable();
    let header = match lines.peek() {
        Some((n, text)) => check_header(path, *n, text, format)?,
        None => None,
    };
    if header.is_some() {
        lines.next();
    } else if require_header {
        return Err(Error::parse(path, 1, format!("missing {{\"format\": \"{format}\"}} header line")));
    }
    let records = lines
        .map(|(n, text)| {
            serde_json::from_str(&text).map(|r| (n, r)).map_err(|e| Error::parse(path, n, e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header, records))
}
