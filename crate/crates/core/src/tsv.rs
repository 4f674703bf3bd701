//! Line-oriented TSV reading used by every file format in the crate:
//! UTF-8, one record per line, blank lines and `#` comments skipped.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A non-comment line with its 1-based line number.
pub(crate) struct Record<'a> {
    pub line: usize,
    pub fields: Vec<&'a str>,
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn records(text: &str) -> impl Iterator<Item = Record<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with('#') {
            return None;
        }
        Some(Record {
            line: i + 1,
            fields: line.split('\t').collect(),
        })
    })
}

pub(crate) fn expect_fields<'a>(
    path: &Path,
    record: &Record<'a>,
    n: usize,
) -> Result<()> {
    if record.fields.len() != n {
        return Err(Error::load(
            path,
            record.line,
            format!("expected {n} tab-separated fields, found {}", record.fields.len()),
        ));
    }
    Ok(())
}

pub(crate) fn parse_count(path: &Path, line: usize, field: &str, what: &str) -> Result<u64> {
    field
        .trim()
        .parse::<u64>()
        .map_err(|_| Error::load(path, line, format!("{what} is not a nonnegative integer: {field:?}")))
}

/// Writes via a sibling temp file and rename so readers never see a partial file.
pub(crate) fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// `key = value` lines, with `#` comments and blank lines skipped.
pub(crate) fn key_values<'a>(path: &'a Path, text: &'a str) -> impl Iterator<Item = Result<(usize, &'a str, &'a str)>> + 'a {
    text.lines().enumerate().filter_map(move |(i, raw)| {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        Some(match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => Ok((i + 1, k.trim(), v.trim())),
            _ => Err(Error::load(path, i + 1, format!("expected key = value, found {line:?}"))),
        })
    })
}
