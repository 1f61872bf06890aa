//! JSON Lines streams and the structured config file.
//!
//! Every stream is one JSON object per line. Numbers are written in the
//! shortest decimal form that parses back to the same `f64`, so
//! `parse(serialize(x)) == x` holds exactly.

pub mod config;
pub mod records;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Reads one `T` per line. Any malformed or blank line is an error carrying
/// its 1-based line number; nothing is skipped.
pub fn read_jsonl<T: DeserializeOwned>(reader: impl Read) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(value);
    }
    Ok(out)
}

/// Like [`read_jsonl`], then converts each record with `convert`, which sees
/// the record's line number.
pub fn read_jsonl_with<T: DeserializeOwned, U>(
    reader: impl Read,
    mut convert: impl FnMut(usize, T) -> Result<U>,
) -> Result<Vec<U>> {
    read_jsonl::<T>(reader)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| convert(i + 1, r))
        .collect()
}

pub fn write_jsonl<'a, T: Serialize + 'a>(
    writer: impl Write,
    items: impl IntoIterator<Item = &'a T>,
) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for item in items {
        write_jsonl_line(&mut w, item)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_jsonl_line<T: Serialize>(mut writer: impl Write, item: &T) -> Result<()> {
    serde_json::to_writer(&mut writer, item).map_err(|e| Error::Io(e.into()))?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

pub fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}
