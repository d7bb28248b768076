use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::{FeatureKind, SnapshotStore};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// Comma-separated, optional header row, one snapshot per row.
    Csv,
    /// Little-endian f64, row-major, no header.
    RawBinary,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(DataFormat::Csv),
            "raw" | "raw_binary" | "bin" => Ok(DataFormat::RawBinary),
            other => Err(Error::param(format!("unknown data format {other:?}"))),
        }
    }
}

/// Loads snapshots in file order; that order is the time order.
pub fn load_dataset(
    path: impl AsRef<Path>,
    format: DataFormat,
    kinds: Vec<FeatureKind>,
) -> Result<SnapshotStore> {
    let path = path.as_ref();
    match format {
        DataFormat::Csv => load_csv(path, kinds),
        DataFormat::RawBinary => load_raw(path, kinds),
    }
}

fn load_csv(path: &Path, kinds: Vec<FeatureKind>) -> Result<SnapshotStore> {
    let d = kinds.len();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));

    let mut data = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut row = 0usize;
    let mut first = true;
    while reader.read_record(&mut record)? {
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if first {
            first = false;
            if record.iter().any(|f| f.parse::<f64>().is_err()) {
                // header row
                if record.len() != d {
                    return Err(Error::SpecWidthMismatch {
                        spec: d,
                        data: record.len(),
                    });
                }
                continue;
            }
            if record.len() != d {
                return Err(Error::SpecWidthMismatch {
                    spec: d,
                    data: record.len(),
                });
            }
        }
        if record.len() != d {
            return Err(Error::RaggedRow {
                row,
                found: record.len(),
                expected: d,
            });
        }
        for (column, field) in record.iter().enumerate() {
            let value = field.parse::<f64>().map_err(|_| Error::NonNumeric {
                row,
                column,
                value: field.to_string(),
            })?;
            data.push(value);
        }
        row += 1;
    }
    SnapshotStore::new(data, kinds)
}

fn load_raw(path: &Path, kinds: Vec<FeatureKind>) -> Result<SnapshotStore> {
    let d = kinds.len();
    let row_bytes = d * 8;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let bytes = file.metadata().map_err(|e| Error::io(path, e))?.len();
    if row_bytes == 0 || bytes % row_bytes as u64 != 0 {
        return Err(Error::RawLength {
            bytes,
            row_bytes,
            d,
        });
    }
    let count = (bytes / 8) as usize;
    let mut data = Vec::with_capacity(count);
    let mut reader = BufReader::with_capacity(1 << 16, file);
    let mut buf = [0u8; 8];
    for _ in 0..count {
        reader.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
        data.push(f64::from_le_bytes(buf));
    }
    SnapshotStore::new(data, kinds)
}

pub fn write_csv(store: &SnapshotStore, path: impl AsRef<Path>, header: bool) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    if header {
        w.write_record((0..store.dim()).map(|k| format!("f{k}")))?;
    }
    for i in 0..store.len() {
        w.write_record(store.row(i).iter().map(|x| x.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_raw(store: &SnapshotStore, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for x in store.as_slice() {
        w.write_all(&x.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
