//! Record persistence: JSON-lines for sample records, plain CSV for tables.

use super::SampleRecord;
use crate::error::Result;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Append one record as a single JSON line.
pub fn append_record<W: Write>(writer: &mut W, record: &SampleRecord) -> Result<()> {
    serde_json::to_writer(&mut *writer, record)?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Write all records to `path`, one JSON object per line.
pub fn write_jsonl<P: AsRef<Path>>(path: P, records: &[SampleRecord]) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    for r in records {
        append_record(&mut writer, r)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read records back; blank lines are skipped.
pub fn read_jsonl<P: AsRef<Path>>(path: P) -> Result<Vec<SampleRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}

/// Minimal CSV writer for numeric tables: values must not contain commas,
/// quotes, or newlines (all our cells are numbers or short identifiers).
pub fn write_csv<P: AsRef<Path>>(path: P, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    writeln!(writer, "{}", header.join(","))?;
    for row in rows {
        writeln!(writer, "{}", row.join(","))?;
    }
    writer.flush()?;
    Ok(())
}
