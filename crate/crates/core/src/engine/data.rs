//! CSV ingestion. Fields are trimmed and lowercased; empty fields are missing.

use crate::error::{Error, Result};
use crate::features::RecordTable;
use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

pub fn normalize(field: &str) -> Option<String> {
    let t = field.trim();
    (!t.is_empty()).then(|| t.to_lowercase())
}

pub fn read_csv_from<R: Read>(r: R) -> Result<RecordTable> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let headers: Vec<String> = rd.headers()?.iter().map(|h| h.trim().to_lowercase()).collect();
    let unique: BTreeSet<&String> = headers.iter().collect();
    if unique.len() != headers.len() {
        return Err(Error::Config("duplicate column name in CSV header".into()));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        rows.push(rec?.iter().map(normalize).collect());
    }
    RecordTable::new(headers, rows)
}

pub fn read_csv(path: &Path) -> Result<RecordTable> {
    read_csv_from(std::fs::File::open(path)?)
}

pub fn write_csv_to<W: Write>(w: W, table: &RecordTable) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(&table.headers)?;
    for row in table.rows() {
        wr.write_record(row.iter().map(|c| c.as_deref().unwrap_or("")))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, table: &RecordTable) -> Result<()> {
    write_csv_to(std::fs::File::create(path)?, table)
}
