//! CSV export of node fields and tables.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::Lattice;
use crate::error::Result;
use crate::scalar::Real;

/// Shortest round-trip decimal representation.
pub fn fmt_num<T: Real>(x: T) -> String {
    format!("{x:?}")
}

/// Writes `node, x0..x{n-1}, <fields...>` with one row per node.
pub fn write_fields_csv<T: Real>(path: &Path, lattice: &Lattice<T>, fields: &[(&str, &[T])]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header = vec!["node".to_string()];
    header.extend((0..lattice.dim()).map(|a| format!("x{a}")));
    header.extend(fields.iter().map(|(n, _)| n.to_string()));
    w.write_record(&header)?;
    for v in 0..lattice.len() {
        let mut row = vec![v.to_string()];
        row.extend(lattice.coords(v).into_iter().map(fmt_num));
        row.extend(fields.iter().map(|(_, f)| fmt_num(f[v])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a header and pre-formatted rows.
pub fn write_table_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let mut inner = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    inner.flush()?;
    Ok(())
}
