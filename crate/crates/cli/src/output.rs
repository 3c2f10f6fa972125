use std::path::Path;

use crate::CliError;

/// Shortest round-trip exponent form, so identical runs give identical bytes.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Writes a header and rows with RFC 4180 quoting; returns the row count.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<usize, CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let err = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    let mut n = 0;
    for row in rows {
        w.write_record(&row).map_err(err)?;
        n += 1;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(n)
}
