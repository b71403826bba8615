//! CSV and sidecar writers. Files are written to a temporary file in the
//! destination directory and renamed into place.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use spinorbit::experiments::{ColumnData, ResultTable};
use tempfile::NamedTempFile;

/// Twelve significant digits in scientific notation.
pub fn format_real(v: f64) -> String {
    format!("{v:.11e}")
}

/// Header plus rows, RFC 4180 quoting.
pub fn write_csv<W: Write>(table: &ResultTable, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    w.write_record(table.columns.iter().map(|c| c.name.as_str()))?;
    for i in 0..table.rows() {
        w.write_record(table.columns.iter().map(|c| match &c.data {
            ColumnData::Real(v) => format_real(v[i]),
            ColumnData::Text(v) => v[i].clone(),
        }))?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(table: &ResultTable) -> String {
    let mut buf = Vec::new();
    write_csv(table, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

/// Metadata and summary as `key = value` lines under comment headers.
pub fn sidecar_string(table: &ResultTable) -> String {
    let mut s = String::from("# resolved configuration and provenance\n");
    for (k, v) in &table.metadata {
        s.push_str(&format!("{k} = {v}\n"));
    }
    if !table.summary.is_empty() {
        s.push_str("# summary\n");
        for (k, v) in &table.summary {
            s.push_str(&format!("# {k}: {v}\n"));
        }
    }
    s
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes `path.meta`, then `path`. If the CSV cannot be written the new
/// sidecar is removed again.
pub fn write_table(table: &ResultTable, path: &Path) -> io::Result<()> {
    let csv = csv_string(table);
    let meta = sidecar_path(path);
    write_atomic(&meta, sidecar_string(table).as_bytes())?;
    write_atomic(path, csv.as_bytes()).inspect_err(|_| {
        let _ = fs::remove_file(&meta);
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use spinorbit::experiments::Column;

    fn table() -> ResultTable {
        ResultTable {
            columns: vec![
                Column {
                    name: "time_s".into(),
                    data: ColumnData::Real(vec![0.0, 1.0 / 3.0]),
                },
                Column {
                    name: "model".into(),
                    data: ColumnData::Text(vec!["full".into(), "a,\"b\"".into()]),
                },
            ],
            metadata: vec![("version".into(), "0.1.0".into())],
            summary: vec![("peak_transfer".into(), "0.99".into())],
        }
    }

    #[test]
    fn twelve_significant_digits_and_quoting() {
        assert_eq!(format_real(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(format_real(-2.5e8), "-2.50000000000e8");
        let s = csv_string(&table());
        assert_eq!(
            s,
            "time_s,model\r\n0.00000000000e0,full\r\n3.33333333333e-1,\"a,\"\"b\"\"\"\r\n"
        );
    }

    #[test]
    fn files_and_sidecar_written() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_table(&table(), &p).unwrap();
        assert!(fs::read_to_string(&p).unwrap().starts_with("time_s,model"));
        let meta = fs::read_to_string(sidecar_path(&p)).unwrap();
        assert!(meta.contains("version = 0.1.0"));
        assert!(meta.contains("# peak_transfer: 0.99"));
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
    }
}
