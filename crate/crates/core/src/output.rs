//! CSV emission. Floats are written in shortest round-trip decimal form.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// Writes a CSV file; an empty row set still gets no header (callers that
/// need one supply at least one row).
pub fn write_csv_file<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_csv(BufWriter::new(f), rows)
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::circle::CurveRow;
    use crate::stats::sojourn::SojournRecord;

    #[test]
    fn floats_round_trip() {
        let rows = [CurveRow {
            theta: 0.1 + 0.2,
            re: 1.0,
            im: -1e-300,
            abs: std::f64::consts::PI,
        }];
        let s = csv_string(&rows).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("theta,re,im,abs"));
        let vals: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(vals, vec![rows[0].theta, rows[0].re, rows[0].im, rows[0].abs]);
    }

    #[test]
    fn sojourn_header() {
        let r = SojournRecord::from_membership(&[true, true, false, true, false]).unwrap();
        let s = csv_string(&r.rows()).unwrap();
        assert_eq!(s, "k,T_2k-1,T_2k,eta_k,xi_k\n1,2,3,2,1\n2,4,,1,\n");
    }
}
