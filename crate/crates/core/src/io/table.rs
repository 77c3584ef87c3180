//! CSV tables with a header row; floats carry 17 significant digits.

use std::path::Path;

use crate::error::{Error, Result};
use crate::fom::FomScalars;

pub const SCALAR_COLUMNS: [&str; 5] = ["t", "energy", "enstrophy", "div_error", "drag"];

/// 17 significant digits, so finite values read back bit for bit.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.16e}")
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path.display().to_string(), format!("{other:?}")),
    }
}

/// Writes a header and rows of already formatted cells.
pub fn write_records(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        if r.len() != header.len() {
            return Err(Error::precondition(format!(
                "row of {} cells under a {}-column header",
                r.len(),
                header.len()
            )));
        }
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Header and raw cells.
pub fn read_records(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header: Vec<String> = r.headers().map_err(|e| csv_err(path, e))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

pub fn write_numeric(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|v| fmt_f64(*v)).collect()).collect();
    write_records(path, header, &cells)
}

pub fn read_numeric(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let (header, rows) = read_records(path)?;
    let mut out = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let vals = r
            .iter()
            .zip(&header)
            .map(|(c, h)| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::format(h.clone(), format!("row {}: '{c}' is not a number", i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(vals);
    }
    Ok((header, out))
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// `t, energy, enstrophy, div_error, drag`
pub fn write_scalars(path: &Path, s: &FomScalars) -> Result<()> {
    let rows: Vec<Vec<f64>> =
        (0..s.len()).map(|i| vec![s.t[i], s.energy[i], s.enstrophy[i], s.div_error[i], s.drag[i]]).collect();
    write_numeric(path, &columns(&SCALAR_COLUMNS), &rows)
}

pub fn read_scalars(path: &Path) -> Result<FomScalars> {
    let (header, rows) = read_numeric(path)?;
    if header != columns(&SCALAR_COLUMNS) {
        return Err(Error::format("header", format!("expected {}", SCALAR_COLUMNS.join(","))));
    }
    let mut s = FomScalars::default();
    for r in rows {
        s.t.push(r[0]);
        s.energy.push(r[1]);
        s.enstrophy.push(r[2]);
        s.div_error.push(r[3]);
        s.drag.push(r[4]);
    }
    Ok(s)
}

/// `t, a_1, .., a_r`
pub fn write_trajectory(path: &Path, times: &[f64], coefficients: &[Vec<f64>]) -> Result<()> {
    let r = coefficients.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    header.extend((1..=r).map(|i| format!("a_{i}")));
    let rows: Vec<Vec<f64>> =
        times.iter().zip(coefficients).map(|(t, a)| std::iter::once(*t).chain(a.iter().copied()).collect()).collect();
    write_numeric(path, &header, &rows)
}

pub fn read_trajectory(path: &Path) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let (header, rows) = read_numeric(path)?;
    if header.first().map(String::as_str) != Some("t") {
        return Err(Error::format("header", "first column must be t"));
    }
    Ok(rows.into_iter().map(|r| (r[0], r[1..].to_vec())).unzip())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MAX, 0.0, -0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert!(fmt_f64(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn scalars_and_trajectories_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = FomScalars {
            t: vec![0.0, 0.1],
            energy: vec![0.5, 0.49],
            enstrophy: vec![1.0, 0.9],
            div_error: vec![1e-12, 2e-12],
            drag: vec![f64::NAN, f64::NAN],
        };
        let p = dir.path().join("s.csv");
        write_scalars(&p, &s).unwrap();
        let back = read_scalars(&p).unwrap();
        assert_eq!(back.t, s.t);
        assert_eq!(back.energy, s.energy);
        assert!(back.drag.iter().all(|d| d.is_nan()));
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("t,energy,enstrophy,div_error,drag\n"));

        let p = dir.path().join("a.csv");
        let coef = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        write_trajectory(&p, &[0.0, 0.5], &coef).unwrap();
        assert_eq!(read_trajectory(&p).unwrap(), (vec![0.0, 0.5], coef));
        assert!(std::fs::read_to_string(&p).unwrap().starts_with("t,a_1,a_2\n"));
    }

    #[test]
    fn bad_cells_are_format_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "t,a_1\n0.0,abc\n").unwrap();
        assert!(matches!(read_trajectory(&p), Err(Error::Format { field, .. }) if field == "a_1"));
    }
}
