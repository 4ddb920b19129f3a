//! CSV and JSON artifacts. Floats in CSV are written with 17 significant
//! digits; JSON uses the shortest representation that round-trips exactly.
//! Every JSON report carries `schema_version` and `kind`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::SCHEMA_VERSION;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::oracle::Trajectory;
use crate::spectral::ContinuumMode;

/// `v` with 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes a CSV with a single header row.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>())?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Numeric-only convenience wrapper around [`write_csv`].
pub fn write_numeric_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<()> {
    write_csv(
        path,
        header,
        rows.into_iter().map(|r| r.into_iter().map(num)),
    )
}

/// Writes `value` (which must serialize to an object) with `schema_version`
/// and `kind` added.
pub fn write_json(path: &Path, kind: &str, value: &impl Serialize) -> Result<()> {
    let json = report_value(kind, value)?;
    let mut text = serde_json::to_string_pretty(&json)?;
    text.push('\n');
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn report_value(kind: &str, value: &impl Serialize) -> Result<serde_json::Value> {
    let mut json = serde_json::to_value(value)?;
    let serde_json::Value::Object(map) = &mut json else {
        return Err(Error::Validation(format!(
            "report {kind} must serialize to a JSON object"
        )));
    };
    map.insert("schema_version".into(), SCHEMA_VERSION.into());
    map.insert("kind".into(), kind.into());
    Ok(json)
}

/// Grid metadata embedded in reports.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridMeta {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub h: f64,
}

impl From<&GridSpec> for GridMeta {
    fn from(g: &GridSpec) -> Self {
        Self {
            length: g.length(),
            n: g.n(),
            h: g.h(),
        }
    }
}

/// Reads a potential CSV with columns `x` and `value` (any order, extra columns ignored).
pub fn read_potential_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r.headers()?.clone();
    let column = |name: &str| {
        header.iter().position(|h| h.trim() == name).ok_or_else(|| {
            Error::Validation(format!("{}: missing column `{name}`", path.display()))
        })
    };
    let (ix, iv) = (column("x")?, column("value")?);
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize, name: &str| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| {
                    Error::Validation(format!(
                        "{}: row {}: column `{name}` is not a number",
                        path.display(),
                        line + 2
                    ))
                })
        };
        xs.push(parse(ix, "x")?);
        vs.push(parse(iv, "value")?);
    }
    Ok((xs, vs))
}

/// A parsed CSV table (header plus string cells), for readers and tests.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Validation(format!("missing column `{name}`")))?;
        self.rows
            .iter()
            .map(|r| {
                r[i].parse::<f64>().map_err(|_| {
                    Error::Validation(format!("column `{name}` has a non-numeric cell {:?}", r[i]))
                })
            })
            .collect()
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| Ok(rec?.iter().map(str::to_string).collect()))
        .collect::<Result<_>>()?;
    Ok(Table { header, rows })
}

/// `t, x, Re ψ, Im ψ, Re ψ̇, Im ψ̇` for every `stride`-th grid point.
pub fn write_trajectory(path: &Path, traj: &Trajectory, stride: usize) -> Result<()> {
    let stride = stride.max(1);
    let xs = traj.grid.points();
    let rows = traj.times.iter().zip(&traj.states).flat_map(|(&t, s)| {
        let xs = &xs;
        (0..s.len()).step_by(stride).map(move |i| {
            vec![
                t,
                xs[i],
                s.psi[i].re,
                s.psi[i].im,
                s.dpsi[i].re,
                s.dpsi[i].im,
            ]
        })
    });
    write_numeric_csv(
        path,
        &["t", "x", "re_psi", "im_psi", "re_dpsi", "im_dpsi"],
        rows,
    )
}

/// `x, Re e, Im e` including the endpoints `x = 0` and `x = L`.
pub fn write_mode(path: &Path, mode: &ContinuumMode) -> Result<()> {
    let g = mode.grid();
    let mut rows = vec![vec![0.0, 0.0, 0.0]];
    rows.extend(
        g.points()
            .into_iter()
            .zip(mode.samples())
            .map(|(x, &u)| vec![x, u, 0.0]),
    );
    rows.push(vec![g.length(), mode.boundary_value(), 0.0]);
    write_numeric_csv(path, &["x", "re_e", "im_e"], rows)
}

/// Path of `name` inside `dir`.
pub fn out(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_seventeen_digits_and_round_trip() {
        let v = 0.1 + 0.2;
        let s = num(v);
        assert_eq!(s, "3.0000000000000004e-1");
        assert_eq!(s.parse::<f64>().unwrap(), v);
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn potential_csv_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.csv");
        write_numeric_csv(
            &p,
            &["x", "value"],
            (0..5).map(|i| vec![i as f64, -(i as f64)]),
        )
        .unwrap();
        let (xs, vs) = read_potential_csv(&p).unwrap();
        assert_eq!(xs, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(vs[4], -4.0);
        std::fs::write(&p, "x,v\n0,1\n").unwrap();
        let err = read_potential_csv(&p).unwrap_err();
        assert!(err.to_string().contains("missing column `value`"));
        let err = read_potential_csv(&dir.path().join("absent.csv")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn reports_carry_schema_version() {
        #[derive(Serialize)]
        struct R {
            a: f64,
        }
        let v = report_value("demo", &R { a: 1.5 }).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["kind"], "demo");
        assert!(report_value("bad", &1.0).is_err());
    }
}
