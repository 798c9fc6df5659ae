//! Field files: columnar text for radial fields, raw little-endian `f64`
//! plus a JSON sidecar for 3-D fields.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::axis::Spacing;
use super::box3d::{BoxGridSpec, Field3D};
use super::domain::Field;
use super::radial::{RadialField, RadialGrid, RadialGridSpec};
use crate::error::{Error, Result};

/// Writes `# d=<d> n=<n> r_max=<r_max>`, a spacing comment, then `r value`.
pub fn write_radial(path: &Path, field: &RadialField) -> Result<()> {
    let g = field.grid();
    let spec = g.spec();
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "# d={} n={} r_max={}", spec.d, spec.n, spec.r_max)?;
    match spec.spacing {
        Spacing::Uniform => writeln!(out, "# spacing=uniform")?,
        Spacing::Stretched { core } => writeln!(out, "# spacing=stretched core={core}")?,
    }
    for (r, v) in g.nodes().iter().zip(field.values()) {
        writeln!(out, "{r:.17e} {v:.17e}")?;
    }
    out.flush()?;
    Ok(())
}

fn header_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.trim_start_matches('#')
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|t| t.strip_prefix('=')))
}

/// Reads a radial field. Without a spacing comment the nodes themselves
/// decide: a uniform grid is assumed and checked against the file.
pub fn read_radial(path: &Path) -> Result<RadialField> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut d = None;
    let mut n = None;
    let mut r_max = None;
    let mut spacing = Spacing::Uniform;
    let mut rs = Vec::new();
    let mut vals = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if t.starts_with('#') {
            if let Some(v) = header_value(t, "d") {
                d = Some(v.parse::<usize>().map_err(|e| Error::Format(e.to_string()))?);
            }
            if let Some(v) = header_value(t, "n") {
                n = Some(v.parse::<usize>().map_err(|e| Error::Format(e.to_string()))?);
            }
            if let Some(v) = header_value(t, "r_max") {
                r_max = Some(v.parse::<f64>().map_err(|e| Error::Format(e.to_string()))?);
            }
            if header_value(t, "spacing") == Some("stretched") {
                let core = header_value(t, "core")
                    .ok_or_else(|| Error::Format("stretched spacing without core".into()))?
                    .parse::<f64>()
                    .map_err(|e| Error::Format(e.to_string()))?;
                spacing = Spacing::Stretched { core };
            }
            continue;
        }
        let mut it = t.split_whitespace();
        let (Some(a), Some(b)) = (it.next(), it.next()) else {
            return Err(Error::Format(format!("bad data line: {t}")));
        };
        rs.push(a.parse::<f64>().map_err(|e| Error::Format(e.to_string()))?);
        vals.push(b.parse::<f64>().map_err(|e| Error::Format(e.to_string()))?);
    }
    let (Some(d), Some(n), Some(r_max)) = (d, n, r_max) else {
        return Err(Error::Format("missing `# d= n= r_max=` header".into()));
    };
    if vals.len() != n {
        return Err(Error::Format(format!("header says n={n}, found {} rows", vals.len())));
    }
    let grid = Arc::new(RadialGrid::new(RadialGridSpec {
        d,
        r_max,
        n,
        spacing,
    })?);
    for (a, b) in rs.iter().zip(grid.nodes()) {
        if (a - b).abs() > 1e-9 * b.max(1.0) {
            return Err(Error::Format(format!("node {a} does not match grid node {b}")));
        }
    }
    Field::new(grid, vals)
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    grid: BoxGridSpec,
    dtype: String,
    order: String,
    len: usize,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

/// Writes `path` (raw `f64` LE, x slowest) and `path.json`.
pub fn write_box(path: &Path, field: &Field3D) -> Result<()> {
    let mut bytes = Vec::with_capacity(field.values().len() * 8);
    for v in field.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    let side = Sidecar {
        grid: field.grid().spec(),
        dtype: "float64-le".into(),
        order: "x-major (index = (i*m + j)*m + k)".into(),
        len: field.values().len(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
    Ok(())
}

pub fn read_box(path: &Path) -> Result<Field3D> {
    let side: Sidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let bytes = fs::read(path)?;
    if bytes.len() != side.len * 8 {
        return Err(Error::Format(format!(
            "expected {} bytes, found {}",
            side.len * 8,
            bytes.len()
        )));
    }
    let vals = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Field::new(side.grid.build()?, vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = RadialGridSpec::default_for(5).build().unwrap();
        let f = Field::new(g.clone(), g.sample(|r| (-r).exp())).unwrap();
        let p = dir.path().join("f.txt");
        write_radial(&p, &f).unwrap();
        let back = read_radial(&p).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.grid().spec(), g.spec());
        let first = fs::read_to_string(&p).unwrap();
        assert!(first.starts_with("# d=5 n=4096 r_max=200\n"));
    }

    #[test]
    fn box_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = BoxGridSpec {
            half_width: 5.0,
            m: 16,
            spacing: Spacing::Uniform,
        }
        .build()
        .unwrap();
        let f = Field::new(g.clone(), g.sample(|p| p[0] - 2.0 * p[2])).unwrap();
        let p = dir.path().join("f.bin");
        write_box(&p, &f).unwrap();
        let back = read_box(&p).unwrap();
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn rejects_truncated_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.txt");
        fs::write(&p, "# d=3 n=20 r_max=1\n0.1 1.0\n").unwrap();
        assert!(matches!(read_radial(&p), Err(Error::Format(_))));
    }
}
