//! File formats: the raw field dump (32-byte header, little-endian doubles,
//! row-major) and the CSV exports for norms, monitored series, trajectory
//! indices, gauge manifests, and envelopes.

use crate::error::{Error, Result};
use crate::spectral::{Grid2, VecField};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const DUMP_MAGIC: &[u8; 4] = b"CSLF";
const DUMP_VERSION: u32 = 1;
const HEADER_LEN: usize = 32;

/// Write a field dump: magic, version, point count, component count, box
/// side length, reserved padding to 32 bytes, then the samples as
/// little-endian 64-bit floats in row-major point-major order.
pub fn write_field_dump(path: &Path, field: &VecField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(DUMP_MAGIC);
    header[4..8].copy_from_slice(&DUMP_VERSION.to_le_bytes());
    header[8..12].copy_from_slice(&(field.grid.n_points() as u32).to_le_bytes());
    header[12..16].copy_from_slice(&(field.ncomp as u32).to_le_bytes());
    header[16..24].copy_from_slice(&field.grid.side_length().to_le_bytes());
    w.write_all(&header)?;
    for v in &field.data {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field_dump(path: &Path) -> Result<VecField> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    if &header[0..4] != DUMP_MAGIC {
        return Err(Error::Config(format!("{}: not a field dump (bad magic)", path.display())));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != DUMP_VERSION {
        return Err(Error::Config(format!("{}: unsupported dump version {version}", path.display())));
    }
    let n_points = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let ncomp = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    let side = f64::from_le_bytes(header[16..24].try_into().unwrap());
    let n = (n_points as f64).sqrt().round() as usize;
    if n * n != n_points {
        return Err(Error::Config(format!("{}: point count {n_points} is not a square", path.display())));
    }
    let grid = Grid2::new(n, side);
    let mut field = VecField::zeros(&grid, ncomp);
    let mut buf = [0u8; 8];
    for v in field.data.iter_mut() {
        r.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    Ok(field)
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{header}")?;
    for row in rows {
        writeln!(w, "{row}")?;
    }
    w.flush()?;
    Ok(())
}

/// Named scalar norms: columns (name, value).
pub fn write_norms_csv(path: &Path, entries: &[(String, f64)]) -> Result<()> {
    let rows: Vec<String> = entries.iter().map(|(k, v)| format!("{k},{v}")).collect();
    write_csv(path, "name,value", &rows)
}

/// Evolution monitors: columns (t, energy, mass, supdist_Q,
/// residual_if_computed); the residual column is left empty where absent.
pub fn write_series_csv(
    path: &Path,
    t: &[f64],
    energy: &[f64],
    mass: &[f64],
    supdist: &[f64],
    residual: &[Option<f64>],
) -> Result<()> {
    let rows: Vec<String> = (0..t.len())
        .map(|i| {
            let r = residual.get(i).copied().flatten().map(|v| v.to_string()).unwrap_or_default();
            format!("{},{},{},{},{r}", t[i], energy[i], mass[i], supdist[i])
        })
        .collect();
    write_csv(path, "t,energy,mass,supdist_Q,residual_if_computed", &rows)
}

/// Heat trajectory index: columns (level, s, energy, sup_dist_Q).
pub fn write_trajectory_index_csv(
    path: &Path,
    rows: &[(usize, f64, f64, f64)],
) -> Result<()> {
    let rows: Vec<String> = rows
        .iter()
        .map(|(level, s, e, d)| format!("{level},{s},{e},{d}"))
        .collect();
    write_csv(path, "level,s,energy,sup_dist_Q", &rows)
}

/// Gauge manifest: columns (quantity, s_level, file, residual_summary).
pub fn write_gauge_manifest_csv(
    path: &Path,
    rows: &[(String, f64, String, String)],
) -> Result<()> {
    let rows: Vec<String> = rows
        .iter()
        .map(|(q, s, f, r)| format!("{q},{s},{f},{r}"))
        .collect();
    write_csv(path, "quantity,s_level,file,residual_summary", &rows)
}

/// Envelope export: columns (k, sigma, value, delta, iterate_j).
pub fn write_envelope_csv(
    path: &Path,
    rows: &[(i32, f64, f64, f64, usize)],
) -> Result<()> {
    let rows: Vec<String> = rows
        .iter()
        .map(|(k, sigma, value, delta, j)| format!("{k},{sigma},{value},{delta},{j}"))
        .collect();
    write_csv(path, "k,sigma,value,delta,iterate_j", &rows)
}
