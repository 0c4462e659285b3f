//! On-disk formats: spectral snapshots, physical grids, PGM previews, CSV.
//!
//! The two binary formats are little-endian with a 4-byte magic, chosen so
//! a snapshot can be reloaded bit for bit. Writers take `io::Write` so the
//! same code serves files, pipes, and in-memory buffers.

use std::borrow::Cow;
use std::io::{Read, Write};

use crate::field::{PhysicalGrid, SpectralField};
use crate::lattice::WavenumberLattice;
use crate::{Error, Result};

const SPECTRAL_MAGIC: &[u8; 4] = b"SPF1";
const GRID_MAGIC: &[u8; 4] = b"GRD1";

/// Layout: magic, domain length (f64), truncation (u32), coefficient count
/// (u32), then the coefficients in lattice order.
pub fn write_spectral<W: Write>(w: &mut W, field: &SpectralField) -> Result<()> {
    let lattice = field.lattice();
    w.write_all(SPECTRAL_MAGIC)?;
    w.write_all(&lattice.domain_len().to_le_bytes())?;
    w.write_all(&(lattice.trunc() as u32).to_le_bytes())?;
    w.write_all(&(lattice.len() as u32).to_le_bytes())?;
    for c in field.coeffs() {
        w.write_all(&c.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_spectral<R: Read>(r: &mut R) -> Result<SpectralField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SPECTRAL_MAGIC {
        return Err(Error::Format(format!(
            "bad spectral magic {magic:?}, expected {SPECTRAL_MAGIC:?}"
        )));
    }
    let domain_len = read_f64(r)?;
    let trunc = read_u32(r)?;
    let count = read_u32(r)? as usize;
    let lattice = WavenumberLattice::new(domain_len, trunc as i32)?;
    if count != lattice.len() {
        return Err(Error::Format(format!(
            "coefficient count {count} does not match truncation {trunc} (needs {})",
            lattice.len()
        )));
    }
    let mut coeffs = Vec::with_capacity(count);
    for _ in 0..count {
        coeffs.push(read_f64(r)?);
    }
    Ok(SpectralField::from_coeffs(&lattice, coeffs))
}

/// Layout: magic, domain length (f64), side length n (u32), then n^2
/// row-major values.
pub fn write_grid<W: Write>(w: &mut W, grid: &PhysicalGrid) -> Result<()> {
    w.write_all(GRID_MAGIC)?;
    w.write_all(&grid.domain_len.to_le_bytes())?;
    w.write_all(&(grid.n as u32).to_le_bytes())?;
    for v in &grid.values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_grid<R: Read>(r: &mut R) -> Result<PhysicalGrid> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != GRID_MAGIC {
        return Err(Error::Format(format!(
            "bad grid magic {magic:?}, expected {GRID_MAGIC:?}"
        )));
    }
    let domain_len = read_f64(r)?;
    let n = read_u32(r)? as usize;
    if !(domain_len.is_finite() && domain_len > 0.0) {
        return Err(Error::Format(format!("bad domain length {domain_len}")));
    }
    let mut values = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        values.push(read_f64(r)?);
    }
    Ok(PhysicalGrid::new(domain_len, n, values))
}

/// 8-bit binary PGM, min-max normalized; a flat field renders as black.
pub fn write_pgm<W: Write>(w: &mut W, grid: &PhysicalGrid) -> Result<()> {
    let lo = grid.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = grid.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    write!(w, "P5\n{} {}\n255\n", grid.n, grid.n)?;
    let mut bytes = Vec::with_capacity(grid.values.len());
    for v in &grid.values {
        let level = if span > 0.0 {
            ((v - lo) / span * 255.0).round() as u8
        } else {
            0
        };
        bytes.push(level);
    }
    w.write_all(&bytes)?;
    Ok(())
}

/// Quote a CSV field when it holds a comma, quote, or newline.
pub fn csv_escape(field: &str) -> Cow<'_, str> {
    if field.contains(['"', ',', '\n', '\r']) {
        Cow::Owned(format!("\"{}\"", field.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(field)
    }
}

pub fn write_csv_row<W: Write, S: AsRef<str>>(w: &mut W, fields: &[S]) -> Result<()> {
    let mut first = true;
    for f in fields {
        if !first {
            w.write_all(b",")?;
        }
        first = false;
        w.write_all(csv_escape(f.as_ref()).as_bytes())?;
    }
    w.write_all(b"\n")?;
    Ok(())
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_round_trip_is_exact() {
        let lattice = WavenumberLattice::new(2.0 * std::f64::consts::PI, 5).unwrap();
        let coeffs: Vec<f64> = (0..lattice.len())
            .map(|i| (i as f64 * 0.37).sin() * 1e3 + f64::EPSILON * i as f64)
            .collect();
        let field = SpectralField::from_coeffs(&lattice, coeffs.clone());
        let mut buf = Vec::new();
        write_spectral(&mut buf, &field).unwrap();
        let back = read_spectral(&mut buf.as_slice()).unwrap();
        assert_eq!(back.coeffs(), coeffs.as_slice());
        assert_eq!(back.lattice().trunc(), 5);
        assert_eq!(back.lattice().domain_len(), lattice.domain_len());
    }

    #[test]
    fn spectral_rejects_wrong_magic_and_count() {
        let lattice = WavenumberLattice::new(1.0, 2).unwrap();
        let field = SpectralField::zeros(&lattice);
        let mut buf = Vec::new();
        write_spectral(&mut buf, &field).unwrap();
        buf[0] = b'X';
        assert!(read_spectral(&mut buf.as_slice()).is_err());

        let mut buf = Vec::new();
        write_spectral(&mut buf, &field).unwrap();
        // corrupt the count word
        buf[16] = buf[16].wrapping_add(1);
        assert!(read_spectral(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn grid_round_trip_is_exact() {
        let values: Vec<f64> = (0..9).map(|i| i as f64 - 4.5).collect();
        let grid = PhysicalGrid::new(3.0, 3, values.clone());
        let mut buf = Vec::new();
        write_grid(&mut buf, &grid).unwrap();
        let back = read_grid(&mut buf.as_slice()).unwrap();
        assert_eq!(back.values, values);
        assert_eq!(back.n, 3);
        assert_eq!(back.domain_len, 3.0);
    }

    #[test]
    fn truncated_stream_is_an_error_not_a_panic() {
        let grid = PhysicalGrid::new(1.0, 2, vec![0.0; 4]);
        let mut buf = Vec::new();
        write_grid(&mut buf, &grid).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_grid(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn pgm_header_and_normalization() {
        let grid = PhysicalGrid::new(1.0, 2, vec![-1.0, 0.0, 1.0, 3.0]);
        let mut buf = Vec::new();
        write_pgm(&mut buf, &grid).unwrap();
        assert!(buf.starts_with(b"P5\n2 2\n255\n"));
        let pixels = &buf[buf.len() - 4..];
        assert_eq!(pixels[0], 0);
        assert_eq!(pixels[3], 255);
        assert_eq!(pixels[1], 64);

        let flat = PhysicalGrid::new(1.0, 2, vec![7.0; 4]);
        let mut buf = Vec::new();
        write_pgm(&mut buf, &flat).unwrap();
        assert!(buf.ends_with(&[0, 0, 0, 0]));
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_escape("plain"), "plain");
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
        let mut buf = Vec::new();
        write_csv_row(&mut buf, &["x", "1,2", "3"]).unwrap();
        assert_eq!(buf, b"x,\"1,2\",3\n");
    }
}
