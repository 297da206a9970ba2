//! MLSNAP1 binary snapshots.
//!
//! Layout, all little-endian:
//! `b"MLSNAP1\0"`, `nx ny nz: u32`, `gamma eps time: f64`, then the coefficient blocks
//! ξ (`nx·ny`), v₁ and v₂ (`nx·ny·nz` each) as `(re, im)` pairs of `f64`, in storage order.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField2, ScalarField3, VectorField3};

pub const MAGIC: &[u8; 8] = b"MLSNAP1\0";

/// Contents of one snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub gamma: f64,
    pub eps: f64,
    pub time: f64,
    pub xi: ScalarField2,
    pub v: VectorField3,
}

fn write_block<W: Write>(w: &mut W, data: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(16 * data.len());
    for c in data {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_block<R: Read>(r: &mut R, n: usize) -> Result<Vec<Complex64>> {
    let mut buf = vec![0u8; 16 * n];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated coefficient block: {e}")))?;
    Ok(buf
        .chunks_exact(16)
        .map(|b| {
            let re = f64::from_le_bytes(b[..8].try_into().unwrap());
            let im = f64::from_le_bytes(b[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    Ok(f64::from_le_bytes(b))
}

impl Snapshot {
    pub fn write<W: Write>(&self, w: &mut W) -> Result<()> {
        let (nx, ny, nz) = self.v.dims();
        if self.xi.dims() != (nx, ny) {
            return Err(Error::Shape("xi and v grids differ".into()));
        }
        w.write_all(MAGIC)?;
        for n in [nx, ny, nz] {
            w.write_all(&(n as u32).to_le_bytes())?;
        }
        for x in [self.gamma, self.eps, self.time] {
            w.write_all(&x.to_le_bytes())?;
        }
        write_block(w, self.xi.coeffs())?;
        write_block(w, self.v.x.coeffs())?;
        write_block(w, self.v.y.coeffs())?;
        Ok(())
    }

    pub fn read<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|e| Error::Format(format!("missing magic: {e}")))?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic, not an MLSNAP1 file".into()));
        }
        let nx = read_u32(r)? as usize;
        let ny = read_u32(r)? as usize;
        let nz = read_u32(r)? as usize;
        let gamma = read_f64(r)?;
        let eps = read_f64(r)?;
        let time = read_f64(r)?;
        let xi = ScalarField2::from_coefficients(nx, ny, read_block(r, nx * ny)?);
        let v1 = ScalarField3::from_coefficients(nx, ny, nz, read_block(r, nx * ny * nz)?);
        let v2 = ScalarField3::from_coefficients(nx, ny, nz, read_block(r, nx * ny * nz)?);
        Ok(Snapshot {
            gamma,
            eps,
            time,
            xi,
            v: VectorField3::new(v1, v2),
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read(&mut f)
    }
}
