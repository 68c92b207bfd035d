//! Binary field files.
//!
//! Layout: a 12-byte header of three little-endian `u32` values `(n, N, p)`,
//! then `p` blocks of `Nⁿ` complex coefficients in storage order (row-major,
//! FFT order along each axis), each coefficient as `(re, im)` little-endian
//! `f64` (complex128) or `f32` (complex64). A JSON manifest with the same
//! header fields plus `dtype` and `ordering` is written next to the file as
//! `<path>.json`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Grid, SpectralField, VectorField};
use crate::error::{Error, Result};

const HEADER_LEN: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    Complex64,
    Complex128,
}

impl Dtype {
    fn bytes(self) -> usize {
        match self {
            Dtype::Complex64 => 8,
            Dtype::Complex128 => 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub n: u32,
    #[serde(rename = "N")]
    pub modes: u32,
    pub p: u32,
    pub dtype: Dtype,
    pub ordering: String,
}

pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode(field: &VectorField, dtype: Dtype) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + field.p() * g.len() * dtype.bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.size() as u32).to_le_bytes());
    out.extend_from_slice(&(field.p() as u32).to_le_bytes());
    for comp in field.components() {
        for c in comp.coeffs() {
            match dtype {
                Dtype::Complex128 => {
                    out.extend_from_slice(&c.re.to_le_bytes());
                    out.extend_from_slice(&c.im.to_le_bytes());
                }
                Dtype::Complex64 => {
                    out.extend_from_slice(&(c.re as f32).to_le_bytes());
                    out.extend_from_slice(&(c.im as f32).to_le_bytes());
                }
            }
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<(VectorField, Dtype)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Config("field file shorter than its header".into()));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[4 * k..4 * k + 4].try_into().unwrap()) as usize;
    let (n, size, p) = (word(0), word(1), word(2));
    let grid = Grid::new(n, size)?;
    if p == 0 {
        return Err(Error::Config("field file declares zero components".into()));
    }
    let count = p * grid.len();
    let body = &bytes[HEADER_LEN..];
    let dtype = if body.len() == count * 16 {
        Dtype::Complex128
    } else if body.len() == count * 8 {
        Dtype::Complex64
    } else {
        return Err(Error::ShapeMismatch {
            expected: count * 16,
            got: body.len(),
        });
    };
    let mut values = Vec::with_capacity(count);
    for chunk in body.chunks_exact(dtype.bytes()) {
        let c = match dtype {
            Dtype::Complex128 => Complex64::new(
                f64::from_le_bytes(chunk[..8].try_into().unwrap()),
                f64::from_le_bytes(chunk[8..].try_into().unwrap()),
            ),
            Dtype::Complex64 => Complex64::new(
                f32::from_le_bytes(chunk[..4].try_into().unwrap()) as f64,
                f32::from_le_bytes(chunk[4..].try_into().unwrap()) as f64,
            ),
        };
        values.push(c);
    }
    let comps = values
        .chunks_exact(grid.len())
        .map(|c| SpectralField::from_coeffs(grid, c.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok((VectorField::new(comps)?, dtype))
}

pub fn write_field(path: &Path, field: &VectorField, dtype: Dtype) -> Result<()> {
    fs::write(path, encode(field, dtype))?;
    let g = field.grid();
    let manifest = Manifest {
        n: g.dim() as u32,
        modes: g.size() as u32,
        p: field.p() as u32,
        dtype,
        ordering: "row-major, fft order per axis".into(),
    };
    fs::write(manifest_path(path), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

/// Read a field file; the manifest, when present, must agree with the header.
pub fn read_field(path: &Path) -> Result<VectorField> {
    let bytes = fs::read(path)?;
    let (field, dtype) = decode(&bytes)?;
    let mpath = manifest_path(path);
    if mpath.exists() {
        let m: Manifest = serde_json::from_str(&fs::read_to_string(&mpath)?)?;
        let g = field.grid();
        if m.n as usize != g.dim() || m.modes as usize != g.size() || m.p as usize != field.p() || m.dtype != dtype {
            return Err(Error::Config(format!(
                "manifest {} disagrees with the binary header",
                mpath.display()
            )));
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::trial_rng;

    #[test]
    fn roundtrip_both_dtypes() {
        let g = Grid::new(2, 8).unwrap();
        let mut rng = trial_rng(11, 0);
        let f = VectorField::random(g, 2, &mut rng);
        let (back, d) = decode(&encode(&f, Dtype::Complex128)).unwrap();
        assert_eq!(d, Dtype::Complex128);
        assert_eq!(back, f);
        let (back, d) = decode(&encode(&f, Dtype::Complex64)).unwrap();
        assert_eq!(d, Dtype::Complex64);
        for (a, b) in back.components().iter().zip(f.components()) {
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                assert!((x - y).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn header_layout_is_fixed() {
        let g = Grid::new(1, 4).unwrap();
        let f = VectorField::zeros(g, 1);
        let bytes = encode(&f, Dtype::Complex128);
        assert_eq!(&bytes[..12], &[1, 0, 0, 0, 4, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(bytes.len(), 12 + 4 * 16);
    }

    #[test]
    fn truncated_body_is_rejected() {
        let g = Grid::new(1, 4).unwrap();
        let mut bytes = encode(&VectorField::zeros(g, 1), Dtype::Complex128);
        bytes.pop();
        assert!(decode(&bytes).is_err());
        assert!(decode(&bytes[..5]).is_err());
    }

    #[test]
    fn file_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.bin");
        let g = Grid::new(1, 16).unwrap();
        let f = VectorField::random(g, 3, &mut trial_rng(1, 2));
        write_field(&path, &f, Dtype::Complex128).unwrap();
        assert!(manifest_path(&path).exists());
        assert_eq!(read_field(&path).unwrap(), f);
        fs::write(manifest_path(&path), r#"{"n":1,"N":16,"p":2,"dtype":"complex128","ordering":"x"}"#).unwrap();
        assert!(read_field(&path).is_err());
    }
}
