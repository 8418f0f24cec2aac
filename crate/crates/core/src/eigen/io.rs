//! Binary container for [`EigenBasis`].
//!
//! All integers and floats are little-endian:
//! ```text
//! [0..8)    magic b"SPIBASIS"
//! [8..16)   width X  (u64)
//! [16..24)  height Y (u64)
//! [24..32)  K_avail  (u64)
//! then      K_avail eigenvalues (f64)
//! then      K_avail × X·Y basis entries, row-major (f64)
//! then      X·Y column means (f64)
//! ```

use std::fs;
use std::path::Path;

use super::EigenBasis;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const BASIS_MAGIC: &[u8; 8] = b"SPIBASIS";
const HEADER_LEN: usize = 32;

impl EigenBasis {
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.pixels();
        let k = self.len();
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * (k + k * n + n));
        out.extend_from_slice(BASIS_MAGIC);
        for v in [self.width, self.height, k] {
            out.extend_from_slice(&(v as u64).to_le_bytes());
        }
        for v in self
            .eigenvalues
            .iter()
            .chain(self.vectors.as_slice())
            .chain(&self.mean)
        {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN || &bytes[..8] != BASIS_MAGIC {
            return Err(Error::BasisFormat("missing SPIBASIS header".into()));
        }
        let word = |i: usize| -> Result<usize> {
            let v = u64::from_le_bytes(bytes[8 + 8 * i..16 + 8 * i].try_into().unwrap());
            usize::try_from(v)
                .map_err(|_| Error::BasisFormat(format!("header field {v} too large")))
        };
        let (width, height, k) = (word(0)?, word(1)?, word(2)?);
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Error::BasisFormat("dimensions overflow".into()))?;
        let floats = k
            .checked_mul(n)
            .and_then(|kn| kn.checked_add(k + n))
            .ok_or_else(|| Error::BasisFormat("dimensions overflow".into()))?;
        let expected = HEADER_LEN + 8 * floats;
        if bytes.len() != expected {
            return Err(Error::BasisFormat(format!(
                "expected {expected} bytes, found {}",
                bytes.len()
            )));
        }
        let mut values = bytes[HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let eigenvalues: Vec<f64> = values.by_ref().take(k).collect();
        let vectors: Vec<f64> = values.by_ref().take(k * n).collect();
        let mean: Vec<f64> = values.collect();
        Ok(Self {
            vectors: Matrix::from_vec(k, n, vectors),
            eigenvalues,
            mean,
            width,
            height,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::file(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::file(path, e))?;
        Self::from_bytes(&bytes)
    }
}
