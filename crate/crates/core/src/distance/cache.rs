//! Binary on-disk form of a [`DistanceMatrix`].
//!
//! All fields are little-endian:
//!
//! | offset | size      | field                                   |
//! |--------|-----------|-----------------------------------------|
//! | 0      | 8         | magic `TSGDIST\0`                       |
//! | 8      | 4         | format version (`u32`, currently 1)     |
//! | 12     | 8         | number of series `n` (`u64`)            |
//! | 20     | 1         | kind tag: 0 euclidean, 1 dtw, 2 sdtw, 3 mpdist |
//! | 21     | 1         | parameter count `p`                     |
//! | 22     | 8·p       | parameters (`f64`)                      |
//! | 22+8p  | 8·n(n−1)/2 | strict upper triangle, row-major (`f64`) |
//!
//! Parameters are `[gamma]` for sdtw and
//! `[window_fraction, k_fraction, z_normalized (0 or 1)]` for mpdist.
//! The dataset fingerprint is not stored; callers key files by it.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{DistanceKind, DistanceMatrix};
use crate::error::{Error, Result};

pub const CACHE_MAGIC: [u8; 8] = *b"TSGDIST\0";
pub const CACHE_VERSION: u32 = 1;

pub fn encode_matrix(matrix: &DistanceMatrix) -> Vec<u8> {
    let params = matrix.kind().params();
    let upper = matrix.upper_triangle();
    let mut out = Vec::with_capacity(22 + 8 * (params.len() + upper.len()));
    out.extend_from_slice(&CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(&(matrix.n() as u64).to_le_bytes());
    out.push(matrix.kind().tag());
    out.push(params.len() as u8);
    for p in params.iter().chain(&upper) {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < len {
            return Err(Error::Cache("truncated file".into()));
        }
        let (head, tail) = self.bytes.split_at(len);
        self.bytes = tail;
        Ok(head)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("exact length"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
}

pub fn decode_matrix(bytes: &[u8], fingerprint: &str) -> Result<DistanceMatrix> {
    let mut r = Reader { bytes };
    if r.array::<8>()? != CACHE_MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = u32::from_le_bytes(r.array()?);
    if version != CACHE_VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    let n = usize::try_from(u64::from_le_bytes(r.array()?))
        .map_err(|_| Error::Cache("series count overflows".into()))?;
    let [tag] = r.array::<1>()?;
    let [count] = r.array::<1>()?;
    let params = (0..count).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let kind = DistanceKind::from_parts(tag, &params)?;
    let pairs = n
        .checked_mul(n.saturating_sub(1))
        .map(|v| v / 2)
        .ok_or_else(|| Error::Cache("series count overflows".into()))?;
    if r.bytes.len() != pairs * 8 {
        return Err(Error::Cache(format!(
            "expected {} payload bytes, found {}",
            pairs * 8,
            r.bytes.len()
        )));
    }
    let upper = (0..pairs).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    DistanceMatrix::from_upper_triangle(n, &upper, kind, fingerprint)
        .map_err(|e| Error::Cache(e.to_string()))
}

/// Writes atomically: the bytes go to a sibling temp file which is then
/// renamed over `path`.
pub fn write_cache(path: impl AsRef<Path>, matrix: &DistanceMatrix) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&encode_matrix(matrix))?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_cache(path: impl AsRef<Path>, fingerprint: &str) -> Result<DistanceMatrix> {
    decode_matrix(&fs::read(path)?, fingerprint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn sample(kind: DistanceKind) -> DistanceMatrix {
        let upper = [1.0, 2.5, 1e-300, 0.0, 7.25, 3.0];
        DistanceMatrix::from_upper_triangle(4, &upper, kind, "fp").unwrap()
    }

    #[test]
    fn header_layout() {
        let m = sample(DistanceKind::SoftDtwDivergence { gamma: 0.5 });
        let bytes = encode_matrix(&m);
        assert_eq!(&bytes[..8], b"TSGDIST\0");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[12..20].try_into().unwrap()), 4);
        assert_eq!(bytes[20], 2);
        assert_eq!(bytes[21], 1);
        assert_eq!(f64::from_le_bytes(bytes[22..30].try_into().unwrap()), 0.5);
        assert_eq!(bytes.len(), 30 + 6 * 8);
        assert_eq!(f64::from_le_bytes(bytes[30..38].try_into().unwrap()), 1.0);
    }

    #[test]
    fn roundtrip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        for kind in [DistanceKind::Dtw, DistanceKind::mpdist_default()] {
            let m = sample(kind);
            let path = dir.path().join(format!("{}.tsgd", kind.slug()));
            write_cache(&path, &m).unwrap();
            let back = read_cache(&path, "fp").unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn rejects_corruption() {
        let m = sample(DistanceKind::Euclidean);
        let bytes = encode_matrix(&m);
        assert!(matches!(
            decode_matrix(&bytes[..bytes.len() - 1], ""),
            Err(Error::Cache(_))
        ));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_matrix(&bad, ""), Err(Error::Cache(_))));
        let mut bad = bytes.clone();
        bad[8] = 9;
        assert!(matches!(decode_matrix(&bad, ""), Err(Error::Cache(_))));
        let mut bad = bytes;
        bad[20] = 7;
        assert!(matches!(decode_matrix(&bad, ""), Err(Error::Cache(_))));
    }

    #[test]
    fn empty_and_single() {
        let m = DistanceMatrix::new(DMatrix::zeros(1, 1), DistanceKind::Dtw, "").unwrap();
        assert_eq!(decode_matrix(&encode_matrix(&m), "").unwrap(), m);
    }
}
