//! Feature-matrix dump formats used for caching and interchange.
//!
//! Binary layout (all integers and floats little-endian):
//! `b"MBFX"`, u32 version, u64 params hash, u32 id length, id bytes (UTF-8),
//! u64 rows, u64 cols, then rows×cols f64 values row-major.

use crate::linalg::Mat;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"MBFX";

/// Identifies what produced a feature matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMeta {
    pub featurizer_id: String,
    pub version: u32,
    pub params_hash: u64,
}

/// CSV dump with a comment header carrying featurizer id, version and the
/// params hash.
pub fn export_csv(path: &Path, x: &Mat, meta: &FeatureMeta) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "# molbench-features v{} id={} params={:016x}",
        meta.version, meta.featurizer_id, meta.params_hash
    )?;
    for r in 0..x.rows() {
        let row: Vec<String> = x.row(r).iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

pub fn export_binary(path: &Path, x: &Mat, meta: &FeatureMeta) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&meta.version.to_le_bytes())?;
    w.write_all(&meta.params_hash.to_le_bytes())?;
    let id = meta.featurizer_id.as_bytes();
    w.write_all(&(id.len() as u32).to_le_bytes())?;
    w.write_all(id)?;
    w.write_all(&(x.rows() as u64).to_le_bytes())?;
    w.write_all(&(x.cols() as u64).to_le_bytes())?;
    for v in x.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()
}

pub fn import_binary(path: &Path) -> io::Result<(Mat, FeatureMeta)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "bad magic"));
    }
    let version = read_u32(&mut r)?;
    let params_hash = read_u64(&mut r)?;
    let id_len = read_u32(&mut r)? as usize;
    let mut id = vec![0u8; id_len];
    r.read_exact(&mut id)?;
    let featurizer_id = String::from_utf8(id)
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, "bad id"))?;
    let rows = read_u64(&mut r)? as usize;
    let cols = read_u64(&mut r)? as usize;
    let mut data = vec![0.0; rows * cols];
    let mut buf = [0u8; 8];
    for v in data.iter_mut() {
        r.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    Ok((
        Mat::from_vec(rows, cols, data),
        FeatureMeta {
            featurizer_id,
            version,
            params_hash,
        },
    ))
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.mbfx");
        let x = Mat::from_rows(&[vec![1.5, -2.0], vec![0.0, 3.25]]);
        let meta = FeatureMeta {
            featurizer_id: "ecfp".into(),
            version: FORMAT_VERSION,
            params_hash: 0xdead_beef,
        };
        export_binary(&path, &x, &meta).unwrap();
        let (x2, meta2) = import_binary(&path).unwrap();
        assert_eq!(x, x2);
        assert_eq!(meta, meta2);
    }

    #[test]
    fn csv_header_present() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let x = Mat::from_rows(&[vec![1.0, 2.0]]);
        let meta = FeatureMeta {
            featurizer_id: "graph".into(),
            version: FORMAT_VERSION,
            params_hash: 7,
        };
        export_csv(&path, &x, &meta).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# molbench-features v1 id=graph"));
        assert!(text.contains("1,2"));
    }
}
