//! Self-describing binary container for numeric tables.
//!
//! Layout:
//! ```text
//! SATCTL-CONTAINER 1\n
//! {"kind": ..., "meta": {...}, "arrays": [{"name", "dtype", "shape"}, ...], "payload_sha256": ...}\n
//! <payload: arrays back to back, row-major, little-endian>
//! ```
//! `dtype` is `f64le` or `u32le`. The payload hash covers every byte after the header line.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MAGIC: &str = "SATCTL-CONTAINER";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum ArrayData {
    F64(Vec<f64>),
    U32(Vec<u32>),
}

impl ArrayData {
    fn dtype(&self) -> &'static str {
        match self {
            ArrayData::F64(_) => "f64le",
            ArrayData::U32(_) => "u32le",
        }
    }

    fn len(&self) -> usize {
        match self {
            ArrayData::F64(v) => v.len(),
            ArrayData::U32(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ArrayDesc {
    name: String,
    dtype: String,
    shape: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    kind: String,
    meta: serde_json::Value,
    arrays: Vec<ArrayDesc>,
    payload_sha256: String,
}

pub struct ContainerFile {
    pub path: std::path::PathBuf,
    pub meta: serde_json::Value,
    pub arrays: Vec<(String, Vec<usize>, ArrayData)>,
}

impl ContainerFile {
    fn find(&self, name: &str, rank: usize) -> Result<(&Vec<usize>, &ArrayData)> {
        let (_, shape, data) = self
            .arrays
            .iter()
            .find(|(n, _, _)| n == name)
            .ok_or_else(|| self.err(format!("missing array {name}")))?;
        if shape.len() != rank {
            return Err(self.err(format!("array {name} has rank {}, expected {rank}", shape.len())));
        }
        Ok((shape, data))
    }

    fn err(&self, reason: String) -> Error {
        Error::Format { path: self.path.clone(), reason }
    }

    pub fn f64(&self, name: &str, rank: usize) -> Result<(Vec<f64>, Vec<usize>)> {
        match self.find(name, rank)? {
            (shape, ArrayData::F64(v)) => Ok((v.clone(), shape.clone())),
            _ => Err(self.err(format!("array {name} is not f64le"))),
        }
    }

    pub fn u32(&self, name: &str, rank: usize) -> Result<(Vec<u32>, Vec<usize>)> {
        match self.find(name, rank)? {
            (shape, ArrayData::U32(v)) => Ok((v.clone(), shape.clone())),
            _ => Err(self.err(format!("array {name} is not u32le"))),
        }
    }
}

pub fn write(
    path: &Path,
    kind: &str,
    meta: &serde_json::Value,
    arrays: &[(String, Vec<usize>, ArrayData)],
) -> Result<()> {
    let mut payload = Vec::new();
    let mut descs = Vec::with_capacity(arrays.len());
    for (name, shape, data) in arrays {
        if shape.iter().product::<usize>() != data.len() {
            return Err(Error::InvalidInput(format!("array {name}: shape {shape:?} does not match length {}", data.len())));
        }
        match data {
            ArrayData::F64(v) => v.iter().for_each(|x| payload.extend_from_slice(&x.to_le_bytes())),
            ArrayData::U32(v) => v.iter().for_each(|x| payload.extend_from_slice(&x.to_le_bytes())),
        }
        descs.push(ArrayDesc {
            name: name.clone(),
            dtype: data.dtype().into(),
            shape: shape.clone(),
        });
    }
    let header = Header {
        kind: kind.into(),
        meta: meta.clone(),
        arrays: descs,
        payload_sha256: hex(&Sha256::digest(&payload)),
    };
    let mut out = format!("{MAGIC} {VERSION}\n").into_bytes();
    out.extend_from_slice(serde_json::to_string(&header)?.as_bytes());
    out.push(b'\n');
    out.extend_from_slice(&payload);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path, expected_kind: &str) -> Result<ContainerFile> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let fmt = |reason: String| Error::Format { path: path.into(), reason };
    let nl1 = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| fmt("missing magic line".into()))?;
    let magic = std::str::from_utf8(&bytes[..nl1]).map_err(|_| fmt("magic line is not UTF-8".into()))?;
    if magic != format!("{MAGIC} {VERSION}") {
        return Err(fmt(format!("unsupported container signature {magic:?}")));
    }
    let rest = &bytes[nl1 + 1..];
    let nl2 = rest.iter().position(|&b| b == b'\n').ok_or_else(|| fmt("missing header line".into()))?;
    let header: Header = serde_json::from_slice(&rest[..nl2]).map_err(|e| fmt(format!("header: {e}")))?;
    if header.kind != expected_kind {
        return Err(fmt(format!("container holds {:?}, expected {expected_kind:?}", header.kind)));
    }
    let payload = &rest[nl2 + 1..];
    if hex(&Sha256::digest(payload)) != header.payload_sha256 {
        return Err(fmt("payload checksum mismatch".into()));
    }
    let mut off = 0usize;
    let mut arrays = Vec::with_capacity(header.arrays.len());
    for d in header.arrays {
        let n: usize = d.shape.iter().product();
        let width = match d.dtype.as_str() {
            "f64le" => 8,
            "u32le" => 4,
            other => return Err(fmt(format!("unknown dtype {other}"))),
        };
        let end = off + n * width;
        let chunk = payload.get(off..end).ok_or_else(|| fmt(format!("array {} truncated", d.name)))?;
        let data = if width == 8 {
            ArrayData::F64(chunk.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
        } else {
            ArrayData::U32(chunk.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect())
        };
        arrays.push((d.name, d.shape, data));
        off = end;
    }
    if off != payload.len() {
        return Err(fmt("trailing bytes after payload".into()));
    }
    Ok(ContainerFile {
        path: path.into(),
        meta: header.meta,
        arrays,
    })
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_corruption() {
        let dir = std::env::temp_dir().join(format!("satctl-container-{}", std::process::id()));
        let path = dir.join("t.bin");
        let arrays = vec![
            ("a".to_string(), vec![2, 2], ArrayData::F64(vec![0.1, -0.0, f64::MIN_POSITIVE, 1e300])),
            ("b".to_string(), vec![3], ArrayData::U32(vec![0, 7, u32::MAX])),
        ];
        write(&path, "test", &serde_json::json!({"x": 1}), &arrays).unwrap();
        let back = read(&path, "test").unwrap();
        assert_eq!(back.arrays, arrays);
        assert_eq!(back.meta["x"], 1);
        assert!(read(&path, "other").is_err());

        let mut bytes = fs::read(&path).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 1;
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(read(&path, "test"), Err(Error::Format { .. })));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn shape_mismatch_rejected() {
        let arrays = vec![("a".to_string(), vec![3], ArrayData::F64(vec![1.0]))];
        let path = std::env::temp_dir().join("satctl-never-written.bin");
        assert!(write(&path, "test", &serde_json::Value::Null, &arrays).is_err());
    }
}
