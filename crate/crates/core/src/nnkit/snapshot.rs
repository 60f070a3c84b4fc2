//! Parameter snapshot files.
//!
//! Layout, all little-endian: `u64` number of layer sizes, that many `u64`
//! sizes, then the flat `f64` parameter vector.

use std::fs;
use std::path::Path;

use super::{Activation, Mlp};
use crate::{Error, Result};

pub fn encode(mlp: &Mlp) -> Vec<u8> {
    let sizes = mlp.sizes();
    let mut out = Vec::with_capacity(8 * (1 + sizes.len() + mlp.params().len()));
    out.extend_from_slice(&(sizes.len() as u64).to_le_bytes());
    for &s in sizes {
        out.extend_from_slice(&(s as u64).to_le_bytes());
    }
    for &p in mlp.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8], activation: Activation) -> Result<Mlp> {
    if !bytes.len().is_multiple_of(8) {
        return Err(Error::Snapshot(format!(
            "length {} is not a multiple of 8",
            bytes.len()
        )));
    }
    let mut words = bytes
        .chunks_exact(8)
        .map(|c| <[u8; 8]>::try_from(c).expect("chunk of 8"));
    let n = words
        .next()
        .map(u64::from_le_bytes)
        .ok_or_else(|| Error::Snapshot("empty file".into()))? as usize;
    if n > 64 {
        return Err(Error::Snapshot(format!("implausible layer count {n}")));
    }
    let sizes: Vec<usize> = words
        .by_ref()
        .take(n)
        .map(|w| u64::from_le_bytes(w) as usize)
        .collect();
    if sizes.len() != n {
        return Err(Error::Snapshot("truncated layer sizes".into()));
    }
    let params: Vec<f64> = words.map(f64::from_le_bytes).collect();
    Mlp::from_params(&sizes, params, activation)
}

pub fn save(mlp: &Mlp, path: &Path) -> Result<()> {
    fs::write(path, encode(mlp)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load(path: &Path, activation: Activation) -> Result<Mlp> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes, activation)
}
