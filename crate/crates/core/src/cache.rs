//! Binary on-disk cache of enumerated cube bases.
//!
//! Layout (little endian): magic `CUBEHOM\0`, version byte, graph hash (u64),
//! d (u8), restriction tag (u8), restriction key (u64), count (u64), then
//! `count · 2^d` labels as u32.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::cube::{enumerate_cubes, CubeBasis, EnumOptions, Restriction};
use crate::error::{Error, Result};
use crate::graph::Graph;

const MAGIC: &[u8; 8] = b"CUBEHOM\0";
const VERSION: u8 = 1;
const HEADER_LEN: usize = 8 + 1 + 8 + 1 + 1 + 8 + 8;

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "CUBEHOM_CACHE_DIR";

fn tag_byte(r: &Restriction) -> u8 {
    match r {
        Restriction::All => 0,
        Restriction::TwoPoint => 1,
        Restriction::Subgraphs(_) => 2,
        Restriction::Subset(_) => 3,
    }
}

pub fn cache_path(dir: &Path, g: &Graph, d: usize, r: &Restriction) -> PathBuf {
    dir.join(format!(
        "{:016x}-d{d}-{}-{:016x}.cubes",
        g.content_hash(),
        r.tag(),
        r.key()
    ))
}

pub fn encode(g: &Graph, r: &Restriction, basis: &CubeBasis) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + basis.flat().len() * 4);
    buf.extend_from_slice(MAGIC);
    buf.push(VERSION);
    buf.extend_from_slice(&g.content_hash().to_le_bytes());
    buf.push(basis.dim() as u8);
    buf.push(tag_byte(r));
    buf.extend_from_slice(&r.key().to_le_bytes());
    buf.extend_from_slice(&(basis.len() as u64).to_le_bytes());
    for &l in basis.flat() {
        buf.extend_from_slice(&l.to_le_bytes());
    }
    buf
}

pub fn decode(bytes: &[u8], g: &Graph, d: usize, r: &Restriction) -> Result<CubeBasis> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(Error::Cache("not a cube cache file".into()));
    }
    if bytes[8] != VERSION {
        return Err(Error::Cache(format!(
            "unsupported cache version {}",
            bytes[8]
        )));
    }
    let u64_at = |off: usize| u64::from_le_bytes(bytes[off..off + 8].try_into().expect("8 bytes"));
    if u64_at(9) != g.content_hash() {
        return Err(Error::Cache("graph hash mismatch".into()));
    }
    if bytes[17] as usize != d || bytes[18] != tag_byte(r) || u64_at(19) != r.key() {
        return Err(Error::Cache("dimension or restriction mismatch".into()));
    }
    let count = u64_at(27) as usize;
    let body = &bytes[HEADER_LEN..];
    if body.len() != count * (4 << d) {
        return Err(Error::Cache("truncated cache file".into()));
    }
    let flat = body
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    CubeBasis::from_sorted_flat(d, flat).map_err(|e| Error::Cache(e.to_string()))
}

pub fn load(path: &Path, g: &Graph, d: usize, r: &Restriction) -> Result<CubeBasis> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
    decode(&bytes, g, d, r)
}

pub fn store(path: &Path, g: &Graph, r: &Restriction, basis: &CubeBasis) -> Result<()> {
    let io = |e: std::io::Error| Error::Cache(format!("{}: {e}", path.display()));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io)?;
    }
    let tmp = path.with_extension("tmp");
    fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(&encode(g, r, basis)))
        .map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Enumerates through the cache in `dir` when given: a valid cache file is
/// reused, otherwise the basis is computed and written back. Unreadable cache
/// files are ignored and overwritten.
pub fn enumerate_cached(
    g: &Graph,
    d: usize,
    r: &Restriction,
    opts: EnumOptions,
    dir: Option<&Path>,
) -> Result<CubeBasis> {
    let Some(dir) = dir else {
        return enumerate_cubes(g, d, r, opts);
    };
    let path = cache_path(dir, g, d, r);
    if path.exists() {
        if let Ok(b) = load(&path, g, d, r) {
            return Ok(b);
        }
    }
    let basis = enumerate_cubes(g, d, r, opts)?;
    store(&path, g, r, &basis)?;
    Ok(basis)
}
