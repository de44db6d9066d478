//! Binary cache of an enumerated quotient.
//!
//! Layout: the 8-byte magic, the level as `u32` LE, the order as `u64` LE,
//! then `order * level` diagonal encodings as `u32` LE in canonical order.

use std::fs;
use std::io;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::QuotientGroup;
use crate::gf2::SBlock;

pub const CACHE_MAGIC: &[u8; 8] = b"KQCACHE1";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache i/o: {0}")]
    Io(#[from] io::Error),
    #[error("cache is malformed: {0}")]
    Malformed(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CacheHeader {
    pub level: u32,
    pub order: u64,
}

pub fn encode_cache(q: &QuotientGroup) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + 4 * q.flat().len());
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&(q.level() as u32).to_le_bytes());
    out.extend_from_slice(&(q.order() as u64).to_le_bytes());
    for d in q.flat() {
        out.extend_from_slice(&d.bits().to_le_bytes());
    }
    out
}

pub fn decode_cache(bytes: &[u8]) -> Result<QuotientGroup, CacheError> {
    if bytes.len() < 20 || &bytes[..8] != CACHE_MAGIC {
        return Err(CacheError::Malformed("bad magic"));
    }
    let level = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let order = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let body = &bytes[20..];
    if body.len() != 4 * level * order {
        return Err(CacheError::Malformed("length does not match header"));
    }
    let flat: Vec<SBlock> = body
        .chunks_exact(4)
        .map(|c| SBlock::from_bits(u32::from_le_bytes(c.try_into().unwrap())))
        .collect();
    if flat.iter().any(|d| d.bits() >> SBlock::BITS != 0) {
        return Err(CacheError::Malformed("diagonal wider than 27 bits"));
    }
    let sorted = flat
        .chunks(level.max(1))
        .zip(flat.chunks(level.max(1)).skip(1))
        .all(|(a, b)| a.iter().map(|d| d.bits()).lt(b.iter().map(|d| d.bits())));
    if level > 0 && !sorted {
        return Err(CacheError::Malformed("encodings not strictly sorted"));
    }
    if order == 0 || (level == 0 && order != 1) {
        return Err(CacheError::Malformed("impossible order"));
    }
    if flat.iter().take(level).any(|d| !d.is_zero()) {
        return Err(CacheError::Malformed("identity is not ordinal 0"));
    }
    Ok(QuotientGroup::from_sorted_flat(level, order, flat))
}

/// Writes the cache and returns its SHA-256 in hex.
pub fn write_cache(q: &QuotientGroup, path: &Path) -> Result<String, CacheError> {
    let bytes = encode_cache(q);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, &bytes)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Reads a cache, returning the group and the file's SHA-256 in hex.
pub fn read_cache(path: &Path) -> Result<(QuotientGroup, String), CacheError> {
    let bytes = fs::read(path)?;
    let q = decode_cache(&bytes)?;
    Ok((q, hex::encode(Sha256::digest(&bytes))))
}

pub fn cache_header(bytes: &[u8]) -> Result<CacheHeader, CacheError> {
    if bytes.len() < 20 || &bytes[..8] != CACHE_MAGIC {
        return Err(CacheError::Malformed("bad magic"));
    }
    Ok(CacheHeader {
        level: u32::from_le_bytes(bytes[8..12].try_into().unwrap()),
        order: u64::from_le_bytes(bytes[12..20].try_into().unwrap()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let q = QuotientGroup::enumerate(3).unwrap();
        let bytes = encode_cache(&q);
        assert_eq!(
            cache_header(&bytes).unwrap(),
            CacheHeader { level: 3, order: 128 }
        );
        assert_eq!(decode_cache(&bytes).unwrap(), q);
    }

    #[test]
    fn corrupt_caches_are_rejected() {
        let q = QuotientGroup::enumerate(2).unwrap();
        let mut bytes = encode_cache(&q);
        bytes.pop();
        assert!(decode_cache(&bytes).is_err());
        let mut bytes = encode_cache(&q);
        // swap the last two elements
        let n = bytes.len();
        let (a, b) = (n - 16, n - 8);
        for i in 0..8 {
            bytes.swap(a + i, b + i);
        }
        assert!(decode_cache(&bytes).is_err());
        let mut bytes = encode_cache(&q);
        bytes[0] = b'X';
        assert!(decode_cache(&bytes).is_err());
    }

    #[test]
    fn level_zero_cache() {
        let q = QuotientGroup::enumerate(0).unwrap();
        assert_eq!(decode_cache(&encode_cache(&q)).unwrap(), q);
    }
}
