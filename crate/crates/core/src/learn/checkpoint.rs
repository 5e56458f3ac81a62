//! Binary network checkpoints.
//!
//! Layout: 8-byte magic, `u32` version, `u32` width, `u32` history length,
//! `u64` parameter count, then the parameters as little-endian `f64`.

use std::path::Path;

use super::net::ActorCritic;
use super::LearnError;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"PDTSPNET";
pub const CHECKPOINT_VERSION: u32 = 1;

const HEADER: usize = 8 + 4 + 4 + 4 + 8;

pub fn to_bytes(net: &ActorCritic) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + 8 * net.params().len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(net.width() as u32).to_le_bytes());
    out.extend_from_slice(&(net.history() as u32).to_le_bytes());
    out.extend_from_slice(&(net.params().len() as u64).to_le_bytes());
    for p in net.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<ActorCritic, LearnError> {
    let bad = |m: &str| LearnError::Checkpoint(m.to_string());
    if bytes.len() < HEADER || &bytes[..8] != CHECKPOINT_MAGIC {
        return Err(bad("not a checkpoint file"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let version = u32_at(8);
    if version != CHECKPOINT_VERSION {
        return Err(LearnError::Checkpoint(format!("unsupported version {version}")));
    }
    let (width, history) = (u32_at(12) as usize, u32_at(16) as usize);
    let count = u64::from_le_bytes(bytes[20..28].try_into().expect("8 bytes")) as usize;
    if bytes.len() != HEADER + 8 * count {
        return Err(bad("truncated or oversized parameter block"));
    }
    let params = bytes[HEADER..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    ActorCritic::from_params(width, history, params)
}

pub fn save_checkpoint(net: &ActorCritic, path: impl AsRef<Path>) -> Result<(), LearnError> {
    std::fs::write(path, to_bytes(net))?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ActorCritic, LearnError> {
    from_bytes(&std::fs::read(path)?)
}
