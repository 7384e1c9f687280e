//! Versioned checkpoint byte format.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic  "ENSC"              4 bytes
//! version u16 = 1            2 bytes
//! reserved u16 = 0           2 bytes
//! layer count u32            4 bytes
//! layer widths u32 each      4 * count bytes
//! parameter count u64        8 bytes
//! parameters f32 each        4 * params bytes
//! header digest              16 bytes (over everything before the params)
//! ```
//!
//! The reader rejects wrong magic, unsupported versions, truncated
//! payloads, parameter-count/width inconsistencies, and header-digest
//! mismatches.

use alloc::vec::Vec;

use crate::digest::Digest;
use crate::error::{CoreError, Result};

pub const MAGIC: [u8; 4] = *b"ENSC";
pub const VERSION: u16 = 1;

/// Widths and raw parameters decoded from a checkpoint payload.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCheckpoint {
    pub layer_widths: Vec<u32>,
    pub params: Vec<f32>,
}

/// Serializes layer widths and flat parameters to the checkpoint format.
pub fn encode(layer_widths: &[u32], params: &[f32]) -> Result<Vec<u8>> {
    let expected: u64 = layer_widths
        .windows(2)
        .map(|w| (u64::from(w[0]) + 1) * u64::from(w[1]))
        .sum();
    if expected != params.len() as u64 {
        return Err(CoreError::Shape {
            context: "checkpoint parameter count",
            expected: expected as usize,
            got: params.len(),
        });
    }
    let mut out = Vec::with_capacity(20 + 4 * layer_widths.len() + 4 * params.len() + 16);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(layer_widths.len() as u32).to_le_bytes());
    for &w in layer_widths {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&(params.len() as u64).to_le_bytes());
    let header_digest = Digest::of_bytes(&out);
    for &p in params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out.extend_from_slice(&header_digest.0);
    Ok(out)
}

fn need(bytes: &[u8], upto: usize) -> Result<()> {
    if bytes.len() < upto {
        return Err(CoreError::Truncated {
            needed: upto,
            got: bytes.len(),
        });
    }
    Ok(())
}

/// Parses and validates a checkpoint payload.
pub fn decode(bytes: &[u8]) -> Result<RawCheckpoint> {
    need(bytes, 12)?;
    if bytes[..4] != MAGIC {
        return Err(CoreError::BadMagic {
            expected: u32::from_le_bytes(MAGIC),
            got: u32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]),
        });
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(CoreError::BadVersion { got: version });
    }
    let layer_count = u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize;
    let widths_end = 12 + 4 * layer_count;
    need(bytes, widths_end + 8)?;
    let layer_widths: Vec<u32> = (0..layer_count)
        .map(|i| {
            let o = 12 + 4 * i;
            u32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]])
        })
        .collect();
    let param_count = u64::from_le_bytes(bytes[widths_end..widths_end + 8].try_into().unwrap());
    let header_end = widths_end + 8;

    let expected: u64 = layer_widths
        .windows(2)
        .map(|w| (u64::from(w[0]) + 1) * u64::from(w[1]))
        .sum();
    if expected != param_count {
        return Err(CoreError::Shape {
            context: "checkpoint parameter count",
            expected: expected as usize,
            got: param_count as usize,
        });
    }
    let params_end = header_end + 4 * param_count as usize;
    need(bytes, params_end + 16)?;
    let stored_digest = &bytes[params_end..params_end + 16];
    let recomputed = Digest::of_bytes(&bytes[..header_end]);
    if stored_digest != recomputed.0 {
        return Err(CoreError::BadHeaderDigest);
    }
    let params: Vec<f32> = (0..param_count as usize)
        .map(|i| {
            let o = header_end + 4 * i;
            f32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]])
        })
        .collect();
    Ok(RawCheckpoint {
        layer_widths,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (Vec<u32>, Vec<f32>) {
        let widths = alloc::vec![2u32, 3, 2];
        // (2+1)*3 + (3+1)*2 = 17 params.
        let params: Vec<f32> = (0..17).map(|i| i as f32 * 0.5 - 3.0).collect();
        (widths, params)
    }

    #[test]
    fn round_trip_is_exact() {
        let (widths, params) = sample();
        let bytes = encode(&widths, &params).unwrap();
        let decoded = decode(&bytes).unwrap();
        assert_eq!(decoded.layer_widths, widths);
        assert_eq!(decoded.params, params);
    }

    #[test]
    fn rejects_wrong_magic_version_digest_and_truncation() {
        let (widths, params) = sample();
        let good = encode(&widths, &params).unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(CoreError::BadMagic { .. })));

        let mut bad = good.clone();
        bad[4] = 9;
        assert!(matches!(decode(&bad), Err(CoreError::BadVersion { got: 9 })));

        let mut bad = good.clone();
        let last = bad.len() - 1;
        bad[last] ^= 0xff;
        assert!(matches!(decode(&bad), Err(CoreError::BadHeaderDigest)));

        assert!(matches!(
            decode(&good[..good.len() - 20]),
            Err(CoreError::Truncated { .. })
        ));

        // Corrupting a width breaks the declared parameter count first.
        let mut bad = good.clone();
        bad[12] = 77;
        assert!(matches!(decode(&bad), Err(CoreError::Shape { .. })));
    }

    #[test]
    fn param_count_must_match_widths_on_encode() {
        let (widths, mut params) = sample();
        params.pop();
        assert!(matches!(
            encode(&widths, &params),
            Err(CoreError::Shape { .. })
        ));
    }
}
