//! Packed bit containers and hex test-vector files.
//!
//! # Packed bit container (`HDMB`, version 1)
//!
//! ```text
//! magic        4 bytes   "HDMB"
//! version      u16 LE    1
//! source_bits  u64 LE    length of the original information stream
//! payload_bits u64 LE    number of valid payload bits
//! payload      ceil(payload_bits / 8) bytes, MSB-first, zero padded
//! ```
//!
//! An encoded file stores the shaped stream as payload and the unpadded
//! information length as `source_bits`, so decoding can drop the zero
//! padding added to the final block.
//!
//! # Test vectors
//!
//! Plain text, one `(InfoWord, ShapedWord)` pair per line as two
//! whitespace-separated hex strings. Each hex string is the MSB-first
//! packed byte image of the word, the final byte zero padded in its low
//! bits. Header lines give the word widths and the spec digest; `#` starts
//! a comment.
//!
//! ```text
//! # hidm test vectors v1
//! spec_digest <16 hex digits>
//! n_info <bits>
//! n_out <bits>
//! <info hex> <shaped hex>
//! ...
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::bits::BitWord;
use crate::codec::{self, CodecError};
use crate::lut_synthesis::LutSet;

pub const MAGIC: &[u8; 4] = b"HDMB";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 8 + 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DataFileError {
    #[error("not a packed bit file (bad magic)")]
    BadMagic,
    #[error("unsupported packed bit file version {0}")]
    UnsupportedVersion(u16),
    #[error("packed bit file is truncated or has trailing bytes")]
    BadLength,
    #[error("test vector line {line}: {reason}")]
    Vector { line: usize, reason: String },
    #[error("test vector {index}: {reason}")]
    Mismatch { index: usize, reason: String },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedBits {
    pub source_bits: u64,
    pub payload: BitWord,
}

impl PackedBits {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len().div_ceil(8));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.source_bits.to_le_bytes());
        out.extend_from_slice(&(self.payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.payload.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DataFileError> {
        if bytes.len() < HEADER_LEN {
            return Err(DataFileError::BadLength);
        }
        if &bytes[..4] != MAGIC {
            return Err(DataFileError::BadMagic);
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(DataFileError::UnsupportedVersion(version));
        }
        let source_bits = u64::from_le_bytes(bytes[6..14].try_into().unwrap());
        let payload_bits = u64::from_le_bytes(bytes[14..22].try_into().unwrap()) as usize;
        let body = &bytes[HEADER_LEN..];
        if body.len() != payload_bits.div_ceil(8) {
            return Err(DataFileError::BadLength);
        }
        let payload = BitWord::from_bytes(body, payload_bits).ok_or(DataFileError::BadLength)?;
        Ok(Self {
            source_bits,
            payload,
        })
    }
}

/// Encodes a byte string, zero padding the last block, into a container.
pub fn encode_bytes(set: &LutSet, data: &[u8]) -> Result<PackedBits, CodecError> {
    let info = BitWord::from_bytes(data, data.len() * 8).expect("exact length");
    Ok(PackedBits {
        source_bits: info.len() as u64,
        payload: codec::encode_stream(set, &info, true)?,
    })
}

/// Inverse of [`encode_bytes`].
pub fn decode_bytes(set: &LutSet, packed: &PackedBits) -> Result<Vec<u8>, DataFileError> {
    let mut info = codec::decode_stream(set, &packed.payload)?;
    let source = packed.source_bits as usize;
    if source > info.len() || !source.is_multiple_of(8) {
        return Err(DataFileError::BadLength);
    }
    info.truncate(source);
    Ok(info.to_bytes())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorFile {
    pub spec_digest: Option<[u8; 8]>,
    pub n_info: usize,
    pub n_out: usize,
    pub pairs: Vec<(BitWord, BitWord)>,
}

/// Encodes `words` and renders them as a test-vector file.
pub fn write_vectors(set: &LutSet, words: &[BitWord]) -> Result<String, CodecError> {
    let spec = set.spec();
    let mut out = String::from("# hidm test vectors v1\n");
    let digest: String = spec.digest().iter().map(|b| format!("{b:02x}")).collect();
    let _ = writeln!(out, "spec_digest {digest}");
    let _ = writeln!(out, "n_info {}", spec.n_info());
    let _ = writeln!(out, "n_out {}", spec.n_out());
    for w in words {
        let shaped = codec::encode(set, w)?;
        let _ = writeln!(out, "{} {}", w.to_hex(), shaped.to_hex());
    }
    Ok(out)
}

pub fn parse_vectors(text: &str) -> Result<VectorFile, DataFileError> {
    let mut digest = None;
    let mut n_info = None;
    let mut n_out = None;
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |reason: &str| DataFileError::Vector {
            line: line_no,
            reason: reason.to_string(),
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err("expected two fields"));
        }
        match fields[0] {
            "spec_digest" => {
                let w = BitWord::from_hex(fields[1], 64).ok_or_else(|| err("bad digest"))?;
                digest = Some(w.to_bytes().try_into().expect("8 bytes"));
            }
            "n_info" => n_info = Some(fields[1].parse().map_err(|_| err("bad n_info"))?),
            "n_out" => n_out = Some(fields[1].parse().map_err(|_| err("bad n_out"))?),
            info_hex => {
                let (Some(ni), Some(no)) = (n_info, n_out) else {
                    return Err(err("vector before n_info / n_out header"));
                };
                let info = BitWord::from_hex(info_hex, ni).ok_or_else(|| err("bad info word"))?;
                let shaped =
                    BitWord::from_hex(fields[1], no).ok_or_else(|| err("bad shaped word"))?;
                pairs.push((info, shaped));
            }
        }
    }
    Ok(VectorFile {
        spec_digest: digest,
        n_info: n_info.ok_or(DataFileError::Vector {
            line: 0,
            reason: "missing n_info".into(),
        })?,
        n_out: n_out.ok_or(DataFileError::Vector {
            line: 0,
            reason: "missing n_out".into(),
        })?,
        pairs,
    })
}

/// Checks every pair in both directions; returns the number checked.
pub fn verify_vectors(set: &LutSet, file: &VectorFile) -> Result<usize, DataFileError> {
    let spec = set.spec();
    let mismatch = |index, reason: String| DataFileError::Mismatch { index, reason };
    if let Some(d) = file.spec_digest {
        if d != spec.digest() {
            return Err(mismatch(0, "spec digest differs".into()));
        }
    }
    if file.n_info != spec.n_info() || file.n_out != spec.n_out() {
        return Err(mismatch(0, "word widths differ".into()));
    }
    for (index, (info, shaped)) in file.pairs.iter().enumerate() {
        if &codec::encode(set, info)? != shaped {
            return Err(mismatch(index, "encode output differs".into()));
        }
        if &codec::decode(set, shaped)? != info {
            return Err(mismatch(index, "decode output differs".into()));
        }
    }
    Ok(file.pairs.len())
}
