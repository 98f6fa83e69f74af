//! Binary serialization of a [`LutSet`].
//!
//! Version 1 layout, integers little-endian:
//!
//! | field            | size            |                                          |
//! |------------------|-----------------|------------------------------------------|
//! | magic            | 4               | `HDML`                                   |
//! | version          | 2               | `1`                                      |
//! | spec digest      | 8               | [`TreeSpec::digest`]                     |
//! | `m`, `m_sb`      | 1 + 1           |                                          |
//! | depth `L`        | 1               |                                          |
//! | class count      | 1               |                                          |
//! | layer rows       | `L` x 10        | `l` u8, `t` u8 (0 = top), `T` u32, `r`, `s`, `v`, `u` u8 |
//! | class energies   | count x 8       | f64                                      |
//! | entry tables     | per layer       | `2^v` words of `u` bits                  |
//!
//! Layer rows and entry tables are top-down. Each entry table is a
//! little-endian bit stream: entry `i` occupies stream bits
//! `i*u .. (i+1)*u`, least significant bit first, stream bit `j` being bit
//! `j % 8` of byte `j / 8`. Each table is zero padded to a whole byte.
//! Inverse maps and energies are rebuilt on load.

use bitvec::prelude::*;
use thiserror::Error;

use crate::lut_synthesis::{ClassEnergyTable, LutSet, SynthesisError};
use crate::tree_config::{RawLayer, TreeError, TreeSpec};

pub const MAGIC: &[u8; 4] = b"HDML";
pub const VERSION: u16 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LutFileError {
    #[error("not a LUT set file (bad magic)")]
    BadMagic,
    #[error("unsupported LUT set file version {0}")]
    UnsupportedVersion(u16),
    #[error("LUT set file is truncated")]
    Truncated,
    #[error("LUT set file has {0} trailing bytes")]
    TrailingBytes(usize),
    #[error("stored spec digest does not match the stored layer table")]
    DigestMismatch,
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
}

pub fn write_lutset(set: &LutSet) -> Vec<u8> {
    let spec = set.spec();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&spec.digest());
    out.push(spec.bits_per_qam() as u8);
    out.push(spec.shaped_bits_per_qam() as u8);
    out.push(spec.depth() as u8);
    out.push(set.classes().len() as u8);
    for l in spec.layers() {
        out.push(l.index as u8);
        out.push(l.fanin.unwrap_or(0) as u8);
        out.extend_from_slice(&(l.lut_count as u32).to_le_bytes());
        out.extend_from_slice(&[
            l.parent_bits as u8,
            l.info_bits as u8,
            l.in_bits as u8,
            l.out_bits as u8,
        ]);
    }
    for e in set.classes().as_slice() {
        out.extend_from_slice(&e.to_le_bytes());
    }
    for lut in set.luts() {
        let mut stream = BitVec::<u8, Lsb0>::with_capacity(lut.entries().len() * lut.out_bits());
        for &w in lut.entries() {
            for b in 0..lut.out_bits() {
                stream.push((w >> b) & 1 == 1);
            }
        }
        stream.set_uninitialized(false);
        out.extend_from_slice(&stream.into_vec());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], LutFileError> {
        let end = self.pos.checked_add(n).ok_or(LutFileError::Truncated)?;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or(LutFileError::Truncated)?;
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, LutFileError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, LutFileError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, LutFileError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, LutFileError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn read_lutset(bytes: &[u8]) -> Result<LutSet, LutFileError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(LutFileError::BadMagic);
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(LutFileError::UnsupportedVersion(version));
    }
    let digest: [u8; 8] = r.take(8)?.try_into().unwrap();
    let m = r.u8()? as usize;
    let m_sb = r.u8()? as usize;
    let depth = r.u8()? as usize;
    let classes = r.u8()? as usize;

    let mut rows = Vec::with_capacity(depth);
    for position in 0..depth {
        let l = r.u8()? as usize;
        let t = r.u8()? as usize;
        let lut_count = r.u32()? as usize;
        let (parent, s, v, u) = (
            r.u8()? as usize,
            r.u8()? as usize,
            r.u8()? as usize,
            r.u8()? as usize,
        );
        rows.push(RawLayer {
            l,
            t: (position > 0).then_some(t),
            lut_count: Some(lut_count),
            r: (position > 0).then_some(parent),
            s,
            v,
            u,
        });
    }
    let spec = TreeSpec::validate(&rows, m, m_sb)?;
    if spec.digest() != digest {
        return Err(LutFileError::DigestMismatch);
    }
    let energies = (0..classes)
        .map(|_| r.f64())
        .collect::<Result<Vec<_>, _>>()?;
    let classes = ClassEnergyTable::new(energies)?;

    let mut tables = Vec::with_capacity(depth);
    for layer in spec.layers() {
        let n = layer.entry_count();
        let width = layer.out_bits;
        let raw = r.take((n * width).div_ceil(8))?;
        let stream = BitSlice::<u8, Lsb0>::from_slice(raw);
        let entries = (0..n)
            .map(|i| {
                stream[i * width..(i + 1) * width]
                    .iter()
                    .by_vals()
                    .enumerate()
                    .fold(0u32, |acc, (b, bit)| acc | (u32::from(bit) << b))
            })
            .collect();
        tables.push(entries);
    }
    if r.pos != bytes.len() {
        return Err(LutFileError::TrailingBytes(bytes.len() - r.pos));
    }
    Ok(LutSet::from_entries(&spec, &classes, tables)?)
}
