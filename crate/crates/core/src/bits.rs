//! Fixed-width bit strings with MSB-first ordering.
//!
//! Every word that crosses a module boundary (DM inputs, LUT words, shaped
//! outputs, CCDM payloads) is a [`BitWord`]. Bit 0 is the first bit of the
//! word; when a run of bits is read as an integer, the first bit is the most
//! significant one. Packed byte images use the same convention: bit 0 is the
//! MSB of byte 0 and the unused low bits of the final byte are zero.

use std::fmt;

use bitvec::prelude::*;
use rand::Rng;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitWord {
    bits: BitVec<u8, Msb0>,
}

impl BitWord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bits: bitvec![u8, Msb0; 0; len],
        }
    }

    pub fn with_capacity(len: usize) -> Self {
        Self {
            bits: BitVec::with_capacity(len),
        }
    }

    /// Builds a word from `0`/`1` characters; other characters (`_`, spaces)
    /// are ignored so literals can be grouped.
    pub fn from_bit_str(s: &str) -> Self {
        let mut w = Self::new();
        for ch in s.chars() {
            match ch {
                '0' => w.push(false),
                '1' => w.push(true),
                _ => {}
            }
        }
        w
    }

    /// Takes the first `len` bits of a packed MSB-first byte image.
    ///
    /// Returns `None` when `bytes` holds fewer than `len` bits.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Option<Self> {
        if bytes.len() * 8 < len {
            return None;
        }
        let mut bits = BitVec::<u8, Msb0>::from_slice(bytes);
        bits.truncate(len);
        Some(Self { bits })
    }

    /// Packed MSB-first byte image, zero padded to a whole byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bits = self.bits.clone();
        bits.set_uninitialized(false);
        bits.into_vec()
    }

    /// Uniformly random word of `len` bits.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Self {
        let mut bytes = vec![0u8; len.div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        Self::from_bytes(&bytes, len).expect("buffer sized for len")
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn set(&mut self, index: usize, value: bool) {
        self.bits.set(index, value);
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push_uint(&mut self, value: u64, width: usize) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value >> width == 0, "value wider than field");
        for i in (0..width).rev() {
            self.bits.push((value >> i) & 1 == 1);
        }
    }

    /// Reads `width` bits starting at `pos` as an unsigned integer.
    pub fn read_uint(&self, pos: usize, width: usize) -> u64 {
        debug_assert!(width <= 64);
        self.bits[pos..pos + width]
            .iter()
            .fold(0u64, |acc, b| (acc << 1) | u64::from(*b))
    }

    pub fn extend_from(&mut self, other: &BitWord) {
        self.bits.extend_from_bitslice(&other.bits);
    }

    /// Copy of bits `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> BitWord {
        BitWord {
            bits: self.bits[start..start + len].to_bitvec(),
        }
    }

    pub fn truncate(&mut self, len: usize) {
        self.bits.truncate(len);
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().by_vals()
    }

    /// Lower-case hex of the packed byte image.
    pub fn to_hex(&self) -> String {
        self.to_bytes().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Inverse of [`BitWord::to_hex`]. Padding bits past `len` must be zero.
    pub fn from_hex(hex: &str, len: usize) -> Option<Self> {
        if hex.len() != 2 * len.div_ceil(8) {
            return None;
        }
        let bytes = (0..hex.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(hex.get(i..i + 2)?, 16).ok())
            .collect::<Option<Vec<u8>>>()?;
        let word = Self::from_bytes(&bytes, len)?;
        (word.to_bytes() == bytes).then_some(word)
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord[{}](", self.len())?;
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}

impl FromIterator<bool> for BitWord {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self {
            bits: iter.into_iter().collect(),
        }
    }
}
