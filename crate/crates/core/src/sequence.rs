//! Amplitude-class symbol sequences.

use crate::bits::BitWord;
use crate::lut_synthesis::ClassEnergyTable;

/// Sequence of amplitude-class labels, one per PAM symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ClassSequence(pub Vec<u8>);

impl ClassSequence {
    /// Reads `bits` as consecutive `class_bits`-wide labels.
    ///
    /// Returns `None` if the length is not a multiple of `class_bits`.
    pub fn from_bits(bits: &BitWord, class_bits: usize) -> Option<Self> {
        if class_bits == 0 || !bits.len().is_multiple_of(class_bits) {
            return None;
        }
        Some(Self(
            (0..bits.len() / class_bits)
                .map(|i| bits.read_uint(i * class_bits, class_bits) as u8)
                .collect(),
        ))
    }

    /// Packs the labels `class_bits` each, MSB-first.
    pub fn to_bits(&self, class_bits: usize) -> BitWord {
        let mut out = BitWord::with_capacity(self.0.len() * class_bits);
        for &c in &self.0 {
            out.push_uint(u64::from(c), class_bits);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    /// Number of occurrences of each class label `0..classes`.
    pub fn counts(&self, classes: usize) -> Vec<u32> {
        let mut counts = vec![0u32; classes];
        for &c in &self.0 {
            counts[c as usize] += 1;
        }
        counts
    }

    pub fn energy(&self, table: &ClassEnergyTable) -> f64 {
        self.0.iter().map(|&c| table.energy(c as usize)).sum()
    }
}
