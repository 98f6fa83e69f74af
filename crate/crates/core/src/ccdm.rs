//! Constant-composition distribution matching by enumerative coding.
//!
//! A code is fixed by a [`Composition`] (how many symbols of each class a
//! word holds) and an input width `k`. The `k` input bits, read as an
//! integer, are the lexicographic rank of the output sequence among all
//! permutations of the multiset; decoding ranks the sequence again.
//! Everything is exact big-integer arithmetic.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::bits::BitWord;
use crate::sequence::ClassSequence;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CcdmError {
    #[error("composition must have at least one class and one symbol")]
    EmptyComposition,
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),
    #[error("k = {k} exceeds the codebook capacity of {k_max} bits")]
    CapacityExceeded { k: u64, k_max: u64 },
    #[error("index is not below the multiset count")]
    IndexOutOfRange,
    #[error("class {class} is outside the alphabet of {classes} classes")]
    UnknownClass { class: u8, classes: usize },
    #[error("expected {expected} input bits, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("sequence composition {found:?} differs from the code's {expected:?}")]
    CompositionMismatch { expected: Vec<u32>, found: Vec<u32> },
    #[error("sequence rank does not fit in {k} bits")]
    RankOverflow { k: u64 },
}

/// Per-class symbol counts of every codeword.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Composition {
    counts: Vec<u32>,
}

impl Composition {
    pub fn new(counts: Vec<u32>) -> Result<Self, CcdmError> {
        if counts.is_empty() || counts.iter().all(|&c| c == 0) {
            return Err(CcdmError::EmptyComposition);
        }
        Ok(Self { counts })
    }

    /// Largest-remainder quantization of `pmf` to `n` symbols; equal
    /// remainders favour the lower class index.
    pub fn from_pmf(pmf: &[f64], n: u32) -> Result<Self, CcdmError> {
        if n == 0 {
            return Err(CcdmError::EmptyComposition);
        }
        if pmf.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(CcdmError::InvalidPmf(
                "entries must be finite and non-negative".into(),
            ));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(CcdmError::InvalidPmf(format!("sums to {total}")));
        }
        let quotas: Vec<f64> = pmf.iter().map(|p| p / total * f64::from(n)).collect();
        let mut counts: Vec<u32> = quotas.iter().map(|q| q.floor() as u32).collect();
        let assigned: u32 = counts.iter().sum();
        let mut order: Vec<usize> = (0..pmf.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - quotas[a].floor();
            let rb = quotas[b] - quotas[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &c in order
            .iter()
            .cycle()
            .take(n.saturating_sub(assigned) as usize)
        {
            counts[c] += 1;
        }
        Self::new(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    /// Block length `n`.
    pub fn len(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Class frequencies `n_c / n`.
    pub fn pmf(&self) -> Vec<f64> {
        let n = f64::from(self.len());
        self.counts.iter().map(|&c| f64::from(c) / n).collect()
    }

    /// Multinomial coefficient `n! / prod(n_c!)`.
    pub fn multiset_count(&self) -> BigUint {
        multinomial(&self.counts)
    }

    /// `floor(log2(multiset_count))`, the widest admissible input.
    pub fn max_bits(&self) -> u64 {
        self.multiset_count().bits() - 1
    }
}

fn multinomial(counts: &[u32]) -> BigUint {
    let mut result = BigUint::one();
    let mut total = 0u64;
    for &c in counts {
        for i in 1..=u64::from(c) {
            total += 1;
            result = result * total / i;
        }
    }
    result
}

/// The `index`-th permutation of `composition` in lexicographic order.
pub fn unrank(composition: &Composition, index: &BigUint) -> Result<ClassSequence, CcdmError> {
    let mut remaining = composition.counts.clone();
    let mut left = u64::from(composition.len());
    let mut block = composition.multiset_count();
    if index >= &block {
        return Err(CcdmError::IndexOutOfRange);
    }
    let mut index = index.clone();
    let mut out = Vec::with_capacity(left as usize);
    while left > 0 {
        for (class, count) in remaining.iter_mut().enumerate() {
            if *count == 0 {
                continue;
            }
            // permutations that start with `class`
            let sub = &block * u64::from(*count) / left;
            if index < sub {
                block = sub;
                *count -= 1;
                left -= 1;
                out.push(class as u8);
                break;
            }
            index -= sub;
        }
    }
    Ok(ClassSequence(out))
}

/// Lexicographic rank of `sequence` among the permutations of its own
/// composition over `classes` labels.
pub fn rank(sequence: &ClassSequence, classes: usize) -> Result<BigUint, CcdmError> {
    if let Some(&class) = sequence.symbols().iter().find(|&&c| c as usize >= classes) {
        return Err(CcdmError::UnknownClass { class, classes });
    }
    let mut remaining = sequence.counts(classes);
    let mut block = multinomial(&remaining);
    let mut left = sequence.len() as u64;
    let mut rank = BigUint::zero();
    for &symbol in sequence.symbols() {
        let symbol = symbol as usize;
        for &count in remaining.iter().take(symbol) {
            if count > 0 {
                rank += &block * u64::from(count) / left;
            }
        }
        block = block * u64::from(remaining[symbol]) / left;
        remaining[symbol] -= 1;
        left -= 1;
    }
    Ok(rank)
}

/// Fixed-length CCDM: `k` bits in, one permutation of the composition out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcdmCode {
    composition: Composition,
    k: u64,
}

impl CcdmCode {
    pub fn new(composition: Composition, k: u64) -> Result<Self, CcdmError> {
        let k_max = composition.max_bits();
        if k > k_max {
            return Err(CcdmError::CapacityExceeded { k, k_max });
        }
        Ok(Self { composition, k })
    }

    pub fn composition(&self) -> &Composition {
        &self.composition
    }

    pub fn input_bits(&self) -> u64 {
        self.k
    }

    pub fn encode(&self, bits: &BitWord) -> Result<ClassSequence, CcdmError> {
        let k = self.k as usize;
        if bits.len() != k {
            return Err(CcdmError::LengthMismatch {
                expected: k,
                found: bits.len(),
            });
        }
        let bytes = bits.to_bytes();
        let pad = bytes.len() * 8 - k;
        let index = BigUint::from_bytes_be(&bytes) >> pad;
        unrank(&self.composition, &index)
    }

    pub fn decode(&self, sequence: &ClassSequence) -> Result<BitWord, CcdmError> {
        let classes = self.composition.classes();
        if let Some(&class) = sequence.symbols().iter().find(|&&c| c as usize >= classes) {
            return Err(CcdmError::UnknownClass { class, classes });
        }
        let found = sequence.counts(classes);
        if found != self.composition.counts {
            return Err(CcdmError::CompositionMismatch {
                expected: self.composition.counts.clone(),
                found,
            });
        }
        let index = rank(sequence, classes)?;
        if index.bits() > self.k {
            return Err(CcdmError::RankOverflow { k: self.k });
        }
        let k = self.k as usize;
        let n_bytes = k.div_ceil(8);
        let pad = n_bytes * 8 - k;
        let raw = (index << pad).to_bytes_be();
        let mut bytes = vec![0u8; n_bytes];
        if !raw.iter().all(|&b| b == 0) {
            bytes[n_bytes - raw.len()..].copy_from_slice(&raw);
        }
        Ok(BitWord::from_bytes(&bytes, k).expect("sized for k bits"))
    }
}

/// `log2` of a big integer, accurate to double precision.
pub fn log2_big(value: &BigUint) -> f64 {
    let bits = value.bits();
    if bits <= 64 {
        return value
            .to_u64()
            .map_or(f64::NEG_INFINITY, |v| (v as f64).log2());
    }
    let shift = bits - 64;
    let top = (value >> shift).to_u64().expect("64 leading bits");
    (top as f64).log2() + shift as f64
}
