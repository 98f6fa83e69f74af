//! 16-PAM / 256-QAM symbol assembly from shaped class bits plus uniform
//! sign and LSB bits.
//!
//! The two shaped bits of a PAM symbol pick an amplitude pair
//! `{1,3}, {5,7}, {9,11}, {13,15}` (ascending energy), the LSB picks the
//! member of the pair and the sign bit the sign.

use thiserror::Error;

use crate::bits::BitWord;

/// Smallest magnitude of each class.
pub const PAIR_BASE: [i8; 4] = [1, 5, 9, 13];
pub const CLASS_BITS: usize = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolError {
    #[error("{what}: expected {expected} bits, got {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{0} PAM symbols cannot be paired into QAM symbols")]
    OddSymbolCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PamSymbol(i8);

impl PamSymbol {
    pub fn amplitude(self) -> i8 {
        self.0
    }

    pub fn energy(self) -> u32 {
        let a = i32::from(self.0);
        (a * a) as u32
    }
}

/// Symbol for class `class` (0..4); `lsb` and `sign` are single bits, a set
/// sign bit meaning negative.
pub fn assemble(class: u8, lsb: bool, sign: bool) -> PamSymbol {
    let magnitude = PAIR_BASE[class as usize] + 2 * i8::from(lsb);
    PamSymbol(if sign { -magnitude } else { magnitude })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QamSymbol {
    pub i: PamSymbol,
    pub q: PamSymbol,
}

impl QamSymbol {
    pub fn energy(self) -> u32 {
        self.i.energy() + self.q.energy()
    }
}

/// Pairs consecutive PAM symbols into QAM symbols (even index = I).
///
/// `shaped` holds two class bits per PAM symbol; `lsb_bits` and `sign_bits`
/// hold one bit per PAM symbol each.
pub fn word_to_qam(
    shaped: &BitWord,
    lsb_bits: &BitWord,
    sign_bits: &BitWord,
) -> Result<Vec<QamSymbol>, SymbolError> {
    if !shaped.len().is_multiple_of(CLASS_BITS) {
        return Err(SymbolError::LengthMismatch {
            what: "shaped word",
            expected: shaped.len().next_multiple_of(CLASS_BITS),
            found: shaped.len(),
        });
    }
    let n_pam = shaped.len() / CLASS_BITS;
    for (what, bits) in [("lsb bits", lsb_bits), ("sign bits", sign_bits)] {
        if bits.len() != n_pam {
            return Err(SymbolError::LengthMismatch {
                what,
                expected: n_pam,
                found: bits.len(),
            });
        }
    }
    if !n_pam.is_multiple_of(2) {
        return Err(SymbolError::OddSymbolCount(n_pam));
    }
    let pam: Vec<PamSymbol> = (0..n_pam)
        .map(|k| {
            let class = shaped.read_uint(k * CLASS_BITS, CLASS_BITS) as u8;
            assemble(class, lsb_bits.get(k), sign_bits.get(k))
        })
        .collect();
    Ok(pam
        .chunks(2)
        .map(|p| QamSymbol { i: p[0], q: p[1] })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lut_synthesis::ClassEnergyTable;
    use std::collections::HashSet;

    #[test]
    fn extremes() {
        assert_eq!(assemble(0, false, false).amplitude(), 1);
        assert_eq!(assemble(3, true, true).amplitude(), -15);
    }

    #[test]
    fn bijective_onto_signed_amplitudes() {
        let mut seen = HashSet::new();
        for class in 0..4 {
            for lsb in [false, true] {
                for sign in [false, true] {
                    let a = assemble(class, lsb, sign).amplitude();
                    assert_eq!(a.abs() % 2, 1);
                    assert!(a.abs() <= 15);
                    assert_eq!(a < 0, sign);
                    seen.insert(a);
                }
            }
        }
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn class_energy_is_the_lsb_average() {
        let table = ClassEnergyTable::for_modulation(8, 4);
        for class in 0..4u8 {
            let mean = (assemble(class, false, false).energy()
                + assemble(class, true, false).energy()) as f64
                / 2.0;
            assert_eq!(mean, table.energy(class as usize));
        }
    }

    #[test]
    fn pairing() {
        let zeros =
            word_to_qam(&BitWord::zeros(4), &BitWord::zeros(2), &BitWord::zeros(2)).unwrap();
        assert_eq!(zeros.len(), 1);
        assert_eq!(zeros[0].i.amplitude(), 1);
        assert_eq!(zeros[0].q.amplitude(), 1);

        let q = word_to_qam(
            &BitWord::from_bit_str("11 01"),
            &BitWord::from_bit_str("1 0"),
            &BitWord::from_bit_str("0 1"),
        )
        .unwrap();
        assert_eq!((q[0].i.amplitude(), q[0].q.amplitude()), (15, -5));
        assert_eq!(q[0].energy(), 225 + 25);
    }

    #[test]
    fn length_errors() {
        assert!(matches!(
            word_to_qam(&BitWord::zeros(4), &BitWord::zeros(1), &BitWord::zeros(2)),
            Err(SymbolError::LengthMismatch {
                what: "lsb bits",
                ..
            })
        ));
        assert_eq!(
            word_to_qam(&BitWord::zeros(2), &BitWord::zeros(1), &BitWord::zeros(1)),
            Err(SymbolError::OddSymbolCount(1))
        );
    }
}
