//! Fixed-length matcher (encode) and dematcher (decode) over a [`LutSet`].
//!
//! Information bits are consumed top layer first, and within a layer by LUT
//! index, `s` bits per LUT, MSB-first. The top LUT is indexed by its own
//! info field; every other LUT is indexed by `(parent r-field) ‖ (info
//! field)`. The shaped word is the concatenation of the leaf outputs in LUT
//! order. Children of parent LUT `p` are `p * t .. (p + 1) * t`, the
//! leftmost `r`-field of the parent word feeding child `p * t`.

use thiserror::Error;

use crate::bits::BitWord;
use crate::lut_synthesis::LutSet;
use crate::tree_config::TreeSpec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("expected a {expected}-bit word, got {found} bits")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid word at layer {layer}, LUT {lut_index}")]
    InvalidWord { layer: usize, lut_index: usize },
    #[error("stream of {len} bits is not a whole number of {block}-bit blocks")]
    PartialBlock { len: usize, block: usize },
}

fn mask(bits: usize) -> u32 {
    if bits >= 32 {
        u32::MAX
    } else {
        (1u32 << bits) - 1
    }
}

/// Splits an information word into the per-LUT `s`-bit fields, top-down.
pub fn split_info(spec: &TreeSpec, word: &BitWord) -> Result<Vec<Vec<u32>>, CodecError> {
    if word.len() != spec.n_info() {
        return Err(CodecError::LengthMismatch {
            expected: spec.n_info(),
            found: word.len(),
        });
    }
    let mut pos = 0;
    let fields = spec
        .layers()
        .iter()
        .map(|layer| {
            (0..layer.lut_count)
                .map(|_| {
                    let v = word.read_uint(pos, layer.info_bits) as u32;
                    pos += layer.info_bits;
                    v
                })
                .collect()
        })
        .collect();
    Ok(fields)
}

/// Inverse of [`split_info`].
pub fn join_info(spec: &TreeSpec, fields: &[Vec<u32>]) -> BitWord {
    let mut word = BitWord::with_capacity(spec.n_info());
    for (layer, values) in spec.layers().iter().zip(fields) {
        for &v in values {
            word.push_uint(u64::from(v), layer.info_bits);
        }
    }
    word
}

/// Maps `N_in` information bits to `T_1 * u_1` shaped bits.
pub fn encode(set: &LutSet, word: &BitWord) -> Result<BitWord, CodecError> {
    let spec = set.spec();
    let fields = split_info(spec, word)?;
    let layers = spec.layers();
    let luts = set.luts();

    let mut words = vec![luts[0].entry(fields[0][0] as usize)];
    for (i, child) in layers.iter().enumerate().skip(1) {
        let fanin = child.fanin.expect("inner layer has a fan-in");
        let (r, s) = (child.parent_bits, child.info_bits);
        let lut = &luts[i];
        let mut next = Vec::with_capacity(child.lut_count);
        for (p, &w) in words.iter().enumerate() {
            for f in 0..fanin {
                let rv = (w >> (r * (fanin - 1 - f))) & mask(r);
                let index = ((rv as usize) << s) | fields[i][p * fanin + f] as usize;
                next.push(lut.entry(index));
            }
        }
        words = next;
    }

    let width = spec.leaf().out_bits;
    let mut out = BitWord::with_capacity(spec.n_out());
    for w in words {
        out.push_uint(u64::from(w), width);
    }
    Ok(out)
}

/// Recovers the information word; fails on any word that no LUT emits.
pub fn decode(set: &LutSet, shaped: &BitWord) -> Result<BitWord, CodecError> {
    let spec = set.spec();
    if shaped.len() != spec.n_out() {
        return Err(CodecError::LengthMismatch {
            expected: spec.n_out(),
            found: shaped.len(),
        });
    }
    let layers = spec.layers();
    let luts = set.luts();
    let leaf = spec.leaf();
    let mut words: Vec<u32> = (0..leaf.lut_count)
        .map(|j| shaped.read_uint(j * leaf.out_bits, leaf.out_bits) as u32)
        .collect();

    let mut fields = vec![Vec::new(); layers.len()];
    for i in (0..layers.len()).rev() {
        let layer = &layers[i];
        let lut = &luts[i];
        let s = layer.info_bits;
        let mut parent_fields = Vec::with_capacity(words.len());
        let mut info = Vec::with_capacity(words.len());
        for (j, &w) in words.iter().enumerate() {
            let index = lut.lookup(w).ok_or(CodecError::InvalidWord {
                layer: layer.index,
                lut_index: j,
            })?;
            info.push(index & mask(s));
            parent_fields.push(if s >= 32 { 0 } else { index >> s });
        }
        fields[i] = info;
        if let Some(fanin) = layer.fanin {
            let r = layer.parent_bits;
            words = parent_fields
                .chunks(fanin)
                .map(|children| children.iter().fold(0u32, |acc, &rv| (acc << r) | rv))
                .collect();
        }
    }
    Ok(join_info(spec, &fields))
}

/// Encodes consecutive `N_in`-bit blocks independently.
///
/// A trailing partial block is zero padded when `pad` is set and rejected
/// otherwise.
pub fn encode_stream(set: &LutSet, bits: &BitWord, pad: bool) -> Result<BitWord, CodecError> {
    let block = set.spec().n_info();
    let rem = bits.len() % block;
    if rem != 0 && !pad {
        return Err(CodecError::PartialBlock {
            len: bits.len(),
            block,
        });
    }
    let blocks = bits.len().div_ceil(block);
    let mut out = BitWord::with_capacity(blocks * set.spec().n_out());
    for b in 0..blocks {
        let start = b * block;
        let word = if start + block <= bits.len() {
            bits.slice(start, block)
        } else {
            let mut w = bits.slice(start, bits.len() - start);
            w.extend_from(&BitWord::zeros(block - w.len()));
            w
        };
        out.extend_from(&encode(set, &word)?);
    }
    Ok(out)
}

/// Decodes consecutive `n_out`-bit blocks.
pub fn decode_stream(set: &LutSet, bits: &BitWord) -> Result<BitWord, CodecError> {
    let block = set.spec().n_out();
    if !bits.len().is_multiple_of(block) {
        return Err(CodecError::PartialBlock {
            len: bits.len(),
            block,
        });
    }
    let mut out = BitWord::with_capacity(bits.len() / block * set.spec().n_info());
    for b in 0..bits.len() / block {
        out.extend_from(&decode(set, &bits.slice(b * block, block))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ToolConfig;
    use crate::lut_synthesis::ClassEnergyTable;
    use crate::tree_config::RawLayer;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bundled_set() -> LutSet {
        ToolConfig::bundled().synthesize().unwrap()
    }

    fn toy_set() -> LutSet {
        let rows = vec![
            RawLayer {
                l: 2,
                t: None,
                lut_count: Some(1),
                r: None,
                s: 2,
                v: 2,
                u: 4,
            },
            RawLayer {
                l: 1,
                t: Some(2),
                lut_count: Some(2),
                r: Some(2),
                s: 1,
                v: 3,
                u: 4,
            },
        ];
        let spec = TreeSpec::validate(&rows, 8, 4).unwrap();
        LutSet::synthesize(&spec, &ClassEnergyTable::for_modulation(8, 4)).unwrap()
    }

    #[test]
    fn split_order_is_top_down() {
        let set = bundled_set();
        let spec = set.spec();
        let mut word = BitWord::zeros(507);
        for i in 0..5 {
            word.set(i, true);
        }
        word.set(506, true);
        let fields = split_info(spec, &word).unwrap();
        assert_eq!(fields[0], vec![0b11111]);
        assert_eq!(fields[6].len(), 64);
        assert_eq!(fields[6][63], 0b001);
        assert!(fields[1..6].iter().flatten().all(|&f| f == 0));
        assert_eq!(join_info(spec, &fields), word);
        assert_eq!(
            split_info(spec, &BitWord::zeros(506)),
            Err(CodecError::LengthMismatch {
                expected: 507,
                found: 506
            })
        );
    }

    #[test]
    fn single_layer_split_is_identity() {
        let spec = TreeSpec::validate(
            &[RawLayer {
                l: 1,
                t: None,
                lut_count: None,
                r: None,
                s: 2,
                v: 2,
                u: 4,
            }],
            8,
            4,
        )
        .unwrap();
        let w = BitWord::from_bit_str("10");
        assert_eq!(split_info(&spec, &w).unwrap(), vec![vec![0b10]]);
    }

    #[test]
    fn zero_word_maps_to_zero_word() {
        let set = bundled_set();
        let shaped = encode(&set, &BitWord::zeros(507)).unwrap();
        assert_eq!(shaped, BitWord::zeros(640));
        assert_eq!(decode(&set, &shaped).unwrap(), BitWord::zeros(507));
    }

    #[test]
    fn random_round_trip() {
        let set = bundled_set();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let w = BitWord::random(&mut rng, 507);
            let shaped = encode(&set, &w).unwrap();
            assert_eq!(shaped.len(), 640);
            assert_eq!(decode(&set, &shaped).unwrap(), w);
        }
    }

    #[test]
    fn unselected_leaf_chunk_is_rejected() {
        let set = bundled_set();
        let leaf = set.lut(1);
        let unused = (0..1u32 << 10).find(|&w| leaf.lookup(w).is_none()).unwrap();
        let mut shaped = encode(&set, &BitWord::zeros(507)).unwrap();
        for b in 0..10 {
            shaped.set(3 * 10 + b, (unused >> (9 - b)) & 1 == 1);
        }
        assert_eq!(
            decode(&set, &shaped),
            Err(CodecError::InvalidWord {
                layer: 1,
                lut_index: 3
            })
        );
    }

    #[test]
    fn toy_codebook_is_injective() {
        let set = toy_set();
        let n = set.spec().n_info();
        let mut seen = std::collections::HashSet::new();
        for v in 0..1u64 << n {
            let mut w = BitWord::new();
            w.push_uint(v, n);
            let shaped = encode(&set, &w).unwrap();
            assert_eq!(decode(&set, &shaped).unwrap(), w);
            assert!(seen.insert(shaped));
        }
        assert_eq!(seen.len(), 1 << n);
    }

    #[test]
    fn streams() {
        let set = bundled_set();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = BitWord::random(&mut rng, 507);
        let b = BitWord::random(&mut rng, 507);
        let mut both = a.clone();
        both.extend_from(&b);
        let mut expected = encode(&set, &a).unwrap();
        expected.extend_from(&encode(&set, &b).unwrap());
        let shaped = encode_stream(&set, &both, false).unwrap();
        assert_eq!(shaped, expected);
        assert_eq!(decode_stream(&set, &shaped).unwrap(), both);

        assert!(encode_stream(&set, &BitWord::new(), false)
            .unwrap()
            .is_empty());

        let mut odd = a.clone();
        odd.push(true);
        assert_eq!(
            encode_stream(&set, &odd, false),
            Err(CodecError::PartialBlock {
                len: 508,
                block: 507
            })
        );
        let padded = encode_stream(&set, &odd, true).unwrap();
        assert_eq!(padded.len(), 1280);
        let mut tail = BitWord::from_bit_str("1");
        tail.extend_from(&BitWord::zeros(506));
        assert_eq!(padded.slice(640, 640), encode(&set, &tail).unwrap());
    }
}
