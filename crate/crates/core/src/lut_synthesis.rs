//! Energy-ranked construction of the LUT contents.
//!
//! Leaf LUTs map a `v`-bit index onto a `u`-bit word read as `u / b` class
//! symbols of `b` bits each; a parent LUT's word is a concatenation of `t`
//! child `r`-fields. In both cases the candidate words are ranked by energy
//! (ties broken by numeric value) and the `2^v` cheapest are kept, entry `i`
//! being the `i`-th cheapest.
//!
//! An index is `(r bits) ‖ (s bits)`, so a fixed parent value `r` addresses
//! the contiguous band of `2^s` entries `r << s .. (r + 1) << s`. The mean
//! energy of each band is exported upward, and the parent ranks its candidate
//! words by the sum of the band energies its fields select.
//!
//! All energies here are dyadic rationals small enough to be exact in `f64`
//! for trees of practical size, so ties are decided exactly.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::tree_config::{LayerParams, TreeSpec};

/// Largest LUT output width for which the `2^u` candidates are enumerated.
pub const MAX_SYNTH_BITS: usize = 24;

const NO_ENTRY: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthesisError {
    #[error("amplitude class {0} is empty")]
    EmptyClass(usize),
    #[error("amplitude {0} is not a positive odd number")]
    EvenAmplitude(u32),
    #[error("amplitude {0} appears in more than one class")]
    OverlappingClasses(u32),
    #[error("class energies must be strictly positive (class {class}: {energy})")]
    NonPositiveEnergy { class: usize, energy: f64 },
    #[error("class energies must ascend with the class index (class {0})")]
    NotAscending(usize),
    #[error("expected {expected} class energies, got {found}")]
    ClassTableSize { expected: usize, found: usize },
    #[error("layer {layer}: u = {bits} is too wide to enumerate (max {MAX_SYNTH_BITS})")]
    TooWide { layer: usize, bits: usize },
    #[error("layer {layer}: expected {expected} child band energies, got {found}")]
    BandCount {
        layer: usize,
        expected: usize,
        found: usize,
    },
    #[error("layer {layer}: expected {expected} entries, got {found}")]
    EntryCount {
        layer: usize,
        expected: usize,
        found: usize,
    },
    #[error("layer {layer}: entry {word:#x} does not fit in {bits} bits")]
    EntryOutOfRange {
        layer: usize,
        word: u32,
        bits: usize,
    },
    #[error("layer {layer}: entry {word:#x} appears twice")]
    DuplicateEntry { layer: usize, word: u32 },
}

/// Mean energy of each amplitude class, indexed by the class label.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassEnergyTable {
    energies: Vec<f64>,
}

impl ClassEnergyTable {
    pub fn new(energies: Vec<f64>) -> Result<Self, SynthesisError> {
        for (class, &energy) in energies.iter().enumerate() {
            if energy.is_nan() || energy <= 0.0 {
                return Err(SynthesisError::NonPositiveEnergy { class, energy });
            }
            if class > 0 && energy <= energies[class - 1] {
                return Err(SynthesisError::NotAscending(class));
            }
        }
        Ok(Self { energies })
    }

    /// Class energy = mean squared amplitude over the class members (the
    /// unshaped bits pick a member uniformly).
    pub fn from_amplitude_classes(classes: &[Vec<u32>]) -> Result<Self, SynthesisError> {
        let mut seen = BTreeSet::new();
        let mut energies = Vec::with_capacity(classes.len());
        for (class, members) in classes.iter().enumerate() {
            if members.is_empty() {
                return Err(SynthesisError::EmptyClass(class));
            }
            for &a in members {
                if a % 2 == 0 {
                    return Err(SynthesisError::EvenAmplitude(a));
                }
                if !seen.insert(a) {
                    return Err(SynthesisError::OverlappingClasses(a));
                }
            }
            let sum: f64 = members.iter().map(|&a| f64::from(a) * f64::from(a)).sum();
            energies.push(sum / members.len() as f64);
        }
        Self::new(energies)
    }

    /// Adjacent-magnitude classes for `2^(m/2)`-PAM with `m_sb / 2` shaped
    /// bits per dimension: `{1, 3}, {5, 7}, ...` for 16-PAM.
    pub fn adjacent_groups(m: usize, m_sb: usize) -> Vec<Vec<u32>> {
        let classes = 1usize << (m_sb / 2);
        let group = 1usize << ((m - m_sb) / 2 - 1);
        (0..classes)
            .map(|c| {
                (0..group)
                    .map(|j| (2 * (c * group + j) + 1) as u32)
                    .collect()
            })
            .collect()
    }

    pub fn for_modulation(m: usize, m_sb: usize) -> Self {
        Self::from_amplitude_classes(&Self::adjacent_groups(m, m_sb))
            .expect("adjacent groups are disjoint, odd and ascending")
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energy(&self, class: usize) -> f64 {
        self.energies[class]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.energies
    }

    /// Energy of a leaf word read as `width / class_bits` class symbols.
    pub fn pattern_energy(&self, pattern: u32, width: usize, class_bits: usize) -> f64 {
        let mask = (1u32 << class_bits) - 1;
        (0..width / class_bits)
            .map(|i| {
                let shift = width - class_bits * (i + 1);
                self.energies[((pattern >> shift) & mask) as usize]
            })
            .sum()
    }
}

/// Contents of every LUT in one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Lut {
    layer: usize,
    parent_bits: usize,
    info_bits: usize,
    out_bits: usize,
    entries: Vec<u32>,
    energies: Vec<f64>,
    band_energy: Vec<f64>,
    inverse: Vec<u32>,
}

impl Lut {
    fn from_ranked(
        layer: &LayerParams,
        entries: Vec<u32>,
        energies: Vec<f64>,
    ) -> Result<Self, SynthesisError> {
        let expected = layer.entry_count();
        if entries.len() != expected {
            return Err(SynthesisError::EntryCount {
                layer: layer.index,
                expected,
                found: entries.len(),
            });
        }
        let mut inverse = vec![NO_ENTRY; 1usize << layer.out_bits];
        for (i, &word) in entries.iter().enumerate() {
            let slot = inverse
                .get_mut(word as usize)
                .ok_or(SynthesisError::EntryOutOfRange {
                    layer: layer.index,
                    word,
                    bits: layer.out_bits,
                })?;
            if *slot != NO_ENTRY {
                return Err(SynthesisError::DuplicateEntry {
                    layer: layer.index,
                    word,
                });
            }
            *slot = i as u32;
        }
        let band = 1usize << layer.info_bits;
        let band_energy = energies
            .chunks(band)
            .map(|c| c.iter().sum::<f64>() / band as f64)
            .collect();
        Ok(Self {
            layer: layer.index,
            parent_bits: layer.parent_bits,
            info_bits: layer.info_bits,
            out_bits: layer.out_bits,
            entries,
            energies,
            band_energy,
            inverse,
        })
    }

    pub fn layer(&self) -> usize {
        self.layer
    }

    pub fn in_bits(&self) -> usize {
        self.parent_bits + self.info_bits
    }

    pub fn parent_bits(&self) -> usize {
        self.parent_bits
    }

    pub fn info_bits(&self) -> usize {
        self.info_bits
    }

    pub fn out_bits(&self) -> usize {
        self.out_bits
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn entry(&self, index: usize) -> u32 {
        self.entries[index]
    }

    /// Energy of each entry, in entry order (non-decreasing).
    pub fn entry_energies(&self) -> &[f64] {
        &self.energies
    }

    /// Mean entry energy of each band of `2^s` entries; one band per parent value.
    pub fn band_energy(&self) -> &[f64] {
        &self.band_energy
    }

    /// Index of `word`, or `None` if `word` was not selected.
    pub fn lookup(&self, word: u32) -> Option<u32> {
        match self.inverse.get(word as usize) {
            Some(&i) if i != NO_ENTRY => Some(i),
            _ => None,
        }
    }
}

/// Keeps the `2^v` cheapest of the `2^u` candidate words, ranked by
/// `(energy, word)`.
fn select_cheapest(
    layer: &LayerParams,
    energy_of: impl Fn(u32) -> f64,
) -> Result<Lut, SynthesisError> {
    if layer.out_bits > MAX_SYNTH_BITS {
        return Err(SynthesisError::TooWide {
            layer: layer.index,
            bits: layer.out_bits,
        });
    }
    let mut ranked: Vec<(f64, u32)> = (0..1u32 << layer.out_bits)
        .map(|w| (energy_of(w), w))
        .collect();
    let keep = layer.entry_count();
    let by_rank = |a: &(f64, u32), b: &(f64, u32)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if keep < ranked.len() {
        ranked.select_nth_unstable_by(keep, by_rank);
        ranked.truncate(keep);
    }
    ranked.sort_unstable_by(by_rank);
    let (energies, entries) = ranked.into_iter().unzip();
    Lut::from_ranked(layer, entries, energies)
}

/// Leaf LUT: the `2^v` lowest-energy class-symbol patterns of `u` bits.
pub fn synthesize_leaf_lut(
    layer: &LayerParams,
    classes: &ClassEnergyTable,
    class_bits: usize,
) -> Result<Lut, SynthesisError> {
    check_class_table(classes, class_bits)?;
    let width = layer.out_bits;
    select_cheapest(layer, |w| classes.pattern_energy(w, width, class_bits))
}

/// Energy of a parent word: the sum of the child band energies its `r`-bit
/// fields select (leftmost field = lowest-indexed child).
pub fn parent_word_energy(
    word: u32,
    fanin: usize,
    child_bits: usize,
    child_band_energy: &[f64],
) -> f64 {
    let mask = (1u32 << child_bits) - 1;
    (0..fanin)
        .map(|f| {
            let shift = child_bits * (fanin - 1 - f);
            child_band_energy[((word >> shift) & mask) as usize]
        })
        .sum()
}

/// Inner LUT of `layer`, whose children are described by `child`.
pub fn synthesize_parent_lut(
    layer: &LayerParams,
    child: &LayerParams,
    child_band_energy: &[f64],
) -> Result<Lut, SynthesisError> {
    let fanin = child.fanin.expect("child layer has a fan-in");
    let child_bits = child.parent_bits;
    let expected = 1usize << child_bits;
    if child_band_energy.len() != expected {
        return Err(SynthesisError::BandCount {
            layer: layer.index,
            expected,
            found: child_band_energy.len(),
        });
    }
    select_cheapest(layer, |w| {
        parent_word_energy(w, fanin, child_bits, child_band_energy)
    })
}

fn check_class_table(classes: &ClassEnergyTable, class_bits: usize) -> Result<(), SynthesisError> {
    let expected = 1usize << class_bits;
    if classes.len() != expected {
        return Err(SynthesisError::ClassTableSize {
            expected,
            found: classes.len(),
        });
    }
    Ok(())
}

/// A tree's worth of LUTs plus the inverse (dematcher) maps.
#[derive(Debug, Clone, PartialEq)]
pub struct LutSet {
    spec: TreeSpec,
    classes: ClassEnergyTable,
    /// One LUT per layer, top-down like [`TreeSpec::layers`].
    luts: Vec<Lut>,
}

impl LutSet {
    /// Builds the leaf LUT and then each layer above it from its children's
    /// band energies.
    pub fn synthesize(spec: &TreeSpec, classes: &ClassEnergyTable) -> Result<Self, SynthesisError> {
        let layers = spec.layers();
        let mut luts = Vec::with_capacity(layers.len());
        let mut lut = synthesize_leaf_lut(spec.leaf(), classes, spec.class_bits())?;
        for pair in layers.windows(2).rev() {
            let next = synthesize_parent_lut(&pair[0], &pair[1], lut.band_energy())?;
            luts.push(lut);
            lut = next;
        }
        luts.push(lut);
        luts.reverse();
        Ok(Self {
            spec: spec.clone(),
            classes: classes.clone(),
            luts,
        })
    }

    /// Rebuilds a set from stored entry tables (top-down), recomputing the
    /// energies and inverse maps.
    pub fn from_entries(
        spec: &TreeSpec,
        classes: &ClassEnergyTable,
        tables: Vec<Vec<u32>>,
    ) -> Result<Self, SynthesisError> {
        check_class_table(classes, spec.class_bits())?;
        let layers = spec.layers();
        if tables.len() != layers.len() {
            return Err(SynthesisError::EntryCount {
                layer: 0,
                expected: layers.len(),
                found: tables.len(),
            });
        }
        let mut luts: Vec<Lut> = Vec::with_capacity(layers.len());
        for (i, entries) in tables.into_iter().enumerate().rev() {
            let layer = &layers[i];
            let energies = match luts.last() {
                None => entries
                    .iter()
                    .map(|&w| classes.pattern_energy(w, layer.out_bits, spec.class_bits()))
                    .collect(),
                Some(child_lut) => {
                    let child = &layers[i + 1];
                    let fanin = child.fanin.expect("child layer has a fan-in");
                    entries
                        .iter()
                        .map(|&w| {
                            parent_word_energy(w, fanin, child.parent_bits, child_lut.band_energy())
                        })
                        .collect()
                }
            };
            luts.push(Lut::from_ranked(layer, entries, energies)?);
        }
        luts.reverse();
        Ok(Self {
            spec: spec.clone(),
            classes: classes.clone(),
            luts,
        })
    }

    pub fn spec(&self) -> &TreeSpec {
        &self.spec
    }

    pub fn classes(&self) -> &ClassEnergyTable {
        &self.classes
    }

    /// LUTs top-down.
    pub fn luts(&self) -> &[Lut] {
        &self.luts
    }

    /// LUT of layer `index` (1-based, leaf = 1).
    pub fn lut(&self, index: usize) -> &Lut {
        &self.luts[self.luts.len() - index]
    }

    /// Number of stored LUT bits, counting every copy in a layer.
    pub fn stored_bits(&self) -> (u128, u128) {
        let layers = self.spec.layers();
        self.luts
            .iter()
            .zip(layers)
            .fold((0, 0), |(dm, inv), (lut, layer)| {
                let copies = layer.lut_count as u128;
                let inverse_slots = lut.inverse.len() as u128;
                (
                    dm + copies * lut.entries.len() as u128 * lut.out_bits as u128,
                    inv + copies * inverse_slots * lut.in_bits() as u128,
                )
            })
    }
}
