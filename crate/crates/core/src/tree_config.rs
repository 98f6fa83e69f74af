//! Layer parameter table of the LUT tree and its derived totals.
//!
//! Layers are numbered `L..=1` from the top (root) LUT down to the leaf
//! layer whose outputs are the shaped bits. Each LUT in layer `l` takes
//! `r` bits from its parent and `s` information bits, forms a `v = r + s`
//! bit index, and emits a `u` bit word. A parent's word is split into `t`
//! fields of `r` bits, one per child, so `u` of layer `l + 1` must equal
//! `t * r` of layer `l`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Widest LUT word (input or output) accepted by validation.
pub const MAX_WORD_BITS: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("layer table is empty")]
    Empty,
    #[error("layer {position} in the table has index {found}, expected {expected} (layers are listed top-down)")]
    LayerOrder {
        position: usize,
        expected: usize,
        found: usize,
    },
    #[error("layer {layer}: missing field `{field}`")]
    MissingField { layer: usize, field: &'static str },
    #[error("layer {layer}: top layer must not have `{field}`")]
    UnexpectedField { layer: usize, field: &'static str },
    #[error("layer {layer}: u of the parent is {parent_out} but t*r = {fanin}*{parent_bits}")]
    CouplingViolation {
        layer: usize,
        parent_out: usize,
        fanin: usize,
        parent_bits: usize,
    },
    #[error("layer {layer}: T = {found}, expected {expected}")]
    CountViolation {
        layer: usize,
        expected: usize,
        found: usize,
    },
    #[error("layer {layer}: {reason}")]
    WidthViolation { layer: usize, reason: String },
    #[error("{0}")]
    GranularityViolation(String),
    #[error("invalid modulation: m = {m}, m_sb = {m_sb} ({reason})")]
    InvalidModulation {
        m: usize,
        m_sb: usize,
        reason: &'static str,
    },
}

/// One row of the layer table as written in a config file.
///
/// `t` and `r` are absent for the top layer; `T` may be omitted anywhere
/// and is then derived from the fan-ins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLayer {
    pub l: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub lut_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    pub s: usize,
    pub v: usize,
    pub u: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayerParams {
    /// 1-based layer index; the leaf layer is 1.
    pub index: usize,
    /// Children per parent LUT (`None` for the top layer).
    pub fanin: Option<usize>,
    pub lut_count: usize,
    /// Bits received from the parent LUT (0 for the top layer).
    pub parent_bits: usize,
    pub info_bits: usize,
    pub in_bits: usize,
    pub out_bits: usize,
}

impl LayerParams {
    pub fn is_leaf(&self) -> bool {
        self.index == 1
    }

    /// Number of LUT entries, `2^v`.
    pub fn entry_count(&self) -> usize {
        1usize << self.in_bits
    }
}

/// Validated layer table. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeSpec {
    layers: Vec<LayerParams>,
    bits_per_qam: usize,
    shaped_bits_per_qam: usize,
    n_info: usize,
    n_out: usize,
    n_pam: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LutSizeReport {
    pub dm_bits: u128,
    pub invdm_bits: u128,
}

impl TreeSpec {
    /// Checks the bit-flow equations and derives the totals.
    ///
    /// `raw` lists the layers top-down (`l = L` first). `m` is the number of
    /// label bits per QAM symbol and `m_sb` how many of them are shaped.
    pub fn validate(raw: &[RawLayer], m: usize, m_sb: usize) -> Result<Self, TreeError> {
        if raw.is_empty() {
            return Err(TreeError::Empty);
        }
        check_modulation(m, m_sb)?;
        let depth = raw.len();

        for (position, row) in raw.iter().enumerate() {
            let expected = depth - position;
            if row.l != expected {
                return Err(TreeError::LayerOrder {
                    position,
                    expected,
                    found: row.l,
                });
            }
            if position == 0 {
                if row.t.is_some() {
                    return Err(TreeError::UnexpectedField {
                        layer: row.l,
                        field: "t",
                    });
                }
                if row.r.is_some() {
                    return Err(TreeError::UnexpectedField {
                        layer: row.l,
                        field: "r",
                    });
                }
            } else {
                if row.t.is_none() {
                    return Err(TreeError::MissingField {
                        layer: row.l,
                        field: "t",
                    });
                }
                if row.r.is_none() {
                    return Err(TreeError::MissingField {
                        layer: row.l,
                        field: "r",
                    });
                }
            }
        }

        // LUT counts, top-down.
        let mut counts = Vec::with_capacity(depth);
        for (position, row) in raw.iter().enumerate() {
            let expected = match position {
                0 => 1,
                _ => {
                    let t = row.t.unwrap_or(0);
                    if t == 0 {
                        return Err(TreeError::WidthViolation {
                            layer: row.l,
                            reason: "t must be at least 1".into(),
                        });
                    }
                    t.checked_mul(counts[position - 1]).ok_or_else(|| {
                        TreeError::WidthViolation {
                            layer: row.l,
                            reason: "LUT count overflows".into(),
                        }
                    })?
                }
            };
            if let Some(found) = row.lut_count {
                if found != expected {
                    return Err(TreeError::CountViolation {
                        layer: row.l,
                        expected,
                        found,
                    });
                }
            }
            counts.push(expected);
        }

        // Parent output word = concatenation of the children's r-fields.
        for pair in raw.windows(2) {
            let (parent, child) = (&pair[0], &pair[1]);
            let (t, r) = (child.t.unwrap_or(0), child.r.unwrap_or(0));
            if parent.u != t * r {
                return Err(TreeError::CouplingViolation {
                    layer: child.l,
                    parent_out: parent.u,
                    fanin: t,
                    parent_bits: r,
                });
            }
        }

        let mut layers = Vec::with_capacity(depth);
        for (row, &lut_count) in raw.iter().zip(&counts) {
            let r = row.r.unwrap_or(0);
            let width_err = |reason: String| TreeError::WidthViolation {
                layer: row.l,
                reason,
            };
            if row.v != r + row.s {
                return Err(width_err(format!(
                    "v = {} but r + s = {}",
                    row.v,
                    r + row.s
                )));
            }
            if row.v == 0 {
                return Err(width_err("v must be at least 1".into()));
            }
            if row.u == 0 {
                return Err(width_err("u must be at least 1".into()));
            }
            if row.v > row.u {
                return Err(width_err(format!(
                    "v = {} exceeds u = {}; 2^v distinct outputs do not exist",
                    row.v, row.u
                )));
            }
            if row.u > MAX_WORD_BITS {
                return Err(width_err(format!(
                    "u = {} exceeds the supported maximum of {MAX_WORD_BITS}",
                    row.u
                )));
            }
            layers.push(LayerParams {
                index: row.l,
                fanin: row.t,
                lut_count,
                parent_bits: r,
                info_bits: row.s,
                in_bits: row.v,
                out_bits: row.u,
            });
        }

        let leaf = layers.last().expect("non-empty");
        let bits_per_pam = m_sb / 2;
        if leaf.out_bits % bits_per_pam != 0 {
            return Err(TreeError::GranularityViolation(format!(
                "leaf output u = {} is not a whole number of {bits_per_pam}-bit PAM symbols",
                leaf.out_bits
            )));
        }
        let n_out = leaf.lut_count * leaf.out_bits;
        if n_out % m_sb != 0 {
            return Err(TreeError::GranularityViolation(format!(
                "n_out = {n_out} is not a whole number of QAM symbols ({m_sb} shaped bits each)"
            )));
        }
        let n_info = layers.iter().map(|l| l.lut_count * l.info_bits).sum();

        Ok(Self {
            layers,
            bits_per_qam: m,
            shaped_bits_per_qam: m_sb,
            n_info,
            n_out,
            n_pam: n_out / bits_per_pam,
        })
    }

    /// Layers in top-down order (`L` first).
    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Parameters of layer `index` (1-based, leaf = 1).
    pub fn layer(&self, index: usize) -> &LayerParams {
        &self.layers[self.layers.len() - index]
    }

    pub fn top(&self) -> &LayerParams {
        &self.layers[0]
    }

    pub fn leaf(&self) -> &LayerParams {
        self.layers.last().expect("validated spec is non-empty")
    }

    pub fn bits_per_qam(&self) -> usize {
        self.bits_per_qam
    }

    pub fn shaped_bits_per_qam(&self) -> usize {
        self.shaped_bits_per_qam
    }

    /// Shaped bits per PAM symbol (one amplitude class).
    pub fn class_bits(&self) -> usize {
        self.shaped_bits_per_qam / 2
    }

    /// Information bits per DM word, `N_in`.
    pub fn n_info(&self) -> usize {
        self.n_info
    }

    /// Shaped output bits per DM word, `T_1 * u_1`.
    pub fn n_out(&self) -> usize {
        self.n_out
    }

    /// PAM symbols per DM word, `N_s`.
    pub fn n_pam(&self) -> usize {
        self.n_pam
    }

    pub fn lut_size_report(&self) -> LutSizeReport {
        let mut report = LutSizeReport {
            dm_bits: 0,
            invdm_bits: 0,
        };
        for l in &self.layers {
            let count = l.lut_count as u128;
            report.dm_bits += count * (1u128 << l.in_bits) * l.out_bits as u128;
            report.invdm_bits += count * (1u128 << l.out_bits) * l.in_bits as u128;
        }
        report
    }

    /// The table in config-file form (every field written out).
    pub fn to_raw(&self) -> Vec<RawLayer> {
        self.layers
            .iter()
            .map(|l| RawLayer {
                l: l.index,
                t: l.fanin,
                lut_count: Some(l.lut_count),
                r: l.fanin.map(|_| l.parent_bits),
                s: l.info_bits,
                v: l.in_bits,
                u: l.out_bits,
            })
            .collect()
    }

    /// Canonical byte encoding of the parameter table.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.bits_per_qam as u32).to_le_bytes());
        out.extend_from_slice(&(self.shaped_bits_per_qam as u32).to_le_bytes());
        out.extend_from_slice(&(self.layers.len() as u32).to_le_bytes());
        for l in &self.layers {
            for field in [
                l.index,
                l.fanin.unwrap_or(0),
                l.lut_count,
                l.parent_bits,
                l.info_bits,
                l.in_bits,
                l.out_bits,
            ] {
                out.extend_from_slice(&(field as u32).to_le_bytes());
            }
        }
        out
    }

    /// First 8 bytes of the SHA-256 of [`TreeSpec::canonical_bytes`].
    pub fn digest(&self) -> [u8; 8] {
        let hash = Sha256::digest(self.canonical_bytes());
        let mut out = [0u8; 8];
        out.copy_from_slice(&hash[..8]);
        out
    }
}

fn check_modulation(m: usize, m_sb: usize) -> Result<(), TreeError> {
    let fail = |reason| Err(TreeError::InvalidModulation { m, m_sb, reason });
    if m_sb < 2 || !m_sb.is_multiple_of(2) {
        return fail("m_sb must be a positive even number");
    }
    if !m.is_multiple_of(2) {
        return fail("m must be even");
    }
    if m < m_sb + 2 {
        return fail("each dimension needs at least an unshaped sign bit");
    }
    if m > 32 {
        return fail("m larger than 32 is not supported");
    }
    Ok(())
}
