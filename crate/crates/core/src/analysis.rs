//! Signal statistics of shaped words: class PMFs (exact and sampled),
//! energy, entropy, rate loss and constellation gain.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bits::BitWord;
use crate::ccdm::CcdmCode;
use crate::codec;
use crate::lut_synthesis::LutSet;
use crate::mb_solver::{entropy, mb_fit, MbDistribution, MbError};

/// Minimum distance between PAM amplitudes.
pub const D_MIN: f64 = 2.0;

/// Largest `N_in` for which [`codebook_class_pmf`] enumerates every word.
pub const MAX_EXHAUSTIVE_BITS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),
    #[error("N_in = {0} is too large to enumerate")]
    TooManyWords(usize),
    #[error(transparent)]
    Mb(#[from] MbError),
}

/// Exact class frequencies over all shaped symbols, for uniform input bits.
///
/// Walks the tree top-down carrying the index distribution of each layer
/// (summed over the LUTs of the layer): the top index is uniform, and a
/// parent word distribution induces `P(r)` on each child's parent field,
/// with the child's own info bits uniform on top.
pub fn exact_class_pmf(set: &LutSet) -> Vec<f64> {
    let spec = set.spec();
    let layers = spec.layers();
    let luts = set.luts();

    let top = layers[0].entry_count();
    let mut dist = vec![1.0 / top as f64; top];
    for (i, child) in layers.iter().enumerate().skip(1) {
        let fanin = child.fanin.expect("inner layer has a fan-in");
        let (r, s) = (child.parent_bits, child.info_bits);
        let parent = &luts[i - 1];
        let mut by_field = vec![0.0; 1 << r];
        for (index, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let w = parent.entry(index);
            for f in 0..fanin {
                let rv = (w >> (r * (fanin - 1 - f))) as usize & ((1 << r) - 1);
                by_field[rv] += p;
            }
        }
        let spread = 1.0 / (1u64 << s) as f64;
        dist = by_field
            .iter()
            .flat_map(|&p| std::iter::repeat_n(p * spread, 1 << s))
            .collect();
    }

    let class_bits = spec.class_bits();
    let leaf = spec.leaf();
    let symbols = leaf.out_bits / class_bits;
    let mut counts = vec![0.0; 1 << class_bits];
    let leaf_lut = set.lut(1);
    for (index, &p) in dist.iter().enumerate() {
        let w = leaf_lut.entry(index);
        for k in 0..symbols {
            let shift = leaf.out_bits - class_bits * (k + 1);
            counts[((w >> shift) as usize) & ((1 << class_bits) - 1)] += p;
        }
    }
    let total = (leaf.lut_count * symbols) as f64;
    counts.iter().map(|c| c / total).collect()
}

fn class_histogram(shaped: &BitWord, class_bits: usize, classes: usize) -> Vec<u64> {
    let mut counts = vec![0u64; classes];
    for k in 0..shaped.len() / class_bits {
        counts[shaped.read_uint(k * class_bits, class_bits) as usize] += 1;
    }
    counts
}

/// Class frequencies averaged over the full codebook (every `N_in`-bit word).
pub fn codebook_class_pmf(set: &LutSet) -> Result<Vec<f64>, AnalysisError> {
    let spec = set.spec();
    let n = spec.n_info();
    if n > MAX_EXHAUSTIVE_BITS {
        return Err(AnalysisError::TooManyWords(n));
    }
    let class_bits = spec.class_bits();
    let classes = 1 << class_bits;
    let mut totals = vec![0u64; classes];
    for value in 0..1u64 << n {
        let mut word = BitWord::with_capacity(n);
        word.push_uint(value, n);
        let shaped = codec::encode(set, &word).expect("word has N_in bits");
        for (t, c) in totals
            .iter_mut()
            .zip(class_histogram(&shaped, class_bits, classes))
        {
            *t += c;
        }
    }
    let all: u64 = totals.iter().sum();
    Ok(totals.iter().map(|&t| t as f64 / all as f64).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub words: usize,
    pub pmf: Vec<f64>,
    /// Standard error of each class frequency, from the per-word spread.
    pub stderr: Vec<f64>,
    /// Raw class counts over all encoded symbols.
    pub counts: Vec<u64>,
}

/// Encodes `n_words` uniformly random words drawn from a ChaCha8 stream
/// seeded with `seed` and tallies the shaped classes.
pub fn monte_carlo_pmf(set: &LutSet, n_words: usize, seed: u64) -> McEstimate {
    let spec = set.spec();
    let class_bits = spec.class_bits();
    let classes = 1 << class_bits;
    let symbols = spec.n_pam() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut counts = vec![0u64; classes];
    let mut sum = vec![0.0; classes];
    let mut sum_sq = vec![0.0; classes];
    for _ in 0..n_words {
        let word = BitWord::random(&mut rng, spec.n_info());
        let shaped = codec::encode(set, &word).expect("word has N_in bits");
        for (c, n) in class_histogram(&shaped, class_bits, classes)
            .into_iter()
            .enumerate()
        {
            counts[c] += n;
            let f = n as f64 / symbols;
            sum[c] += f;
            sum_sq[c] += f * f;
        }
    }
    let n = n_words as f64;
    let pmf: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let stderr = pmf
        .iter()
        .zip(&sum_sq)
        .map(|(mean, sq)| {
            if n_words < 2 {
                return 0.0;
            }
            let var = ((sq - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        })
        .collect();
    McEstimate {
        words: n_words,
        pmf,
        stderr,
        counts,
    }
}

/// Rate bookkeeping needed to turn a class PMF into signal statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    /// Label bits per QAM symbol, `m`.
    pub bits_per_qam: usize,
    /// Shaped label bits per QAM symbol, `m_sb`.
    pub shaped_bits_per_qam: usize,
    /// Information bits per DM word.
    pub n_info: usize,
    /// PAM symbols per DM word.
    pub n_pam: usize,
}

impl RateParams {
    /// Spectral efficiency per 2D symbol at code rate 1:
    /// `2 ((m - m_sb) / 2 + N_in / N_s)`.
    pub fn beta(&self) -> f64 {
        let unshaped = (self.bits_per_qam - self.shaped_bits_per_qam) as f64 / 2.0;
        2.0 * (unshaped + self.n_info as f64 / self.n_pam as f64)
    }
}

/// One column of the statistics table.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub n_pam: Option<usize>,
    /// Magnitudes `1, 3, ..`.
    pub amplitudes: Vec<f64>,
    /// `P(|X| = a)`.
    pub amplitude_pmf: Vec<f64>,
    /// Mean QAM symbol energy (both dimensions).
    pub energy: f64,
    pub two_h: f64,
    pub beta: f64,
    pub r_loss: f64,
    pub gain_db: f64,
    pub d_min: f64,
}

fn check_pmf(pmf: &[f64], expected_len: usize) -> Result<(), AnalysisError> {
    if pmf.len() != expected_len {
        return Err(AnalysisError::InvalidPmf(format!(
            "expected {expected_len} entries, got {}",
            pmf.len()
        )));
    }
    if pmf.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(AnalysisError::InvalidPmf(
            "entries must be finite and non-negative".into(),
        ));
    }
    let total: f64 = pmf.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(AnalysisError::InvalidPmf(format!("sums to {total}")));
    }
    Ok(())
}

fn gain_db(beta: f64, energy: f64) -> f64 {
    10.0 * (((2f64).powf(beta) - 1.0) * D_MIN * D_MIN / (6.0 * energy)).log10()
}

/// Statistics of a class PMF whose classes each spread uniformly over a
/// group of adjacent magnitudes (the unshaped LSBs), with a uniform sign.
pub fn stats_from_class_pmf(
    class_pmf: &[f64],
    rate: RateParams,
) -> Result<StatsReport, AnalysisError> {
    let (m, m_sb) = (rate.bits_per_qam, rate.shaped_bits_per_qam);
    check_pmf(class_pmf, 1 << (m_sb / 2))?;
    let group = 1usize << ((m - m_sb) / 2 - 1);
    let amplitudes: Vec<f64> = (0..class_pmf.len() * group)
        .map(|i| (2 * i + 1) as f64)
        .collect();
    let amplitude_pmf: Vec<f64> = class_pmf
        .iter()
        .flat_map(|&p| std::iter::repeat_n(p / group as f64, group))
        .collect();
    let energy = 2.0
        * amplitudes
            .iter()
            .zip(&amplitude_pmf)
            .map(|(a, p)| p * a * a)
            .sum::<f64>();
    let h = entropy(class_pmf) + (m - m_sb) as f64 / 2.0;
    let two_h = 2.0 * h;
    let beta = rate.beta();
    Ok(StatsReport {
        n_pam: Some(rate.n_pam),
        amplitudes,
        amplitude_pmf,
        energy,
        two_h,
        beta,
        r_loss: two_h - beta,
        gain_db: gain_db(beta, energy),
        d_min: D_MIN,
    })
}

/// Statistics of an ideal MB source, which converts all of its entropy into
/// rate (`β = 2H`, no rate loss).
pub fn stats_from_mb(dist: &MbDistribution) -> StatsReport {
    let two_h = dist.two_h();
    StatsReport {
        n_pam: None,
        amplitudes: dist.amplitudes().to_vec(),
        amplitude_pmf: dist.pmf().to_vec(),
        energy: dist.energy(),
        two_h,
        beta: two_h,
        r_loss: 0.0,
        gain_db: gain_db(two_h, dist.energy()),
        d_min: D_MIN,
    }
}

pub fn hidm_stats(set: &LutSet) -> StatsReport {
    let spec = set.spec();
    stats_from_class_pmf(
        &exact_class_pmf(set),
        RateParams {
            bits_per_qam: spec.bits_per_qam(),
            shaped_bits_per_qam: spec.shaped_bits_per_qam(),
            n_info: spec.n_info(),
            n_pam: spec.n_pam(),
        },
    )
    .expect("exact pmf is normalized")
}

pub fn ccdm_stats(code: &CcdmCode, m: usize, m_sb: usize) -> Result<StatsReport, AnalysisError> {
    let comp = code.composition();
    stats_from_class_pmf(
        &comp.pmf(),
        RateParams {
            bits_per_qam: m,
            shaped_bits_per_qam: m_sb,
            n_info: code.input_bits() as usize,
            n_pam: comp.len() as usize,
        },
    )
}

/// A column of published reference statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceColumn {
    pub n_pam: Option<usize>,
    pub amplitude_pmf: [f64; 8],
    pub energy: f64,
    pub two_h: f64,
    pub beta: f64,
    pub r_loss: f64,
    pub gain_db: f64,
}

/// Published CCDM / HiDM / MB statistics for the bundled 7-layer,
/// 320-symbol PS-256-QAM configuration.
pub const REFERENCE: [ReferenceColumn; 3] = [
    ReferenceColumn {
        n_pam: Some(320),
        amplitude_pmf: [
            0.2453, 0.2453, 0.1625, 0.1625, 0.0719, 0.0719, 0.0203, 0.0203,
        ],
        energy: 74.00,
        two_h: 7.242,
        beta: 7.169,
        r_loss: 0.073,
        gain_db: 1.097,
    },
    ReferenceColumn {
        n_pam: Some(320),
        amplitude_pmf: [
            0.2376, 0.2376, 0.1684, 0.1684, 0.0757, 0.0757, 0.0183, 0.0183,
        ],
        energy: 74.70,
        two_h: 7.252,
        beta: 7.169,
        r_loss: 0.083,
        gain_db: 1.056,
    },
    ReferenceColumn {
        n_pam: None,
        amplitude_pmf: [
            0.2628, 0.2355, 0.1891, 0.1360, 0.0877, 0.0506, 0.0262, 0.0121,
        ],
        energy: 68.31,
        two_h: 7.169,
        beta: 7.169,
        r_loss: 0.0,
        gain_db: 1.444,
    },
];

pub const COLUMN_NAMES: [&str; 3] = ["CCDM", "HiDM", "MB"];

/// CCDM, HiDM and MB statistics side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct TableReport {
    pub columns: [StatsReport; 3],
}

pub fn table_iv_report(
    set: &LutSet,
    code: &CcdmCode,
    mb_target: f64,
) -> Result<TableReport, AnalysisError> {
    let spec = set.spec();
    let (m, m_sb) = (spec.bits_per_qam(), spec.shaped_bits_per_qam());
    let ccdm = ccdm_stats(code, m, m_sb)?;
    let hidm = hidm_stats(set);
    let mb = stats_from_mb(&mb_fit(mb_target, m)?);
    Ok(TableReport {
        columns: [ccdm, hidm, mb],
    })
}

struct Row {
    label: String,
    values: [Option<f64>; 3],
    reference: [Option<f64>; 3],
    decimals: usize,
}

impl TableReport {
    fn rows(&self) -> Vec<Row> {
        let pick = |f: &dyn Fn(&StatsReport) -> Option<f64>,
                    g: &dyn Fn(&ReferenceColumn) -> Option<f64>,
                    label: String,
                    decimals| Row {
            label,
            values: [
                f(&self.columns[0]),
                f(&self.columns[1]),
                f(&self.columns[2]),
            ],
            reference: [g(&REFERENCE[0]), g(&REFERENCE[1]), g(&REFERENCE[2])],
            decimals,
        };
        let mut rows = vec![pick(
            &|s| s.n_pam.map(|n| n as f64),
            &|r| r.n_pam.map(|n| n as f64),
            "N_s".into(),
            0,
        )];
        let amplitudes = self.columns[0].amplitudes.len().min(8);
        for i in 0..amplitudes {
            rows.push(pick(
                &|s| s.amplitude_pmf.get(i).copied(),
                &|r| Some(r.amplitude_pmf[i]),
                format!("P(|X|={})", 2 * i + 1),
                4,
            ));
        }
        rows.push(pick(
            &|s| Some(s.energy),
            &|r| Some(r.energy),
            "E".into(),
            2,
        ));
        rows.push(pick(
            &|s| Some(s.two_h),
            &|r| Some(r.two_h),
            "2H(X)".into(),
            3,
        ));
        rows.push(pick(&|s| Some(s.beta), &|r| Some(r.beta), "beta".into(), 3));
        rows.push(pick(
            &|s| Some(s.r_loss),
            &|r| Some(r.r_loss),
            "R_loss".into(),
            3,
        ));
        rows.push(pick(
            &|s| Some(s.gain_db),
            &|r| Some(r.gain_db),
            "G_dB".into(),
            3,
        ));
        rows
    }

    /// Aligned table: each value followed by its deviation from the
    /// reference value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<10}", "quantity");
        for name in COLUMN_NAMES {
            let _ = write!(out, " {:>10} {:>9}", name, "(delta)");
        }
        out.push('\n');
        for row in self.rows() {
            let _ = write!(out, "{:<10}", row.label);
            for (v, r) in row.values.iter().zip(&row.reference) {
                match v {
                    Some(v) => {
                        let _ = write!(out, " {:>10.*}", row.decimals, v);
                    }
                    None => {
                        let _ = write!(out, " {:>10}", "-");
                    }
                }
                match (v, r) {
                    (Some(v), Some(r)) => {
                        let _ = write!(out, " {:>+9.*}", row.decimals.max(3) + 1, v - r);
                    }
                    _ => {
                        let _ = write!(out, " {:>9}", "");
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    /// CSV with one row per quantity and a value/reference column pair per
    /// matcher.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,ccdm,ccdm_ref,hidm,hidm_ref,mb,mb_ref\n");
        let cell = |v: &Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
        for row in self.rows() {
            out.push_str(&row.label);
            for (v, r) in row.values.iter().zip(&row.reference) {
                let _ = write!(out, ",{},{}", cell(v), cell(r));
            }
            out.push('\n');
        }
        out
    }
}

impl StatsReport {
    /// Single-column text rendering.
    pub fn to_text(&self, name: &str) -> String {
        let mut out = format!("{name}\n");
        if let Some(n) = self.n_pam {
            let _ = writeln!(out, "  N_s        {n}");
        }
        for (a, p) in self.amplitudes.iter().zip(&self.amplitude_pmf) {
            let _ = writeln!(out, "  P(|X|={a:<2})  {p:.4}");
        }
        let _ = writeln!(out, "  E          {:.2}", self.energy);
        let _ = writeln!(out, "  2H(X)      {:.3}", self.two_h);
        let _ = writeln!(out, "  beta       {:.3}", self.beta);
        let _ = writeln!(out, "  R_loss     {:.3}", self.r_loss);
        let _ = writeln!(out, "  G_dB       {:.3}", self.gain_db);
        out
    }

    /// `quantity,value` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,value\n");
        if let Some(n) = self.n_pam {
            let _ = writeln!(out, "N_s,{n}");
        }
        for (a, p) in self.amplitudes.iter().zip(&self.amplitude_pmf) {
            let _ = writeln!(out, "P(|X|={a}),{p:.6}");
        }
        for (k, v) in [
            ("E", self.energy),
            ("2H(X)", self.two_h),
            ("beta", self.beta),
            ("R_loss", self.r_loss),
            ("G_dB", self.gain_db),
        ] {
            let _ = writeln!(out, "{k},{v:.6}");
        }
        out
    }
}
