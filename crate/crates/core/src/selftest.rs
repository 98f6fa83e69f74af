//! Built-in consistency checks run by `hidm selftest`.
//!
//! Toy trees are checked exhaustively against a brute-force re-derivation
//! of every LUT and against the full codebook; the main configuration is
//! checked by random round trips and a sampled-vs-exact PMF comparison.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{codebook_class_pmf, exact_class_pmf, monte_carlo_pmf};
use crate::bits::BitWord;
use crate::codec::{decode, encode};
use crate::config::{ToolConfig, TOY_CONFIGS};
use crate::lut_synthesis::{ClassEnergyTable, LutSet};
use crate::tree_config::TreeSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelfTestReport {
    pub checks: Vec<Check>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn record(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status} {}: {}\n", c.name, c.detail));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!("{} checks, {failed} failed\n", self.checks.len()));
        out
    }
}

/// Brute-force LUT tables (top-down) for `spec`.
///
/// Every layer is rebuilt by scoring all `2^u` words from scratch and fully
/// sorting them; shares no code with the synthesis path.
pub fn brute_force_tables(spec: &TreeSpec, classes: &ClassEnergyTable) -> Vec<Vec<u32>> {
    let class_bits = spec.class_bits();
    let mut tables = Vec::new();
    let mut child_bands: Vec<f64> = Vec::new();
    for (pos, layer) in spec.layers().iter().enumerate().rev() {
        let u = layer.out_bits;
        let mut scored: Vec<(f64, u32)> = (0..1u32 << u)
            .map(|w| {
                let bits: Vec<bool> = (0..u).map(|i| (w >> (u - 1 - i)) & 1 == 1).collect();
                let energy = if layer.is_leaf() {
                    bits.chunks(class_bits)
                        .map(|sym| {
                            classes.energy(sym.iter().fold(0, |a, &b| a * 2 + usize::from(b)))
                        })
                        .sum()
                } else {
                    let child = &spec.layers()[pos + 1];
                    bits.chunks(child.parent_bits)
                        .map(|field| {
                            child_bands[field.iter().fold(0, |a, &b| a * 2 + usize::from(b))]
                        })
                        .sum()
                };
                (energy, w)
            })
            .collect();
        scored.sort_by(|a, b| a.partial_cmp(b).expect("finite energies"));
        scored.truncate(1 << layer.in_bits);
        let band = 1usize << layer.info_bits;
        child_bands = (0..scored.len() / band)
            .map(|b| {
                let mut total = 0.0;
                for item in &scored[b * band..(b + 1) * band] {
                    total += item.0;
                }
                total / band as f64
            })
            .collect();
        tables.push(scored.into_iter().map(|(_, w)| w).collect());
    }
    tables.reverse();
    tables
}

fn word_of(value: u64, width: usize) -> BitWord {
    let mut w = BitWord::with_capacity(width);
    w.push_uint(value, width);
    w
}

fn shaped_energy(set: &LutSet, shaped: &BitWord) -> f64 {
    let b = set.spec().class_bits();
    (0..shaped.len() / b)
        .map(|k| set.classes().energy(shaped.read_uint(k * b, b) as usize))
        .sum()
}

fn check_toy(report: &mut SelfTestReport, name: &str, set: &LutSet) {
    let spec = set.spec();
    let oracle = brute_force_tables(spec, set.classes());
    let synthesized: Vec<Vec<u32>> = set.luts().iter().map(|l| l.entries().to_vec()).collect();
    report.record(
        format!("{name}/synthesis-oracle"),
        oracle == synthesized,
        format!("{} layers compared", spec.depth()),
    );

    let n = spec.n_info();
    let mut seen = HashSet::new();
    let mut round_trip_failures = 0;
    let zero_energy = shaped_energy(set, &encode(set, &BitWord::zeros(n)).expect("N_in bits"));
    let mut below_zero = 0;
    for v in 0..1u64 << n {
        let w = word_of(v, n);
        let shaped = encode(set, &w).expect("N_in bits");
        if decode(set, &shaped).as_ref() != Ok(&w) {
            round_trip_failures += 1;
        }
        if shaped_energy(set, &shaped) < zero_energy {
            below_zero += 1;
        }
        seen.insert(shaped);
    }
    report.record(
        format!("{name}/round-trip"),
        round_trip_failures == 0,
        format!("{} words, {round_trip_failures} failures", 1u64 << n),
    );
    report.record(
        format!("{name}/injective"),
        seen.len() == 1 << n,
        format!("{} distinct outputs", seen.len()),
    );
    report.record(
        format!("{name}/index-zero-minimal"),
        below_zero == 0,
        format!("{below_zero} words cheaper than encode(0)"),
    );

    let exact = exact_class_pmf(set);
    let brute = codebook_class_pmf(set).expect("toy codebook is small");
    let err = exact
        .iter()
        .zip(&brute)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    report.record(
        format!("{name}/dp-vs-codebook"),
        err <= 1e-12,
        format!("max |diff| = {err:.3e}"),
    );
}

/// Runs every check: exhaustive ones on the bundled toy trees, sampled ones
/// (`words` random words from `seed`) on `config`.
pub fn run_selftest(config: &ToolConfig, words: usize, seed: u64) -> SelfTestReport {
    let mut report = SelfTestReport::default();
    for (name, text) in TOY_CONFIGS {
        match ToolConfig::parse(text).and_then(|c| c.synthesize()) {
            Ok(set) => check_toy(&mut report, name, &set),
            Err(e) => report.record(format!("{name}/load"), false, e.to_string()),
        }
    }

    let set = match config.synthesize() {
        Ok(set) => set,
        Err(e) => {
            report.record("config/synthesize", false, e.to_string());
            return report;
        }
    };
    let spec = set.spec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let failures = (0..words)
        .filter(|_| {
            let w = BitWord::random(&mut rng, spec.n_info());
            encode(&set, &w).and_then(|s| decode(&set, &s)).as_ref() != Ok(&w)
        })
        .count();
    report.record(
        "config/round-trip",
        failures == 0,
        format!("{words} random words, {failures} failures"),
    );

    let exact = exact_class_pmf(&set);
    let mc = monte_carlo_pmf(&set, words.max(2), seed);
    let worst = exact
        .iter()
        .zip(mc.pmf.iter().zip(&mc.stderr))
        .map(|(e, (m, s))| {
            if *s > 0.0 {
                (e - m).abs() / s
            } else if e == m {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max);
    report.record(
        "config/dp-vs-monte-carlo",
        worst <= 4.0,
        format!("{} words, worst deviation {worst:.2} sigma", mc.words),
    );

    if let Ok(code) = config.ccdm_code() {
        let k = code.input_bits() as usize;
        let counts = code.composition().counts().to_vec();
        let trials = words.min(100);
        let bad = (0..trials)
            .filter(|_| {
                let w = BitWord::random(&mut rng, k);
                match code.encode(&w) {
                    Ok(seq) => {
                        seq.counts(counts.len()) != counts || code.decode(&seq).as_ref() != Ok(&w)
                    }
                    Err(_) => true,
                }
            })
            .count();
        report.record(
            "config/ccdm-round-trip",
            bad == 0,
            format!("{trials} random words, {bad} failures"),
        );
    }
    report
}
