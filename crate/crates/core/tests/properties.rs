use std::collections::HashSet;

use num_bigint::BigUint;
use proptest::prelude::*;

use hidm::analysis::{codebook_class_pmf, exact_class_pmf, hidm_stats, stats_from_mb};
use hidm::ccdm::{rank, unrank, CcdmCode, Composition};
use hidm::codec::{decode, encode, encode_stream};
use hidm::config::ToolConfig;
use hidm::mb_solver::{mb_fit, MbDistribution, FIT_TOLERANCE};
use hidm::symbol_map::assemble;
use hidm::tree_config::RawLayer;
use hidm::{BitWord, ClassEnergyTable, LutSet, TreeSpec};

fn two_layer(top_s: usize, t: usize, r: usize, s: usize, u: usize) -> Vec<RawLayer> {
    vec![
        RawLayer {
            l: 2,
            t: None,
            lut_count: Some(1),
            r: None,
            s: top_s,
            v: top_s,
            u: t * r,
        },
        RawLayer {
            l: 1,
            t: Some(t),
            lut_count: None,
            r: Some(r),
            s,
            v: r + s,
            u,
        },
    ]
}

/// Small valid two-layer trees for 256-QAM with 4 shaped bits.
fn small_tree() -> impl Strategy<Value = TreeSpec> {
    (1usize..=4, 2usize..=3, 1usize..=3, 0usize..=2, 1usize..=3)
        .prop_map(|(top_s, t, r, s, half_u)| two_layer(top_s, t, r, s, 2 * half_u))
        .prop_filter_map("invalid tree", |raw| {
            let spec = TreeSpec::validate(&raw, 8, 4).ok()?;
            (spec.n_info() <= 12).then_some(spec)
        })
}

fn small_set() -> impl Strategy<Value = LutSet> {
    small_tree().prop_map(|spec| {
        LutSet::synthesize(&spec, &ClassEnergyTable::for_modulation(8, 4)).unwrap()
    })
}

fn word_of(value: u64, width: usize) -> BitWord {
    let mut w = BitWord::new();
    w.push_uint(value, width);
    w
}

fn shaped_energy(set: &LutSet, shaped: &BitWord) -> f64 {
    (0..shaped.len() / 2)
        .map(|k| set.classes().energy(shaped.read_uint(2 * k, 2) as usize))
        .sum()
}

fn bundled() -> &'static LutSet {
    use std::sync::OnceLock;
    static SET: OnceLock<LutSet> = OnceLock::new();
    SET.get_or_init(|| ToolConfig::bundled().synthesize().unwrap())
}

fn small_composition() -> impl Strategy<Value = Composition> {
    prop::collection::vec(0u32..=4, 2..=4)
        .prop_filter("empty", |c| c.iter().sum::<u32>() > 0)
        .prop_map(|c| Composition::new(c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn validation_is_idempotent(spec in small_tree()) {
        prop_assert_eq!(TreeSpec::validate(&spec.to_raw(), 8, 4).unwrap(), spec);
    }

    #[test]
    fn lut_structure(set in small_set()) {
        for lut in set.luts() {
            let entries = lut.entries();
            let distinct: HashSet<_> = entries.iter().collect();
            prop_assert_eq!(distinct.len(), entries.len());
            prop_assert!(lut.entry_energies().windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(lut.band_energy().windows(2).all(|w| w[0] <= w[1]));
            for (i, &e) in entries.iter().enumerate() {
                prop_assert_eq!(lut.lookup(e), Some(i as u32));
            }
            let unselected = (0..1u32 << lut.out_bits()).filter(|&w| lut.lookup(w).is_none()).count();
            prop_assert_eq!(unselected, (1 << lut.out_bits()) - entries.len());
        }
        let again = LutSet::synthesize(set.spec(), set.classes()).unwrap();
        prop_assert_eq!(again, set);
    }

    #[test]
    fn codec_exhaustive_on_small_trees(set in small_set()) {
        let n = set.spec().n_info();
        let zero = shaped_energy(&set, &encode(&set, &BitWord::zeros(n)).unwrap());
        let mut seen = HashSet::new();
        for v in 0..1u64 << n {
            let w = word_of(v, n);
            let shaped = encode(&set, &w).unwrap();
            prop_assert_eq!(shaped.len(), set.spec().n_out());
            prop_assert!(shaped_energy(&set, &shaped) >= zero);
            prop_assert_eq!(&decode(&set, &shaped).unwrap(), &w);
            seen.insert(shaped);
        }
        prop_assert_eq!(seen.len(), 1 << n);
    }

    #[test]
    fn exact_pmf_matches_codebook(set in small_set()) {
        let exact = exact_class_pmf(&set);
        let brute = codebook_class_pmf(&set).unwrap();
        prop_assert!((exact.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for (a, b) in exact.iter().zip(&brute) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn bundled_round_trip(bytes in prop::collection::vec(any::<u8>(), 64)) {
        let set = bundled();
        let w = BitWord::from_bytes(&bytes, 507).unwrap();
        prop_assert_eq!(decode(set, &encode(set, &w).unwrap()).unwrap(), w);
    }

    #[test]
    fn encoding_is_stateless(bytes in prop::collection::vec(any::<u8>(), 127)) {
        let set = bundled();
        let stream = BitWord::from_bytes(&bytes, 2 * 507).unwrap();
        let first = encode(set, &stream.slice(0, 507)).unwrap();
        let second = encode(set, &stream.slice(507, 507)).unwrap();
        let mut joined = first.clone();
        joined.extend_from(&second);
        prop_assert_eq!(encode_stream(set, &stream, false).unwrap(), joined);
    }

    #[test]
    fn ccdm_rank_unrank(comp in small_composition(), pick in any::<u64>()) {
        let count = comp.multiset_count();
        let index = BigUint::from(pick) % &count;
        let seq = unrank(&comp, &index).unwrap();
        prop_assert_eq!(seq.counts(comp.classes()), comp.counts().to_vec());
        prop_assert_eq!(rank(&seq, comp.classes()).unwrap(), index.clone());
        let next = &index + 1u32;
        if next < count {
            let after = unrank(&comp, &next).unwrap();
            prop_assert!(seq.symbols() < after.symbols());
        }
        prop_assert!(unrank(&comp, &count).is_err());
    }

    #[test]
    fn ccdm_capacity_bound(comp in small_composition()) {
        let k_max = comp.max_bits();
        prop_assert!(BigUint::from(1u32) << k_max <= comp.multiset_count());
        prop_assert!(CcdmCode::new(comp.clone(), k_max).is_ok());
        prop_assert!(CcdmCode::new(comp, k_max + 1).is_err());
    }

    #[test]
    fn ccdm_bundled_code_keeps_composition(bytes in prop::collection::vec(any::<u8>(), 64)) {
        let code = CcdmCode::new(Composition::new(vec![157, 104, 46, 13]).unwrap(), 507).unwrap();
        let w = BitWord::from_bytes(&bytes, 507).unwrap();
        let seq = code.encode(&w).unwrap();
        prop_assert_eq!(seq.counts(4), vec![157, 104, 46, 13]);
        prop_assert_eq!(code.decode(&seq).unwrap(), w);
    }

    #[test]
    fn mb_normalized_and_monotone(a in 0.0f64..0.5, b in 0.0f64..0.5) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (p, q) = (MbDistribution::with_lambda(lo, 8), MbDistribution::with_lambda(hi, 8));
        prop_assert!((p.pmf().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(p.two_h() > q.two_h());
        prop_assert!(p.energy() > q.energy());
    }

    #[test]
    fn mb_fit_hits_target(target in 2.05f64..7.95) {
        let dist = mb_fit(target, 8).unwrap();
        prop_assert!((dist.two_h() - target).abs() <= FIT_TOLERANCE);
        prop_assert_eq!(stats_from_mb(&dist).r_loss, 0.0);
    }
}

#[test]
fn rate_loss_is_nonnegative() {
    let s = hidm_stats(bundled());
    assert!(s.r_loss >= 0.0);
    assert!((s.amplitude_pmf.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    for pair in s.amplitude_pmf.chunks(2) {
        assert_eq!(pair[0], pair[1]);
    }
}

#[test]
fn lsb_average_gives_class_energy() {
    let table = ClassEnergyTable::for_modulation(8, 4);
    for class in 0..4u8 {
        let mean = (assemble(class, false, false).energy() + assemble(class, true, false).energy())
            as f64
            / 2.0;
        assert_eq!(mean, table.energy(class as usize));
    }
}

#[test]
fn lut_size_accounting() {
    let one = TreeSpec::validate(&two_layer(2, 2, 2, 1, 4), 8, 4)
        .unwrap()
        .lut_size_report();
    let mut raw = two_layer(2, 2, 2, 1, 4);
    raw[0].s = 3;
    raw[0].v = 3;
    raw[0].u = 4;
    let bigger = TreeSpec::validate(&raw, 8, 4).unwrap().lut_size_report();
    assert!(bigger.dm_bits > one.dm_bits);
    assert_eq!(one.dm_bits, 4 * 4 + 2 * 8 * 4);
    assert_eq!(one.invdm_bits, 16 * 2 + 2 * 16 * 3);
}
