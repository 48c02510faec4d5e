use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use safeprime_prng::prime_table::{IndexSet, PrimeTable, TableError};

fn brute_force(k: u32) -> Vec<u64> {
    let prime = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
    ((1u64 << (k - 1))..(1u64 << k)).filter(|&p| prime(p) && prime((p - 1) / 2)).collect()
}

#[test]
fn full_tables_match_enumeration() {
    for k in [8, 9] {
        let t = PrimeTable::build_full(k).unwrap();
        assert_eq!(t.entries(), brute_force(k).as_slice(), "k = {k}");
    }
    assert_eq!(PrimeTable::build_full(8).unwrap().entries(), &[167, 179, 227]);
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let t = PrimeTable::build(9, 7, &mut rng).unwrap();
    assert_eq!(t.entries(), brute_force(9).as_slice());
}

#[test]
fn top_tables_are_the_largest() {
    let all = brute_force(16);
    let t = PrimeTable::build_top(16, 20).unwrap();
    assert_eq!(t.entries(), &all[all.len() - 20..]);
    assert_eq!(PrimeTable::build_top(8, 3).unwrap().entries(), &[167, 179, 227]);
    assert!(matches!(
        PrimeTable::build_top(8, 4),
        Err(TableError::Exhausted { found: 3, .. })
    ));
    let top = PrimeTable::build_top(32, 4).unwrap();
    assert!(top.entries().iter().all(|&p| p > 4_290_000_000));
}

#[test]
fn build_sixteen_bit_subset() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let t = PrimeTable::build(16, 64, &mut rng).unwrap();
    let all = brute_force(16);
    assert_eq!(t.len(), 64);
    assert!(t.entries().windows(2).all(|w| w[0] < w[1]));
    assert!(t.entries().iter().all(|p| all.contains(p)));
    assert_eq!(t.index_bits(), 6);
}

#[test]
fn exhaustion_reports_partial_count() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    match PrimeTable::build(8, 1_000_000, &mut rng) {
        Err(TableError::Exhausted { found, requested, .. }) => {
            assert_eq!(found, 3);
            assert_eq!(requested, 1_000_000);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn file_format() {
    let t = PrimeTable::from_entries(8, vec![167, 179]).unwrap();
    assert_eq!(t.to_text(), "SAFEPRIMES v1 k=8 count=2\n167\n179\n");
    assert!(PrimeTable::from_entries(8, vec![]).is_err());
    let bad_entry = "SAFEPRIMES v1 k=8 count=2\n13\n167\n";
    match PrimeTable::load(bad_entry.as_bytes()) {
        Err(TableError::Integrity { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
    let short = "SAFEPRIMES v1 k=8 count=3\n167\n179\n";
    assert!(matches!(PrimeTable::load(short.as_bytes()), Err(TableError::Parse { .. })));
    let header = "SAFEPRIMES v2 k=8 count=2\n167\n179\n";
    assert!(matches!(PrimeTable::load(header.as_bytes()), Err(TableError::Parse { .. })));
    let valid = "SAFEPRIMES v1 k=8 count=3\n167\n179\n227\n";
    assert_eq!(PrimeTable::load(valid.as_bytes()).unwrap().entries(), &[167, 179, 227]);
}

#[test]
fn lookup() {
    let t = PrimeTable::build_full(8).unwrap();
    assert_eq!(t.get(0).unwrap().to_u64(), Some(167));
    assert_eq!(t.get(t.len() - 1).unwrap().to_u64(), Some(227));
    assert!(matches!(t.get(t.len()), Err(TableError::Index { .. })));
    assert!(IndexSet::new(vec![0, 3], &t).is_err());
    assert!(IndexSet::new(vec![0], &t).is_err());
}

#[test]
fn key_space_accounting() {
    let t = PrimeTable::build_full(16).unwrap();
    let r = t.index_bits();
    assert!(1usize << r <= t.len() && t.len() < 1usize << (r + 1));
    for s in [2usize, 4, 6] {
        let bits = 16 + s as u64 * r as u64;
        assert_eq!(t.key_space_bits(s), bits);
        assert_eq!(t.key_space_size(s), num_bigint::BigUint::from(1u32) << bits);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn save_load_round_trip(seed in any::<u64>(), count in 2usize..150) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let t = PrimeTable::build(16, count, &mut rng).unwrap();
        let mut buf = Vec::new();
        t.save(&mut buf).unwrap();
        prop_assert_eq!(PrimeTable::load(buf.as_slice()).unwrap(), t);
    }
}
