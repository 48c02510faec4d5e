use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use safeprime_prng::known::RG_KATS;
use safeprime_prng::modmath::{generator_sqrt_rule, is_quadratic_residue, SafePrime};
use safeprime_prng::prng::Mode;
use safeprime_prng::rg::*;

fn pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// One RG step over machine words.
fn naive_step(x: u64, p: u64, g: u64, l: u32) -> (u64, u64) {
    let n = 64 - p.leading_zeros();
    let t = 1u64 << l;
    let b = (x >> (n - 1)) & 1;
    let next = pow(pow(g, t, p), x / t, p) * pow(g, b, p) % p;
    (next, next & ((1 << (t - 1)) - 1))
}

fn safe_primes_3_mod_4(limit: u64) -> Vec<u64> {
    let prime = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
    (7..limit).filter(|&p| p % 4 == 3 && prime(p) && prime((p - 1) / 2)).collect()
}

fn params(p: u64, l: u32) -> Option<RgParams> {
    let sp = SafePrime::from_u64(p).unwrap();
    let g = generator_sqrt_rule(&sp).unwrap();
    RgParams::new(sp, g, l, Mode::Test).ok()
}

#[test]
fn known_answers() {
    for kat in RG_KATS {
        let sp = SafePrime::from_u64(kat.p).unwrap();
        let pr = RgParams::new(sp, BigUint::from(kat.g), kat.l, Mode::Test).unwrap();
        let out = rg_generate(BigUint::from(kat.seed), &pr, kat.outputs.len()).unwrap();
        let values: Vec<u64> = out.iter().map(|h| h.value.to_u64().unwrap()).collect();
        assert_eq!(values, kat.outputs);
        let mut x = kat.seed;
        for &want in kat.outputs {
            let (next, r) = naive_step(x, kat.p, kat.g, kat.l);
            assert_eq!(r, want);
            x = next;
        }
        assert_eq!(x, kat.final_state);
        let mut state = RgState::new(BigUint::from(kat.seed), &pr).unwrap();
        for _ in kat.outputs {
            rg_step(&mut state, &pr);
        }
        assert_eq!(state.value(), &BigUint::from(kat.final_state));
    }
}

#[test]
fn toy_hand_example() {
    let pr = RgParams::new(SafePrime::from_u64(23).unwrap(), BigUint::from(5u32), 1, Mode::Test).unwrap();
    assert_eq!(pr.g_hat(), &BigUint::from(2u32));
    let mut st = RgState::new(BigUint::from(4u32), &pr).unwrap();
    let r = rg_step(&mut st, &pr);
    assert_eq!((r.value.to_u64(), r.len), (Some(0), 1));
    assert_eq!(st.value(), &BigUint::from(4u32));
}

#[test]
fn parameter_rules() {
    let sp = |p| SafePrime::from_u64(p).unwrap();
    assert!(RgParams::new(sp(23), BigUint::from(5u32), 3, Mode::Test).is_err());
    assert!(RgParams::new(sp(23), BigUint::from(2u32), 1, Mode::Test).is_err());
    assert!(RgParams::new(sp(1019), BigUint::from(58u32), 2, Mode::Security).is_err());
    let pr = RgParams::new(sp(1019), BigUint::from(58u32), 2, Mode::Test).unwrap();
    assert_eq!((pr.t(), pr.n(), pr.margin()), (4, 10, 6));
    assert!(RgState::new(BigUint::from(1018u32), &pr).is_err());
    assert!(rg_generate(BigUint::from(1u32), &pr, 0).is_err());
}

#[test]
fn output_length_contract() {
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    let cases = [(1019u64, 2u32), (2039, 3), (65543, 3)];
    for (p, l) in cases {
        let pr = params(p, l).unwrap();
        for _ in 0..10_000 / cases.len() {
            let x: u64 = rng.gen_range(0..p - 1);
            let mut st = RgState::new(BigUint::from(x), &pr).unwrap();
            let r = rg_step(&mut st, &pr);
            assert_eq!(r.len, (1 << l) - 1);
            assert_eq!(r.to_bits().len() as u64, r.len);
            assert!(r.value.bits() <= r.len);
            assert!(st.value() < pr.p().value());
        }
    }
    let concat: usize = rg_generate(BigUint::from(9u32), &params(2039, 3).unwrap(), 25)
        .unwrap()
        .iter()
        .map(|h| h.to_bits().len())
        .sum();
    assert_eq!(concat, 25 * 7);
}

#[test]
fn reduction_over_toy_primes() {
    let mut checked = 0;
    for p in safe_primes_3_mod_4(1 << 16) {
        for l in 0..4 {
            let Some(pr) = params(p, l) else { continue };
            let bound = reduction_bound(&pr).to_u64().unwrap();
            let stride = (bound / 40).max(1);
            let g = pr.generator().to_u64().unwrap();
            for x in (0..bound).step_by(stride as usize) {
                let tr = reduction_traced(&BigUint::from(x), &pr).unwrap();
                assert_eq!(tr.x1, BigUint::from(pow(g, x << l, p)), "p {p} l {l} x {x}");
                let root = tr.result().to_u64().unwrap();
                assert_eq!(pow(root, 1 << l, p), pow(g, x << l, p));
                for r in &tr.roots[..tr.roots.len().saturating_sub(1)] {
                    assert!(is_quadratic_residue(r, pr.p().value()).unwrap());
                }
                assert_eq!(tr.roots.len(), l as usize);
                assert!(tr.exponentiations <= 2 * l as usize);
                assert!(tr.residue_tests <= 2 * l as usize);
                checked += 1;
            }
        }
    }
    assert!(checked > 1000, "{checked}");
}

#[test]
fn reduction_exhaustive_23() {
    let pr = params(23, 1).unwrap();
    let bound = reduction_bound(&pr).to_u64().unwrap();
    for x in 0..bound {
        let tr = reduction_traced(&BigUint::from(x), &pr).unwrap();
        let root = tr.result().to_u64().unwrap();
        assert_eq!(root * root % 23, tr.x1.to_u64().unwrap());
    }
    assert!(reduction(&BigUint::from(bound), &pr).is_err());
}

#[test]
fn reduction_zero_rounds_is_identity() {
    let pr = params(1019, 0).unwrap();
    let tr = reduction_traced(&BigUint::from(100u32), &pr).unwrap();
    assert!(tr.roots.is_empty());
    assert_eq!(tr.result(), &tr.x1);
}

#[test]
fn reduction_needs_three_mod_four() {
    let sp = SafePrime::from_u64(5).unwrap();
    let pr = RgParams::new(sp, BigUint::from(2u32), 1, Mode::Test).unwrap();
    assert!(matches!(reduction(&BigUint::from(1u32), &pr), Err(RgError::Domain(_))));
}
