//! Fixed parameter sets: the catalog of moduli used by `--qbits`, and the
//! toy instances behind the known-answer tests.

use num_bigint::BigUint;
use num_traits::One;

use crate::modmath::{smallest_safe_prime, ModMathError, SafePrime};
use crate::prime_table::PrimeTable;
use crate::prng::{PrngError, PrngParams};

/// `(bits, offset)`: the smallest safe prime with `bits` bits is
/// `2^(bits−1) + offset`.
const CATALOG: &[(u64, u64)] = &[
    (64, 0xa77),
    (80, 0x15f),
    (128, 0x225f),
    (256, 0x2ff7f),
    (260, 0xce8b),
    (512, 0x513),
    (1024, 0x1981bf),
    (2048, 0xad3af),
];

pub fn catalog_sizes() -> impl Iterator<Item = u64> {
    CATALOG.iter().map(|&(bits, _)| bits)
}

/// Catalogued smallest safe prime of exactly `bits` bits.
pub fn safe_prime_for_bits(bits: u64) -> Option<SafePrime> {
    CATALOG.iter().find(|&&(b, _)| b == bits).map(|&(b, offset)| {
        SafePrime::new_unchecked((BigUint::one() << (b - 1)) + offset)
    })
}

/// Catalog lookup, falling back to a deterministic search.
pub fn q_for_bits(bits: u64) -> Result<SafePrime, ModMathError> {
    match safe_prime_for_bits(bits) {
        Some(q) => Ok(q),
        None => smallest_safe_prime(bits),
    }
}

pub const KAT_K: u32 = 16;
pub const KAT_Q_BITS: u64 = 80;
pub const KAT_S: usize = 4;
pub const KAT_REFRESH_PERIOD: u64 = 2;
pub const KAT_ROUNDS: u32 = 4;
pub const KAT_E1: u64 = 17;
pub const KAT_E2: u64 = 9;
pub const KAT_SEED: u64 = 12345;
pub const KAT_INDEXES: [usize; 4] = [3, 17, 42, 101];
pub const KAT_SKIP_PRIME: u64 = 2147483783;
pub const KAT_SKIP_GENERATOR: u64 = 88183;
pub const KAT_GENERATOR: u64 = 1350813145390;
/// First eight words of the toy stream.
pub const KAT_WORDS: [u64; 8] = [35904, 44979, 45495, 26252, 40731, 32602, 13696, 6256];
/// Index set after the first refresh (before the third step).
pub const KAT_REFRESHED_INDEXES: [usize; 4] = [71, 83, 61, 16];

/// Single-round Feistel trace: `k = 8`, `n = 227`, skip `(p, a, w) = (23, 7, 5)`.
pub const FEISTEL_TRACE: FeistelTrace = FeistelTrace {
    k: 8,
    input: 179,
    modulus: 227,
    skip_prime: 23,
    skip_generator: 7,
    skip_start: 5,
    rounds: 1,
    e2: 9,
    output: 61,
    skip_end: 12,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeistelTrace {
    pub k: u32,
    pub input: u64,
    pub modulus: u64,
    pub skip_prime: u64,
    pub skip_generator: u64,
    pub skip_start: u64,
    pub rounds: u32,
    pub e2: u64,
    pub output: u64,
    pub skip_end: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RgKat {
    pub p: u64,
    pub g: u64,
    pub l: u32,
    pub seed: u64,
    pub outputs: &'static [u64],
    pub final_state: u64,
}

pub const RG_KATS: [RgKat; 2] = [
    RgKat {
        p: 23,
        g: 5,
        l: 1,
        seed: 4,
        outputs: &[0, 0, 0, 0],
        final_state: 4,
    },
    RgKat {
        p: 1019,
        g: 58,
        l: 2,
        seed: 777,
        outputs: &[6, 7, 2, 4, 4, 2],
        final_state: 154,
    },
];

/// All 16-bit safe primes.
pub fn toy_table() -> PrimeTable {
    PrimeTable::build_full(KAT_K).expect("16-bit safe primes exist")
}

pub fn toy_params() -> PrngParams {
    toy_params_with(KAT_E1, KAT_E2).expect("toy parameters are valid")
}

/// The toy parameter set with the two exponents replaced.
pub fn toy_params_with(e1: u64, e2: u64) -> Result<PrngParams, PrngError> {
    let q = safe_prime_for_bits(KAT_Q_BITS).expect("80-bit modulus is catalogued");
    PrngParams::builder(q)
        .word_bits(KAT_K)
        .index_count(KAT_S)
        .refresh_period(KAT_REFRESH_PERIOD)
        .rounds(KAT_ROUNDS)
        .e1(e1)
        .e2(e2)
        .build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modmath::{is_safe_prime, smallest_safe_prime};

    #[test]
    fn catalog_entries_are_smallest_safe_primes() {
        for bits in catalog_sizes() {
            let q = safe_prime_for_bits(bits).unwrap();
            assert_eq!(q.bits(), bits);
            assert!(is_safe_prime(q.value()), "{bits}");
            if bits <= 260 {
                assert_eq!(smallest_safe_prime(bits).unwrap(), q, "{bits}");
            }
        }
        assert!(safe_prime_for_bits(100).is_none());
        assert_eq!(q_for_bits(100).unwrap().bits(), 100);
    }

    #[test]
    fn toy_parameters() {
        let params = toy_params();
        assert_eq!(params.generator(), &BigUint::from(KAT_GENERATOR));
        assert_eq!(params.skip_prime().to_u64(), Some(KAT_SKIP_PRIME));
        assert_eq!(params.skip_generator(), &BigUint::from(KAT_SKIP_GENERATOR));
        assert_eq!(toy_table().len(), 193);
    }
}
