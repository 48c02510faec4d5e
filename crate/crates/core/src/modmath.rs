//! Arbitrary-precision number theory used throughout the generator:
//! modular exponentiation, primality, safe primes, generators of the
//! multiplicative group, quadratic residues and modular square roots.
//!
//! All functions are pure. None of this is constant-time.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::entropy::{EntropyError, EntropySource};

/// Miller–Rabin rounds used when callers do not ask for a specific count.
pub const DEFAULT_MR_ROUNDS: u32 = 64;
/// Fewer rounds than this are silently raised to it.
pub const MIN_MR_ROUNDS: u32 = 16;

/// Deterministic Miller–Rabin witnesses, correct for every n < 3.3·10^24.
const U64_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModMathError {
    #[error("modulus must be at least 2")]
    InvalidModulus,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{0} is not a safe prime")]
    NotSafePrime(BigUint),
    #[error("{value} is not a quadratic residue modulo {modulus}")]
    NoRoot { value: BigUint, modulus: BigUint },
    #[error("square roots need p = 3 mod 4, got {0}")]
    UnsupportedModulus(BigUint),
    #[error("no safe prime has exactly {0} bits")]
    NoSafePrime(u64),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

/// A prime `p ≥ 5` such that `(p − 1) / 2` is also prime.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SafePrime {
    p: BigUint,
    bits: u64,
}

impl SafePrime {
    pub fn new(p: BigUint) -> Result<Self, ModMathError> {
        if p < BigUint::from(5u32) || !is_safe_prime(&p) {
            return Err(ModMathError::NotSafePrime(p));
        }
        Ok(Self::new_unchecked(p))
    }

    pub fn from_u64(p: u64) -> Result<Self, ModMathError> {
        Self::new(BigUint::from(p))
    }

    /// Caller guarantees `p` is a safe prime.
    pub(crate) fn new_unchecked(p: BigUint) -> Self {
        let bits = p.bits();
        Self { p, bits }
    }

    pub fn value(&self) -> &BigUint {
        &self.p
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// The prime `(p − 1) / 2`.
    pub fn sophie_germain(&self) -> BigUint {
        (&self.p - 1u32) >> 1
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.p.to_u64()
    }

    pub fn to_u128(&self) -> Option<u128> {
        self.p.to_u128()
    }
}

impl fmt::Display for SafePrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.p.fmt(f)
    }
}

impl From<SafePrime> for BigUint {
    fn from(p: SafePrime) -> Self {
        p.p
    }
}

/// Odd primes below 2048, used for trial division and sieving.
fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        const LIMIT: usize = 2048;
        let mut composite = vec![false; LIMIT];
        let mut out = Vec::new();
        for i in 2..LIMIT {
            if composite[i] {
                continue;
            }
            if i > 2 {
                out.push(i as u32);
            }
            for j in (i * i..LIMIT).step_by(i) {
                composite[j] = true;
            }
        }
        out
    })
}

/// `base^exponent mod modulus`.
pub fn mod_pow(
    base: &BigUint,
    exponent: &BigUint,
    modulus: &BigUint,
) -> Result<BigUint, ModMathError> {
    if *modulus < BigUint::from(2u32) {
        return Err(ModMathError::InvalidModulus);
    }
    Ok(base.modpow(exponent, modulus))
}

/// `g^e mod m` for a fixed `g` and exponents below `2^bits`, from one
/// table of `2^window` precomputed powers per exponent window.
#[derive(Clone, PartialEq, Eq)]
pub struct FixedBase {
    modulus: BigUint,
    bits: u32,
    window: u32,
    tables: Vec<Vec<BigUint>>,
}

impl FixedBase {
    pub fn new(base: &BigUint, modulus: &BigUint, bits: u32, window: u32) -> Result<Self, ModMathError> {
        if *modulus < BigUint::from(2u32) {
            return Err(ModMathError::InvalidModulus);
        }
        assert!((1..=128).contains(&bits), "exponent width {bits} outside [1, 128]");
        assert!((1..=12).contains(&window), "window {window} outside [1, 12]");
        let mut tables = Vec::new();
        let mut step = base % modulus;
        for _ in 0..bits.div_ceil(window) {
            let mut table = Vec::with_capacity(1 << window);
            table.push(BigUint::one() % modulus);
            for d in 1..1usize << window {
                let next = &table[d - 1] * &step % modulus;
                table.push(next);
            }
            step = &table[(1 << window) - 1] * &step % modulus;
            tables.push(table);
        }
        Ok(Self {
            modulus: modulus.clone(),
            bits,
            window,
            tables,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn pow(&self, e: u128) -> BigUint {
        assert!(self.bits == 128 || e >> self.bits == 0, "exponent wider than {} bits", self.bits);
        let mask = (1u128 << self.window) - 1;
        let mut acc: Option<BigUint> = None;
        for (j, table) in self.tables.iter().enumerate() {
            let d = ((e >> (j as u32 * self.window)) & mask) as usize;
            if d == 0 {
                continue;
            }
            acc = Some(match acc {
                None => table[d].clone(),
                Some(a) => a * &table[d] % &self.modulus,
            });
        }
        acc.unwrap_or_else(|| BigUint::one() % &self.modulus)
    }
}

impl fmt::Debug for FixedBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FixedBase")
            .field("modulus_bits", &self.modulus.bits())
            .field("bits", &self.bits)
            .field("window", &self.window)
            .finish()
    }
}

#[inline]
pub fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    if m <= u32::MAX as u64 {
        return (a % m) * (b % m) % m;
    }
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Square-and-multiply over machine words. `m` must be nonzero.
#[inline]
pub fn pow_mod_u64(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    let mut base = base % m;
    if m <= u32::MAX as u64 {
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % m;
            }
            exp >>= 1;
            if exp > 0 {
                base = base * base % m;
            }
        }
        return acc;
    }
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        exp >>= 1;
        if exp > 0 {
            base = mul_mod_u64(base, base, m);
        }
    }
    acc
}

fn strong_probable_prime_u64(n: u64, d: u64, s: u32, a: u64) -> bool {
    let mut x = pow_mod_u64(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod_u64(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Deterministic primality for machine words.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &U64_WITNESSES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    U64_WITNESSES
        .iter()
        .all(|&a| strong_probable_prime_u64(n, d, s, a))
}

pub fn is_safe_prime_u64(p: u64) -> bool {
    p > 2 && p % 2 == 1 && is_prime_u64((p - 1) / 2) && is_prime_u64(p)
}

fn strong_probable_prime(n: &BigUint, n_minus_1: &BigUint, d: &BigUint, s: u64, a: &BigUint) -> bool {
    let mut x = a.modpow(d, n);
    if x.is_one() || x == *n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == *n_minus_1 {
            return true;
        }
        if x.is_one() {
            return false;
        }
    }
    false
}

/// Uniform integer in `[0, bound)` by rejection sampling.
fn random_below(rng: &mut ChaCha20Rng, bound: &BigUint) -> BigUint {
    let bits = bound.bits();
    let bytes = bits.div_ceil(8) as usize;
    let excess = (bytes as u64 * 8 - bits) as u32;
    let mut buf = vec![0u8; bytes];
    loop {
        rng.fill_bytes(buf.as_mut_slice());
        if let Some(top) = buf.last_mut() {
            *top &= 0xffu8 >> excess;
        }
        let candidate = BigUint::from_bytes_le(&buf);
        if candidate < *bound {
            return candidate;
        }
    }
}

fn digest(n: &BigUint) -> u64 {
    n.iter_u64_digits().fold(0xcbf2_9ce4_8422_2325, |h, d| {
        (h ^ d).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Miller–Rabin with `rounds` pseudo-random bases (plus base 2).
///
/// Inputs below 2^64 are answered deterministically. For larger inputs a
/// `true` is wrong with probability at most `4^-rounds`. Bases come from a
/// ChaCha20 stream keyed by `n`, so the answer is reproducible.
pub fn is_probable_prime(n: &BigUint, rounds: u32) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_even() {
        return false;
    }
    for &p in small_primes() {
        if (n % p).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    if !strong_probable_prime(n, &n_minus_1, &d, s, &BigUint::from(2u32)) {
        return false;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(digest(n));
    let span = n - 3u32;
    (0..rounds.max(MIN_MR_ROUNDS)).all(|_| {
        let a = random_below(&mut rng, &span) + 2u32;
        strong_probable_prime(n, &n_minus_1, &d, s, &a)
    })
}

/// True iff `p > 2`, `p` is prime and `(p − 1) / 2` is prime.
pub fn is_safe_prime(p: &BigUint) -> bool {
    if let Some(small) = p.to_u64() {
        return is_safe_prime_u64(small);
    }
    if p.is_even() {
        return false;
    }
    // p and (p-1)/2 both avoid every small prime r, i.e. p mod r ∉ {0, 1}.
    for &r in small_primes() {
        let m = (p % r).to_u32().unwrap_or(0);
        if m == 0 || m == 1 {
            return false;
        }
    }
    let q = (p - 1u32) >> 1;
    is_probable_prime(&q, DEFAULT_MR_ROUNDS) && is_probable_prime(p, DEFAULT_MR_ROUNDS)
}

/// Incremental scan over candidates `c ≡ 3 mod 4` inside one bit range,
/// with residues modulo the small primes kept up to date so most
/// candidates are rejected without any exponentiation.
struct BigScan {
    bits: u64,
    first: BigUint,
    limit: BigUint,
    candidate: BigUint,
    residues: Vec<u32>,
}

impl BigScan {
    fn new(bits: u64, start: BigUint) -> Self {
        let first = (BigUint::one() << (bits - 1)) + 3u32;
        let limit = BigUint::one() << bits;
        let mut scan = Self {
            bits,
            first,
            limit,
            candidate: BigUint::zero(),
            residues: Vec::new(),
        };
        scan.reset(start);
        scan
    }

    fn reset(&mut self, start: BigUint) {
        self.residues = small_primes()
            .iter()
            .map(|&r| (&start % r).to_u32().unwrap_or(0))
            .collect();
        self.candidate = start;
    }

    fn sieve_ok(&self) -> bool {
        self.residues.iter().all(|&m| m > 1)
    }

    fn advance(&mut self) {
        self.candidate += 4u32;
        if self.candidate >= self.limit {
            let first = self.first.clone();
            self.reset(first);
            return;
        }
        for (m, &r) in self.residues.iter_mut().zip(small_primes()) {
            *m = (*m + 4) % r;
        }
    }

    fn find(mut self) -> SafePrime {
        debug_assert!(self.bits > 64);
        loop {
            if self.sieve_ok() && is_safe_prime(&self.candidate) {
                return SafePrime::new_unchecked(self.candidate);
            }
            self.advance();
        }
    }
}

/// Candidates `≡ 3 mod 4` with exactly `bits` bits, as machine words.
fn word_range(bits: u64) -> (u64, u64) {
    let first = (1u64 << (bits - 1)) + 3;
    let last = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    (first, (last - first) / 4 + 1)
}

fn scan_words(bits: u64, start_index: u64) -> Result<SafePrime, ModMathError> {
    let (first, count) = word_range(bits);
    (0..count)
        .map(|i| first + 4 * ((start_index + i) % count))
        .find(|&c| is_safe_prime_u64(c))
        .map(|p| SafePrime::new_unchecked(BigUint::from(p)))
        .ok_or(ModMathError::NoSafePrime(bits))
}

/// A random safe prime of exactly `bits` bits.
///
/// A random starting point `≡ 3 mod 4` is drawn in `[2^(bits−1), 2^bits)`
/// and the scan moves up in steps of 4, wrapping inside the range. Every
/// safe prime above 5 is `≡ 3 mod 4`, so nothing is skipped; `bits = 3`
/// yields 7.
pub fn gen_safe_prime<E: EntropySource + ?Sized>(
    bits: u64,
    entropy: &mut E,
) -> Result<SafePrime, ModMathError> {
    if bits < 3 {
        return Err(ModMathError::Domain(format!(
            "safe primes need at least 3 bits, asked for {bits}"
        )));
    }
    if bits <= 64 {
        let (_, count) = word_range(bits);
        let start = entropy.draw_u64()? % count;
        return scan_words(bits, start);
    }
    let mut buf = vec![0u8; bits.div_ceil(8) as usize];
    entropy.draw_bytes(&mut buf)?;
    let mut start = BigUint::from_bytes_le(&buf);
    start %= BigUint::one() << (bits - 1);
    start |= BigUint::one() << (bits - 1);
    start |= BigUint::from(3u32);
    Ok(BigScan::new(bits, start).find())
}

/// The smallest safe prime with exactly `bits` bits.
pub fn smallest_safe_prime(bits: u64) -> Result<SafePrime, ModMathError> {
    if bits < 3 {
        return Err(ModMathError::NoSafePrime(bits));
    }
    if bits <= 64 {
        return scan_words(bits, 0);
    }
    let start = (BigUint::one() << (bits - 1)) + 3u32;
    Ok(BigScan::new(bits, start).find())
}

/// `⌊√n⌋` by integer Newton iteration, verified so that `r² ≤ n < (r+1)²`.
pub fn isqrt(n: &BigUint) -> BigUint {
    if n.is_zero() {
        return BigUint::zero();
    }
    let mut x = BigUint::one() << n.bits().div_ceil(2);
    loop {
        let y = (&x + n / &x) >> 1;
        if y >= x {
            break;
        }
        x = y;
    }
    while &x * &x > *n {
        x -= 1u32;
    }
    loop {
        let next = &x + 1u32;
        if &next * &next > *n {
            break;
        }
        x = next;
    }
    x
}

/// `g = p − ⌊√p⌋²`, a generator of ℤp* for every safe prime `p ≥ 7`.
///
/// Since `p ≡ 3 mod 4`, −1 is a non-residue and so is `−r²`; with `r ≥ 2`
/// it is not −1 either, which leaves order `p − 1`.
pub fn generator_sqrt_rule(p: &SafePrime) -> Result<BigUint, ModMathError> {
    if *p.value() < BigUint::from(7u32) {
        return Err(ModMathError::Domain(format!(
            "sqrt rule needs p >= 7, got {p}"
        )));
    }
    let r = isqrt(p.value());
    Ok(p.value() - &r * &r)
}

/// `g = (p − z²) mod p` for `2 ≤ z ≤ p − 2`, normalised into `[1, p − 1]`.
pub fn generator_z_rule(p: &SafePrime, z: &BigUint) -> Result<BigUint, ModMathError> {
    let pv = p.value();
    if *pv < BigUint::from(7u32) {
        return Err(ModMathError::Domain(format!("z rule needs p >= 7, got {p}")));
    }
    if *z < BigUint::from(2u32) || *z > pv - 2u32 {
        return Err(ModMathError::Domain(format!(
            "z = {z} outside [2, p - 2] for p = {p}"
        )));
    }
    let square = (z * z) % pv;
    Ok((pv - square) % pv)
}

/// Whether `g` has order `p − 1` in ℤp*. For a safe prime the only proper
/// divisors of `p − 1 = 2q` worth checking are 2 and q.
pub fn is_generator(g: &BigUint, p: &SafePrime) -> bool {
    let pv = p.value();
    if g.is_zero() || g >= pv {
        return false;
    }
    let two = BigUint::from(2u32);
    !g.modpow(&two, pv).is_one() && !g.modpow(&p.sophie_germain(), pv).is_one()
}

/// Euler's criterion: `a^((p−1)/2) ≡ 1 mod p`.
pub fn is_quadratic_residue(a: &BigUint, p: &BigUint) -> Result<bool, ModMathError> {
    if *p < BigUint::from(3u32) || p.is_even() {
        return Err(ModMathError::Domain(format!("{p} is not an odd prime")));
    }
    let a = a % p;
    if a.is_zero() {
        return Err(ModMathError::Domain(format!(
            "0 mod {p} is neither a residue nor a non-residue"
        )));
    }
    let half = (p - 1u32) >> 1;
    Ok(a.modpow(&half, p).is_one())
}

/// Both square roots of a residue modulo a prime `p ≡ 3 mod 4`, smaller
/// first. Exactly one of the two is itself a residue.
pub fn sqrt_mod(a: &BigUint, p: &BigUint) -> Result<(BigUint, BigUint), ModMathError> {
    if (p % 4u32) != BigUint::from(3u32) {
        return Err(ModMathError::UnsupportedModulus(p.clone()));
    }
    if !is_quadratic_residue(a, p)? {
        return Err(ModMathError::NoRoot {
            value: a.clone(),
            modulus: p.clone(),
        });
    }
    let exp = (p + 1u32) >> 2;
    let w = (a % p).modpow(&exp, p);
    let other = p - &w;
    Ok(if w <= other { (w, other) } else { (other, w) })
}
