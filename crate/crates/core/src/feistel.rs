//! Feistel-like mixing box applied to every word the generator extracts.
//!
//! A `k`-bit word is split MSB-first into halves `l | r`. Each round
//! advances the skip value `w ← a·w mod p`, evaluates
//! `u = l ⊕ ((w + (r ⊕ l))^e mod n)`, and recombines the word as
//! `r | top_half(u)`.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::modmath::{is_generator, pow_mod_u64, SafePrime};

/// Default number of mixing rounds.
pub const DEFAULT_ROUNDS: u32 = 4;
/// Default round exponent, `0b1001`.
pub const DEFAULT_E2: u64 = 9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeistelError {
    #[error("word width {0} must be a multiple of 8 in [8, 64]")]
    Width(u32),
    #[error("modulus {modulus} is wider than {k} bits")]
    ModulusTooWide { modulus: u64, k: u32 },
    #[error("input {value} does not fit in {k} bits")]
    InputTooWide { value: u64, k: u32 },
    #[error("invalid skip state: {0}")]
    Skip(String),
    #[error("round exponent must be at least 2, got {0}")]
    Exponent(u64),
}

/// Bit width `k` of generator words: a multiple of 8 in `[8, 64]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordWidth(u32);

impl WordWidth {
    pub fn new(k: u32) -> Result<Self, FeistelError> {
        if k < 8 || k > 64 || k % 8 != 0 {
            return Err(FeistelError::Width(k));
        }
        Ok(Self(k))
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn half(self) -> u32 {
        self.0 / 2
    }

    #[inline]
    pub fn bytes(self) -> usize {
        self.0 as usize / 8
    }

    #[inline]
    pub fn mask(self) -> u64 {
        if self.0 == 64 {
            u64::MAX
        } else {
            (1u64 << self.0) - 1
        }
    }

    #[inline]
    pub fn fits(self, v: u64) -> bool {
        v & !self.mask() == 0
    }
}

/// The evolving multiplicative counter `w ← a·w mod p`, with `0 < w < p`
/// and `a` a generator of ℤp*.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SkipState {
    w: u128,
    a: u128,
    p: u128,
}

fn mul_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    if m <= u32::MAX as u128 {
        return ((a as u64 % m as u64) * (b as u64 % m as u64) % m as u64) as u128;
    }
    if m <= u64::MAX as u128 {
        return (a * b) % m;
    }
    // Double-and-add; only reached for k = 64 where p has 128 bits.
    let (mut acc, mut a, mut b) = (0u128, a % m, b);
    while b > 0 {
        if b & 1 == 1 {
            acc = add_mod_u128(acc, a, m);
        }
        a = add_mod_u128(a, a, m);
        b >>= 1;
    }
    acc
}

fn add_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    let (sum, overflow) = a.overflowing_add(b);
    if overflow || sum >= m {
        sum.wrapping_sub(m)
    } else {
        sum
    }
}

impl SkipState {
    pub fn new(w: &BigUint, p: &SafePrime, a: &BigUint) -> Result<Self, FeistelError> {
        let p_small = p
            .to_u128()
            .ok_or_else(|| FeistelError::Skip(format!("skip prime {p} exceeds 128 bits")))?;
        if !is_generator(a, p) {
            return Err(FeistelError::Skip(format!("{a} does not generate Z_{p}*")));
        }
        let w_small = w.to_u128().filter(|&w| w > 0 && w < p_small).ok_or_else(|| {
            FeistelError::Skip(format!("skip value {w} outside (0, {p})"))
        })?;
        Ok(Self {
            w: w_small,
            a: a.to_u128().expect("a < p"),
            p: p_small,
        })
    }

    /// `w ← a·w mod p`, returning the new value.
    #[inline]
    pub fn advance(&mut self) -> u128 {
        self.w = mul_mod_u128(self.a, self.w, self.p);
        self.w
    }

    pub fn value(&self) -> u128 {
        self.w
    }

    pub fn generator(&self) -> u128 {
        self.a
    }

    pub fn modulus(&self) -> u128 {
        self.p
    }
}

/// Round count, round exponent and word width of the mixing box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeistelBox {
    width: WordWidth,
    rounds: u32,
    exponent: u64,
}

impl FeistelBox {
    pub fn new(width: WordWidth, rounds: u32, exponent: u64) -> Result<Self, FeistelError> {
        if exponent < 2 {
            return Err(FeistelError::Exponent(exponent));
        }
        Ok(Self {
            width,
            rounds,
            exponent,
        })
    }

    pub fn width(&self) -> WordWidth {
        self.width
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Mixes `x` under modulus `n`, advancing `skip` once per round.
    pub fn apply(&self, x: u64, n: u64, skip: &mut SkipState) -> Result<u64, FeistelError> {
        let k = self.width.bits();
        if !self.width.fits(n) {
            return Err(FeistelError::ModulusTooWide { modulus: n, k });
        }
        if !self.width.fits(x) {
            return Err(FeistelError::InputTooWide { value: x, k });
        }
        if n < 2 {
            return Err(FeistelError::Skip(format!("round modulus {n} below 2")));
        }
        Ok(self.mix(x, n, skip))
    }

    /// [`apply`](Self::apply) without argument checks; `x` and `n` must fit
    /// the word width and `n ≥ 2`.
    #[inline]
    pub(crate) fn mix(&self, x: u64, n: u64, skip: &mut SkipState) -> u64 {
        let half = self.width.half();
        let half_mask = (1u64 << half) - 1;
        let mut left = x >> half;
        let mut right = x & half_mask;
        for _ in 0..self.rounds {
            let w = skip.advance();
            let w = match u64::try_from(w) {
                Ok(w) => w % n,
                Err(_) => (w % n as u128) as u64,
            };
            let operand = match w.checked_add(right ^ left) {
                Some(sum) => sum % n,
                None => ((w as u128 + (right ^ left) as u128) % n as u128) as u64,
            };
            let u = left ^ pow_mod_u64(operand, self.exponent, n);
            let next_right = (u >> half) & half_mask;
            left = right;
            right = next_right;
        }
        (left << half) | right
    }
}
