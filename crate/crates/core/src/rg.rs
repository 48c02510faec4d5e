//! The exponential generator RG over a safe prime, and the square-root
//! reduction that maps one big exponentiation of the main generator onto a
//! single RG step.
//!
//! With `t = 2^l`, `ĝ = g^t mod p` and `b` the top bit of `x` in an `n`-bit
//! window, one step is `x ← ĝ^(x div t)·g^b mod p`, emitting the low `t − 1`
//! bits of the new `x`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use thiserror::Error;

use crate::modmath::{is_generator, is_quadratic_residue, sqrt_mod, ModMathError, SafePrime};
use crate::prng::Mode;

pub const SECURITY_MIN_MARGIN: u64 = 128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RgError {
    #[error("{field}: {message}")]
    Config { field: &'static str, message: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error(transparent)]
    Math(#[from] ModMathError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgParams {
    p: SafePrime,
    g: BigUint,
    g_hat: BigUint,
    l: u32,
    mode: Mode,
}

impl RgParams {
    pub fn new(p: SafePrime, g: BigUint, l: u32, mode: Mode) -> Result<Self, RgError> {
        let config = |field, message: String| RgError::Config { field, message };
        if l >= 63 {
            return Err(config("l", format!("l = {l} too large")));
        }
        let t = 1u64 << l;
        let n = p.bits();
        if t >= n {
            return Err(config("l", format!("t = 2^{l} = {t} must be below n = {n}")));
        }
        if mode == Mode::Security && n - t < SECURITY_MIN_MARGIN {
            return Err(config(
                "l",
                format!("margin c = {} below {SECURITY_MIN_MARGIN}", n - t),
            ));
        }
        if !is_generator(&g, &p) {
            return Err(config("g", format!("{g} does not generate Z_{p}*")));
        }
        let g_hat = g.modpow(&BigUint::from(t), p.value());
        Ok(Self { p, g, g_hat, l, mode })
    }

    pub fn p(&self) -> &SafePrime {
        &self.p
    }

    pub fn generator(&self) -> &BigUint {
        &self.g
    }

    /// `ĝ = g^t mod p`.
    pub fn g_hat(&self) -> &BigUint {
        &self.g_hat
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn t(&self) -> u64 {
        1 << self.l
    }

    /// Bit length of `p`.
    pub fn n(&self) -> u64 {
        self.p.bits()
    }

    /// Hardness margin `c = n − t`.
    pub fn margin(&self) -> u64 {
        self.n() - self.t()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Bits emitted per step, `t − 1`.
    pub fn output_bits(&self) -> u64 {
        self.t() - 1
    }
}

/// Current element, kept in `[0, p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgState {
    x: BigUint,
}

impl RgState {
    /// Seeds from an element of `Z_{p−1}`.
    pub fn new(seed: BigUint, params: &RgParams) -> Result<Self, RgError> {
        if seed >= params.p.value() - 1u32 {
            return Err(RgError::Domain(format!("seed {seed} outside Z_(p-1)")));
        }
        Ok(Self { x: seed })
    }

    pub fn value(&self) -> &BigUint {
        &self.x
    }
}

/// A fixed-length bit string, stored as an integer below `2^len`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HardBits {
    pub value: BigUint,
    pub len: u64,
}

impl HardBits {
    /// Bits most significant first, exactly `len` of them.
    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).rev().map(|i| self.value.bit(i)).collect()
    }
}

pub fn rg_step(state: &mut RgState, params: &RgParams) -> HardBits {
    let p = params.p.value();
    let (quotient, _) = state.x.div_rem(&BigUint::from(params.t()));
    let top = state.x.bit(params.n() - 1);
    let mut next = params.g_hat.modpow(&quotient, p);
    if top {
        next = next * &params.g % p;
    }
    let len = params.output_bits();
    let value = &next & ((BigUint::one() << len) - 1u32);
    state.x = next;
    HardBits { value, len }
}

pub fn rg_generate(seed: BigUint, params: &RgParams, count: usize) -> Result<Vec<HardBits>, RgError> {
    if count == 0 {
        return Err(RgError::Domain("count must be at least 1".into()));
    }
    let mut state = RgState::new(seed, params)?;
    Ok((0..count).map(|_| rg_step(&mut state, params)).collect())
}

/// Full record of one reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionTrace {
    /// `x_1 = g^(t·x) mod p`, the RG output for seed `x·t`.
    pub x1: BigUint,
    /// `x_2` after each of the `l` root extractions; the last is the result.
    pub roots: Vec<BigUint>,
    /// Modular exponentiations spent inside the root loop.
    pub exponentiations: usize,
    /// Quadratic-residue tests spent inside the root loop.
    pub residue_tests: usize,
}

impl ReductionTrace {
    pub fn result(&self) -> &BigUint {
        self.roots.last().unwrap_or(&self.x1)
    }
}

/// Largest valid reduction input plus one: `x·t` must lie in `Z_{p−1}` with
/// a zero top bit.
pub fn reduction_bound(params: &RgParams) -> BigUint {
    let limit = (BigUint::one() << (params.n() - 1)).min(params.p.value() - 1u32);
    (limit + params.t() - 1u32) / params.t()
}

pub fn reduction(x: &BigUint, params: &RgParams) -> Result<BigUint, RgError> {
    reduction_traced(x, params).map(|tr| tr.result().clone())
}

pub fn reduction_traced(x: &BigUint, params: &RgParams) -> Result<ReductionTrace, RgError> {
    let p = params.p.value();
    if p % 4u32 != BigUint::from(3u32) {
        return Err(RgError::Domain(format!("p = {p} is not 3 mod 4")));
    }
    if x >= &reduction_bound(params) {
        return Err(RgError::Domain(format!("x = {x} outside the reduction range")));
    }
    let seed = x * params.t();
    let mut state = RgState::new(seed, params)?;
    rg_step(&mut state, params);
    let x1 = state.x;

    let mut current = x1.clone();
    let mut roots = Vec::with_capacity(params.l as usize);
    let (mut exponentiations, mut residue_tests) = (0, 0);
    for round in 0..params.l {
        let (w1, w2) = sqrt_mod(&current, p).map_err(|e| {
            RgError::Integrity(format!("round {round}: {current} has no square root ({e})"))
        })?;
        exponentiations += 1;
        let pick = if is_quadratic_residue(&w1, p)? { w1 } else { w2 };
        exponentiations += 1;
        residue_tests += 1;
        roots.push(pick.clone());
        current = pick;
    }
    Ok(ReductionTrace {
        x1,
        roots,
        exponentiations,
        residue_tests,
    })
}
