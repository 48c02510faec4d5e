//! The generator: skip evolution, a chain of small-prime exponentiations
//! selecting a secret exponent, one big exponentiation `g^x mod q` whose low
//! bits are split into words, and Feistel mixing of every word.
//!
//! Each outer iteration ("step") emits `m − 1` words of `k` bits, where
//! `m = t'/k` and `t' = k·⌊(bitlen(q) − k)/k⌋`. The first of the `m`
//! extracted words feeds back into the chaining value and is never output.
//! Every `M_R` steps the hidden index set is re-derived from the
//! generator's own output path.

use std::collections::VecDeque;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::feistel::{FeistelBox, SkipState, WordWidth, DEFAULT_E2, DEFAULT_ROUNDS};
use crate::modmath::{generator_sqrt_rule, is_generator, pow_mod_u64, smallest_safe_prime, FixedBase, SafePrime};
use crate::par::Execution;
use crate::prime_table::{IndexSet, PrimeTable};
use crate::stats::BitSeq;

pub const DEFAULT_INDEX_COUNT: usize = 6;
pub const DEFAULT_REFRESH_PERIOD: u64 = 1 << 11;
pub const DEFAULT_E1: u64 = 17;
pub const DEFAULT_WORD_BITS: u32 = 32;
/// Largest accepted seed, `2^32`.
pub const MAX_SEED: u64 = 1 << 32;

pub const SECURITY_MIN_Q_BITS: u64 = 1024;
pub const SECURITY_MIN_K: u32 = 32;
pub const SECURITY_MIN_S: usize = 6;
pub const TEST_MIN_Q_BITS: u64 = 64;
pub const MIN_S: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrngError {
    #[error("{field}: {message}")]
    Config { field: &'static str, message: String },
    #[error("at least one word must be requested")]
    EmptyRequest,
    #[error("stream decode: {0}")]
    Decode(String),
}

fn config(field: &'static str, message: impl Into<String>) -> PrngError {
    PrngError::Config {
        field,
        message: message.into(),
    }
}

/// Parameter policy. `Security` enforces `q ≥ 1024` bits, `k ≥ 32`,
/// `s ≥ 6` and two-bit exponents; `Test` admits small instances that can be
/// checked by hand.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    #[default]
    Test,
    Security,
}

/// Public parameters of the generator, validated on construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrngParams {
    q: SafePrime,
    g: BigUint,
    mixer: FeistelBox,
    s: usize,
    refresh_period: u64,
    e1: u64,
    skip_prime: SafePrime,
    skip_generator: BigUint,
    mode: Mode,
    stretch: bool,
    kept_bits: u64,
    kept_mask: BigUint,
    powers: FixedBase,
}

/// Exponent window of the precomputed `g` powers.
const POWER_WINDOW: u32 = 8;

#[derive(Clone, Debug)]
pub struct PrngParamsBuilder {
    q: SafePrime,
    g: Option<BigUint>,
    k: u32,
    s: usize,
    refresh_period: u64,
    rounds: u32,
    e1: u64,
    e2: u64,
    skip_prime: Option<SafePrime>,
    skip_generator: Option<BigUint>,
    mode: Mode,
    stretch: bool,
}

impl PrngParamsBuilder {
    pub fn generator(mut self, g: BigUint) -> Self {
        self.g = Some(g);
        self
    }

    pub fn word_bits(mut self, k: u32) -> Self {
        self.k = k;
        self
    }

    pub fn index_count(mut self, s: usize) -> Self {
        self.s = s;
        self
    }

    pub fn refresh_period(mut self, period: u64) -> Self {
        self.refresh_period = period;
        self
    }

    pub fn rounds(mut self, rounds: u32) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn e1(mut self, e1: u64) -> Self {
        self.e1 = e1;
        self
    }

    pub fn e2(mut self, e2: u64) -> Self {
        self.e2 = e2;
        self
    }

    pub fn skip_prime(mut self, p: SafePrime) -> Self {
        self.skip_prime = Some(p);
        self
    }

    pub fn skip_generator(mut self, a: BigUint) -> Self {
        self.skip_generator = Some(a);
        self
    }

    pub fn mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    /// Keep one extra word of hard bits per step (the stretched variant).
    pub fn stretch(mut self, on: bool) -> Self {
        self.stretch = on;
        self
    }

    pub fn build(self) -> Result<PrngParams, PrngError> {
        let width = WordWidth::new(self.k).map_err(|e| config("k", e.to_string()))?;
        let k = width.bits() as u64;
        let q_bits = self.q.bits();
        let security = self.mode == Mode::Security;

        let min_q = if security { SECURITY_MIN_Q_BITS } else { TEST_MIN_Q_BITS };
        if q_bits < min_q {
            return Err(config("q", format!("{q_bits}-bit q below the {min_q}-bit minimum")));
        }
        if security && width.bits() < SECURITY_MIN_K {
            return Err(config("k", format!("k = {k} below {SECURITY_MIN_K} in security mode")));
        }
        let min_s = if security { SECURITY_MIN_S } else { MIN_S };
        if self.s < min_s {
            return Err(config("s", format!("s = {} below the minimum of {min_s}", self.s)));
        }
        if self.refresh_period == 0 {
            return Err(config("mr", "refresh period must be positive"));
        }
        for (field, e) in [("e1", self.e1), ("e2", self.e2)] {
            if e < 2 {
                return Err(config(field, format!("exponent {e} below 2")));
            }
            if security && e.count_ones() != 2 {
                return Err(config(field, format!("exponent {e} must have exactly two set bits")));
            }
        }

        let g = match self.g {
            Some(g) => g,
            None => generator_sqrt_rule(&self.q).map_err(|e| config("g", e.to_string()))?,
        };
        if !is_generator(&g, &self.q) {
            return Err(config("g", format!("{g} does not generate Z_q*")));
        }

        let skip_prime = match self.skip_prime {
            Some(p) => p,
            None => smallest_safe_prime(2 * k).map_err(|e| config("p", e.to_string()))?,
        };
        if skip_prime.bits() != 2 * k {
            return Err(config(
                "p",
                format!("skip prime has {} bits, need 2k = {}", skip_prime.bits(), 2 * k),
            ));
        }
        let skip_generator = match self.skip_generator {
            Some(a) => a,
            None => generator_sqrt_rule(&skip_prime).map_err(|e| config("a", e.to_string()))?,
        };
        if !is_generator(&skip_generator, &skip_prime) {
            return Err(config("a", format!("{skip_generator} does not generate Z_p*")));
        }

        let hard_bits = q_bits.saturating_sub(k);
        if hard_bits < k {
            return Err(config("q", format!("t = {hard_bits} hard bits, fewer than k = {k}")));
        }
        let usable = if self.stretch {
            (hard_bits + k).min(q_bits - 1)
        } else {
            hard_bits
        };
        let kept_bits = k * (usable / k);
        let blocks = (kept_bits / k) as usize;
        if blocks < 2 {
            return Err(config("q", format!("q too small: {blocks} word per step leaves no output")));
        }
        if self.s > blocks {
            return Err(config(
                "s",
                format!("s = {} exceeds the {blocks} words extracted per step", self.s),
            ));
        }

        let mixer = FeistelBox::new(width, self.rounds, self.e2).map_err(|e| config("e2", e.to_string()))?;
        let kept_mask = (BigUint::one() << kept_bits) - 1u32;
        let powers = FixedBase::new(&g, self.q.value(), 2 * width.bits(), POWER_WINDOW)
            .map_err(|e| config("q", e.to_string()))?;
        Ok(PrngParams {
            q: self.q,
            g,
            mixer,
            s: self.s,
            refresh_period: self.refresh_period,
            e1: self.e1,
            skip_prime,
            skip_generator,
            mode: self.mode,
            stretch: self.stretch,
            kept_bits,
            kept_mask,
            powers,
        })
    }
}

impl PrngParams {
    pub fn builder(q: SafePrime) -> PrngParamsBuilder {
        PrngParamsBuilder {
            q,
            g: None,
            k: DEFAULT_WORD_BITS,
            s: DEFAULT_INDEX_COUNT,
            refresh_period: DEFAULT_REFRESH_PERIOD,
            rounds: DEFAULT_ROUNDS,
            e1: DEFAULT_E1,
            e2: DEFAULT_E2,
            skip_prime: None,
            skip_generator: None,
            mode: Mode::Test,
            stretch: false,
        }
    }

    pub fn q(&self) -> &SafePrime {
        &self.q
    }

    pub fn generator(&self) -> &BigUint {
        &self.g
    }

    pub fn width(&self) -> WordWidth {
        self.mixer.width()
    }

    pub fn k(&self) -> u32 {
        self.mixer.width().bits()
    }

    pub fn index_count(&self) -> usize {
        self.s
    }

    pub fn refresh_period(&self) -> u64 {
        self.refresh_period
    }

    pub fn rounds(&self) -> u32 {
        self.mixer.rounds()
    }

    pub fn e1(&self) -> u64 {
        self.e1
    }

    pub fn e2(&self) -> u64 {
        self.mixer.exponent()
    }

    pub fn mixer(&self) -> &FeistelBox {
        &self.mixer
    }

    pub fn skip_prime(&self) -> &SafePrime {
        &self.skip_prime
    }

    pub fn skip_generator(&self) -> &BigUint {
        &self.skip_generator
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn stretched(&self) -> bool {
        self.stretch
    }

    /// `t = bitlen(q) − k`.
    pub fn hard_bits(&self) -> u64 {
        self.q.bits() - self.k() as u64
    }

    /// `t'`, the hard bits actually kept per step (a multiple of `k`).
    pub fn kept_bits(&self) -> u64 {
        self.kept_bits
    }

    /// `m`, words extracted per step.
    pub fn blocks_per_step(&self) -> usize {
        (self.kept_bits / self.k() as u64) as usize
    }

    /// `m − 1`, words emitted per step.
    pub fn words_per_step(&self) -> usize {
        self.blocks_per_step() - 1
    }

    /// Bits emitted between two index refreshes, `k(m − 1)·M_R`.
    pub fn epoch_bits(&self) -> u64 {
        self.k() as u64 * self.words_per_step() as u64 * self.refresh_period
    }
}

/// Evolving secret state of one generator instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrngState {
    x0: u64,
    w1: SkipState,
    w2: SkipState,
    indexes: IndexSet,
    steps: u64,
    refreshes: u64,
    pending: VecDeque<u64>,
}

impl PrngState {
    pub fn chaining_value(&self) -> u64 {
        self.x0
    }

    pub fn w1(&self) -> &SkipState {
        &self.w1
    }

    pub fn w2(&self) -> &SkipState {
        &self.w2
    }

    pub fn indexes(&self) -> &IndexSet {
        &self.indexes
    }

    /// Outer iterations performed so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn refreshes(&self) -> u64 {
        self.refreshes
    }

    /// Words produced by the last step but not yet handed out.
    pub fn pending(&self) -> usize {
        self.pending.len()
    }
}

/// Everything one step computed, for instrumentation and tests.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepTrace {
    /// Secret exponent `x = x_{s−3} | x_{s−2}`.
    pub exponent: u128,
    /// `g^x mod q`.
    pub power: BigUint,
    /// The kept low bits `z`.
    pub hard_bits: BigUint,
    /// `z_1, …, z_m`, most significant first.
    pub blocks: Vec<u64>,
    /// Mixing modulus `p_{i_{s−1}}` used for every block.
    pub modulus: u64,
    /// `f(z_1)`, fed back as the next chaining value.
    pub chain_word: u64,
    /// Skip state `w2` after mixing `z_1`, before any output word.
    pub skip_after_chain: SkipState,
    /// `f(z_2), …, f(z_m)`.
    pub outputs: Vec<u64>,
}

struct Extraction {
    exponent: u128,
    power: BigUint,
    hard_bits: BigUint,
    blocks: Vec<u64>,
}

/// A generator instance over borrowed parameters and table.
#[derive(Clone, Debug)]
pub struct Prng<'a> {
    params: &'a PrngParams,
    table: &'a PrimeTable,
    state: PrngState,
}

impl<'a> Prng<'a> {
    /// Seeds a generator with `x0 = seed` and an explicit index set.
    pub fn new(
        params: &'a PrngParams,
        table: &'a PrimeTable,
        seed: u64,
        indexes: IndexSet,
    ) -> Result<Self, PrngError> {
        if table.k() != params.k() {
            return Err(config(
                "table",
                format!("table holds {}-bit primes, k = {}", table.k(), params.k()),
            ));
        }
        if seed > MAX_SEED {
            return Err(config("seed", format!("{seed} exceeds 2^32")));
        }
        if indexes.len() != params.index_count() {
            return Err(config(
                "indexes",
                format!("{} indexes given, s = {}", indexes.len(), params.index_count()),
            ));
        }
        if let Some(&bad) = indexes.as_slice().iter().find(|&&i| i >= table.len()) {
            return Err(config(
                "indexes",
                format!("index {bad} outside a table of {} primes", table.len()),
            ));
        }
        let p = params.skip_prime();
        let order = p.value() - 1u32;
        let w1 = BigUint::from(seed) % &order + 1u32;
        let w2 = (BigUint::from(seed) + 5u32) % &order + 1u32;
        let a = params.skip_generator();
        let skip = |w: &BigUint| SkipState::new(w, p, a).map_err(|e| config("p", e.to_string()));
        let state = PrngState {
            x0: seed,
            w1: skip(&w1)?,
            w2: skip(&w2)?,
            indexes,
            steps: 0,
            refreshes: 0,
            pending: VecDeque::new(),
        };
        Ok(Self { params, table, state })
    }

    /// Seeds with an all-zero index set and immediately derives the real
    /// indexes through [`refresh_indexes`](Self::refresh_indexes).
    pub fn bootstrap(params: &'a PrngParams, table: &'a PrimeTable, seed: u64) -> Result<Self, PrngError> {
        let zeros = IndexSet::new_unchecked(vec![0; params.index_count()]);
        let mut prng = Self::new(params, table, seed, zeros)?;
        prng.refresh_indexes();
        Ok(prng)
    }

    pub fn params(&self) -> &PrngParams {
        self.params
    }

    pub fn table(&self) -> &PrimeTable {
        self.table
    }

    pub fn state(&self) -> &PrngState {
        &self.state
    }

    #[inline]
    fn prime(&self, slot: usize) -> u64 {
        self.table
            .value(self.state.indexes[slot])
            .expect("indexes are validated against the table")
    }

    /// Skip update, chaining, the exponent chain and the big exponentiation.
    fn extract(&mut self) -> Extraction {
        let params = self.params;
        let s = params.index_count();
        let k = params.k();

        let w1 = self.state.w1.advance();
        let m0 = self.prime(0) as u128;
        self.state.x0 = ((self.state.x0 as u128 % m0 + w1 % m0) % m0) as u64;

        let mut previous = self.state.x0;
        let mut high = 0u64;
        for j in 1..=s - 2 {
            if j == s - 2 {
                high = previous;
            }
            previous = pow_mod_u64(previous, params.e1, self.prime(j));
        }
        let exponent = ((high as u128) << k) | previous as u128;

        let power = params.powers.pow(exponent);
        let hard_bits = &power & &params.kept_mask;
        let blocks = split_words(&hard_bits, params.width(), params.blocks_per_step());
        Extraction {
            exponent,
            power,
            hard_bits,
            blocks,
        }
    }

    /// One outer iteration, returning the `m − 1` output words. Does not
    /// check for an index refresh; [`generate`](Self::generate) does.
    pub fn step(&mut self) -> Vec<u64> {
        self.step_traced().outputs
    }

    pub fn step_traced(&mut self) -> StepTrace {
        let ex = self.extract();
        let modulus = self.prime(self.params.index_count() - 1);
        let mixer = self.params.mixer;
        let chain_word = mixer.mix(ex.blocks[0], modulus, &mut self.state.w2);
        self.state.x0 = chain_word;
        let skip_after_chain = self.state.w2.clone();
        let outputs = ex.blocks[1..]
            .iter()
            .map(|&z| mixer.mix(z, modulus, &mut self.state.w2))
            .collect();
        self.state.steps += 1;
        StepTrace {
            exponent: ex.exponent,
            power: ex.power,
            hard_bits: ex.hard_bits,
            blocks: ex.blocks,
            modulus,
            chain_word,
            skip_after_chain,
            outputs,
        }
    }

    /// Replaces the index set with `i_j = f(z_{j+1}) mod 2^r`, `j < s`,
    /// computed from one extra extraction.
    pub fn refresh_indexes(&mut self) {
        let ex = self.extract();
        let s = self.params.index_count();
        let modulus = self.prime(s - 1);
        let mask = (1u64 << self.table.index_bits()) - 1;
        let mixer = self.params.mixer;
        let fresh = ex.blocks[..s]
            .iter()
            .map(|&z| (mixer.mix(z, modulus, &mut self.state.w2) & mask) as usize)
            .collect();
        self.state.indexes = IndexSet::new_unchecked(fresh);
        self.state.refreshes += 1;
    }

    fn refill(&mut self) {
        let steps = self.state.steps;
        if steps > 0 && steps % self.params.refresh_period == 0 {
            self.refresh_indexes();
        }
        let words = self.step();
        self.state.pending.extend(words);
    }

    pub fn next_word(&mut self) -> u64 {
        loop {
            if let Some(w) = self.state.pending.pop_front() {
                return w;
            }
            self.refill();
        }
    }

    /// The next `n` words. Surplus words from the last step are kept for
    /// the next call, so splitting a request never changes the stream.
    pub fn generate(&mut self, n: usize) -> Result<BitStream, PrngError> {
        if n == 0 {
            return Err(PrngError::EmptyRequest);
        }
        let mut words = Vec::with_capacity(n);
        while words.len() < n {
            if self.state.pending.is_empty() {
                self.refill();
            }
            let take = (n - words.len()).min(self.state.pending.len());
            words.extend(self.state.pending.drain(..take));
        }
        Ok(BitStream {
            width: self.params.width(),
            words,
        })
    }
}

/// Splits the low `m·k` bits of `z` into `m` words, most significant first.
fn split_words(z: &BigUint, width: WordWidth, m: usize) -> Vec<u64> {
    let k = width.bits() as usize;
    let digits: Vec<u64> = z.iter_u64_digits().collect();
    let digit = |i: usize| digits.get(i).copied().unwrap_or(0);
    (0..m)
        .map(|j| {
            let shift = (m - 1 - j) * k;
            let (i, off) = (shift / 64, shift % 64);
            let mut v = digit(i) >> off;
            if off + k > 64 {
                v |= digit(i + 1) << (64 - off);
            }
            v & width.mask()
        })
        .collect()
}

/// Independent streams from several seeds over one parameter set, possibly
/// in parallel. Output order matches `seeds`.
pub fn generate_many(
    params: &PrngParams,
    table: &PrimeTable,
    seeds: &[u64],
    words: usize,
    exec: Execution,
) -> Result<Vec<BitStream>, PrngError> {
    exec.map_slice(seeds, |&seed| {
        Prng::bootstrap(params, table, seed)?.generate(words)
    })
    .into_iter()
    .collect()
}

/// Serialisation of output words.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum WordFormat {
    /// Each word as `k/8` bytes, most significant first.
    #[default]
    RawBe,
    /// Each word as `k/8` bytes, least significant first.
    RawLe,
    /// Lowercase hex, zero-padded to `k/4` digits, one word per line.
    Hex,
}

impl FromStr for WordFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw-be" => Ok(Self::RawBe),
            "raw-le" => Ok(Self::RawLe),
            "hex" => Ok(Self::Hex),
            other => Err(format!("unknown format {other:?} (raw-be, raw-le, hex)")),
        }
    }
}

impl fmt::Display for WordFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::RawBe => "raw-be",
            Self::RawLe => "raw-le",
            Self::Hex => "hex",
        })
    }
}

/// An ordered run of `k`-bit output words.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitStream {
    width: WordWidth,
    words: Vec<u64>,
}

impl BitStream {
    pub fn new(width: WordWidth, words: Vec<u64>) -> Result<Self, PrngError> {
        if let Some(&w) = words.iter().find(|&&w| !width.fits(w)) {
            return Err(PrngError::Decode(format!("{w} exceeds {} bits", width.bits())));
        }
        Ok(Self { width, words })
    }

    pub fn width(&self) -> WordWidth {
        self.width
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn into_words(self) -> Vec<u64> {
        self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn bit_len(&self) -> usize {
        self.words.len() * self.width.bits() as usize
    }

    pub fn extend(&mut self, other: &BitStream) {
        assert_eq!(self.width, other.width, "mixing word widths");
        self.words.extend_from_slice(&other.words);
    }

    /// Words as a bit sequence, each word most significant bit first.
    pub fn to_bits(&self) -> BitSeq {
        let mut bits = BitSeq::with_capacity(self.bit_len());
        for &w in &self.words {
            bits.push_word(w, self.width.bits());
        }
        bits
    }

    pub fn encode(&self, format: WordFormat) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(format, &mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn write_to<W: Write>(&self, format: WordFormat, mut out: W) -> io::Result<()> {
        let bytes = self.width.bytes();
        match format {
            WordFormat::RawBe => {
                for &w in &self.words {
                    out.write_all(&w.to_be_bytes()[8 - bytes..])?;
                }
            }
            WordFormat::RawLe => {
                for &w in &self.words {
                    out.write_all(&w.to_le_bytes()[..bytes])?;
                }
            }
            WordFormat::Hex => {
                let digits = bytes * 2;
                for &w in &self.words {
                    writeln!(out, "{w:0digits$x}")?;
                }
            }
        }
        Ok(())
    }

    pub fn decode(data: &[u8], width: WordWidth, format: WordFormat) -> Result<Self, PrngError> {
        let bytes = width.bytes();
        let words = match format {
            WordFormat::RawBe | WordFormat::RawLe => {
                if data.len() % bytes != 0 {
                    return Err(PrngError::Decode(format!(
                        "{} bytes is not a whole number of {bytes}-byte words",
                        data.len()
                    )));
                }
                data.chunks_exact(bytes)
                    .map(|chunk| {
                        let mut buf = [0u8; 8];
                        if format == WordFormat::RawBe {
                            buf[8 - bytes..].copy_from_slice(chunk);
                            u64::from_be_bytes(buf)
                        } else {
                            buf[..bytes].copy_from_slice(chunk);
                            u64::from_le_bytes(buf)
                        }
                    })
                    .collect()
            }
            WordFormat::Hex => {
                let text = std::str::from_utf8(data).map_err(|e| PrngError::Decode(e.to_string()))?;
                text.lines()
                    .filter(|l| !l.is_empty())
                    .map(|l| u64::from_str_radix(l.trim(), 16).map_err(|e| PrngError::Decode(format!("{l:?}: {e}"))))
                    .collect::<Result<Vec<_>, _>>()?
            }
        };
        Self::new(width, words)
    }
}
