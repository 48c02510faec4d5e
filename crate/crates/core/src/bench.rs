//! Throughput measurement across modulus sizes.

use std::time::Instant;

use thiserror::Error;

use crate::known;
use crate::prime_table::{PrimeTable, TableError};
use crate::prng::{Prng, PrngError, PrngParams};

pub const DEFAULT_Q_SIZES: [u64; 4] = [256, 512, 1024, 2048];
pub const BENCH_K: u32 = 32;
pub const BENCH_TABLE_SIZE: usize = 256;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("byte count must be positive")]
    Empty,
    #[error("repetitions must be positive")]
    NoRepetitions,
    #[error("{0}")]
    Table(#[from] TableError),
    #[error("{0}")]
    Prng(#[from] PrngError),
    #[error("no safe prime for {0} bits: {1}")]
    Modulus(u64, String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub qbits: u64,
    pub bytes: usize,
    /// Median wall time over the repetitions.
    pub seconds: f64,
    pub ns_per_byte: f64,
    pub cycles_per_byte: Option<f64>,
    pub words_per_second: f64,
}

impl BenchRow {
    pub fn bytes_per_second(&self) -> f64 {
        self.bytes as f64 / self.seconds
    }
}

/// The largest 32-bit safe primes, for timing and battery runs.
pub fn bench_table() -> Result<PrimeTable, TableError> {
    PrimeTable::build_top(BENCH_K, BENCH_TABLE_SIZE)
}

pub fn bench_params(qbits: u64) -> Result<PrngParams, BenchError> {
    let q = known::q_for_bits(qbits).map_err(|e| BenchError::Modulus(qbits, e.to_string()))?;
    Ok(PrngParams::builder(q).word_bits(BENCH_K).build()?)
}

#[cfg(target_arch = "x86_64")]
fn cycle_counter() -> Option<u64> {
    // SAFETY: rdtsc has no preconditions on x86_64.
    Some(unsafe { core::arch::x86_64::_rdtsc() })
}

#[cfg(not(target_arch = "x86_64"))]
fn cycle_counter() -> Option<u64> {
    None
}

pub fn cycle_counter_available() -> bool {
    cycle_counter().is_some()
}

/// Times generation of `bytes` bytes (rounded up to whole words) at each
/// modulus size, taking the median of `reps` runs.
pub fn measure(q_sizes: &[u64], bytes: usize, reps: usize, table: &PrimeTable) -> Result<Vec<BenchRow>, BenchError> {
    if bytes == 0 {
        return Err(BenchError::Empty);
    }
    if reps == 0 {
        return Err(BenchError::NoRepetitions);
    }
    let words = bytes.div_ceil(BENCH_K as usize / 8);
    let bytes = words * BENCH_K as usize / 8;
    q_sizes
        .iter()
        .map(|&qbits| {
            let params = bench_params(qbits)?;
            let mut samples = Vec::with_capacity(reps);
            for rep in 0..reps {
                let mut g = Prng::bootstrap(&params, table, 1 + rep as u64)?;
                let c0 = cycle_counter();
                let t0 = Instant::now();
                let out = g.generate(words)?;
                let elapsed = t0.elapsed().as_secs_f64();
                let cycles = cycle_counter().zip(c0).map(|(c1, c0)| c1.wrapping_sub(c0) as f64);
                std::hint::black_box(out);
                samples.push((elapsed, cycles));
            }
            samples.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (seconds, cycles) = samples[reps / 2];
            Ok(BenchRow {
                qbits,
                bytes,
                seconds,
                ns_per_byte: seconds * 1e9 / bytes as f64,
                cycles_per_byte: cycles.map(|c| c / bytes as f64),
                words_per_second: words as f64 / seconds,
            })
        })
        .collect()
}

/// Whether time per byte never decreases as the modulus grows.
pub fn nondecreasing(rows: &[BenchRow]) -> bool {
    rows.windows(2).all(|w| w[1].ns_per_byte >= w[0].ns_per_byte)
}
