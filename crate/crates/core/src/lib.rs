//! A cryptographically-secure pseudorandom number generator built from
//! chained modular exponentiations over hidden safe primes, followed by a
//! Feistel-like nonlinear mixing box.
//!
//! The crate is organised bottom-up:
//!
//! * [`modmath`]: number theory (modular exponentiation, primality, safe
//!   primes, generators, quadratic residues, square roots).
//! * [`prime_table`]: the indexed table of `k`-bit safe primes the generator
//!   draws its hidden moduli from.
//! * [`feistel`]: the mixing box applied to every extracted word.
//! * [`prng`]: the generator itself.
//! * [`rg`]: the exponential generator used as a security anchor, and the
//!   square-root reduction onto it.
//! * [`stats`]: a desk-scale statistical battery with meta-analysis.
//!
//! Data-parallel work (battery subsequences, independent streams) goes
//! through [`par`], which falls back to sequential execution when the
//! `parallel` feature is disabled.

pub mod bench;
pub mod config;
pub mod entropy;
pub mod feistel;
pub mod known;
pub mod modmath;
pub mod par;
pub mod prime_table;
pub mod prng;
pub mod rg;
pub mod selftest;
pub mod stats;

pub use entropy::{BufferEntropy, EntropyError, EntropySource};
pub use feistel::{FeistelBox, SkipState, WordWidth};
pub use modmath::SafePrime;
pub use par::Execution;
pub use prime_table::{IndexSet, PrimeTable};
pub use prng::{BitStream, Mode, Prng, PrngParams, WordFormat};
