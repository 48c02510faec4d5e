//! The indexed table of `k`-bit safe primes the generator draws its hidden
//! moduli from.
//!
//! Tables are persisted as text:
//!
//! ```text
//! SAFEPRIMES v1 k=<k> count=<n>
//! <prime>
//! ...
//! ```
//!
//! one decimal prime per line, ascending, every line LF-terminated.

use std::io::{self, BufRead, Write};

use num_bigint::BigUint;
use thiserror::Error;

use crate::entropy::{EntropyError, EntropySource};
use crate::modmath::{is_safe_prime_u64, SafePrime};

const MAGIC: &str = "SAFEPRIMES";
const VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum TableError {
    #[error("invalid table parameters: {0}")]
    Invalid(String),
    #[error("only {found} of {requested} requested {k}-bit safe primes exist")]
    Exhausted { k: u32, requested: usize, found: usize },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("integrity error on line {line}: {message}")]
    Integrity { line: usize, message: String },
    #[error("index {index} out of range for a table of {count} primes")]
    Index { index: usize, count: usize },
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Ascending, duplicate-free list of `k`-bit safe primes, `4 ≤ k ≤ 64`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeTable {
    k: u32,
    entries: Vec<u64>,
}

fn check_width(k: u32) -> Result<(), TableError> {
    if !(4..=64).contains(&k) {
        return Err(TableError::Invalid(format!(
            "entry width k = {k} outside [4, 64]"
        )));
    }
    Ok(())
}

fn bit_length(v: u64) -> u32 {
    64 - v.leading_zeros()
}

/// `(first candidate ≡ 3 mod 4, number of such candidates)` with `k` bits.
fn candidates(k: u32) -> (u64, u64) {
    let first = (1u64 << (k - 1)) + 3;
    let last = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    (first, (last - first) / 4 + 1)
}

impl PrimeTable {
    /// Validates and wraps an existing list of primes.
    pub fn from_entries(k: u32, entries: Vec<u64>) -> Result<Self, TableError> {
        check_width(k)?;
        if entries.len() < 2 {
            return Err(TableError::Invalid(format!(
                "a table needs at least 2 entries, got {}",
                entries.len()
            )));
        }
        for (i, &p) in entries.iter().enumerate() {
            validate_entry(k, p, i.checked_sub(1).map(|j| entries[j]))
                .map_err(|message| TableError::Integrity { line: i + 2, message })?;
        }
        Ok(Self { k, entries })
    }

    /// `count` distinct `k`-bit safe primes.
    ///
    /// The scan starts at a random candidate drawn from `entropy` and walks
    /// upwards through the range (wrapping once), so a fixed entropy stream
    /// always yields the same table.
    pub fn build<E: EntropySource + ?Sized>(
        k: u32,
        count: usize,
        entropy: &mut E,
    ) -> Result<Self, TableError> {
        check_width(k)?;
        if count < 2 {
            return Err(TableError::Invalid(format!(
                "a table needs at least 2 entries, asked for {count}"
            )));
        }
        let (first, span) = candidates(k);
        let start = entropy.draw_u64()? % span;
        let mut entries = Vec::with_capacity(count);
        for i in 0..span {
            let c = first + 4 * ((start + i) % span);
            if is_safe_prime_u64(c) {
                entries.push(c);
                if entries.len() == count {
                    break;
                }
            }
        }
        if entries.len() < count {
            return Err(TableError::Exhausted {
                k,
                requested: count,
                found: entries.len(),
            });
        }
        entries.sort_unstable();
        Ok(Self { k, entries })
    }

    /// The `count` largest `k`-bit safe primes.
    pub fn build_top(k: u32, count: usize) -> Result<Self, TableError> {
        check_width(k)?;
        if count < 2 {
            return Err(TableError::Invalid(format!(
                "a table needs at least 2 entries, asked for {count}"
            )));
        }
        let (first, span) = candidates(k);
        let mut entries: Vec<u64> = (0..span)
            .rev()
            .map(|i| first + 4 * i)
            .filter(|&c| is_safe_prime_u64(c))
            .take(count)
            .collect();
        if entries.len() < count {
            return Err(TableError::Exhausted {
                k,
                requested: count,
                found: entries.len(),
            });
        }
        entries.reverse();
        Ok(Self { k, entries })
    }

    /// Every `k`-bit safe prime. Only sensible for small `k`.
    pub fn build_full(k: u32) -> Result<Self, TableError> {
        check_width(k)?;
        let (first, span) = candidates(k);
        let entries: Vec<u64> = (0..span)
            .map(|i| first + 4 * i)
            .filter(|&c| is_safe_prime_u64(c))
            .collect();
        if entries.len() < 2 {
            return Err(TableError::Exhausted {
                k,
                requested: 2,
                found: entries.len(),
            });
        }
        Ok(Self { k, entries })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest `r` with `2^r ≤ count`.
    pub fn index_bits(&self) -> u32 {
        usize::BITS - 1 - self.entries.len().leading_zeros()
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> Result<SafePrime, TableError> {
        self.value(index)
            .map(|p| SafePrime::new_unchecked(BigUint::from(p)))
            .ok_or(TableError::Index {
                index,
                count: self.entries.len(),
            })
    }

    #[inline]
    pub fn value(&self, index: usize) -> Option<u64> {
        self.entries.get(index).copied()
    }

    /// Bits of seed space, `k + s·r`, for `s` hidden indexes.
    pub fn key_space_bits(&self, s: usize) -> u64 {
        self.k as u64 + s as u64 * self.index_bits() as u64
    }

    /// Seed-space size `2^(k + s·r)`.
    pub fn key_space_size(&self, s: usize) -> BigUint {
        BigUint::from(1u32) << self.key_space_bits(s)
    }

    pub fn save<W: Write>(&self, mut out: W) -> Result<(), TableError> {
        if self.entries.len() < 2 {
            return Err(TableError::Invalid("refusing to save a table with fewer than 2 entries".into()));
        }
        writeln!(out, "{MAGIC} {VERSION} k={} count={}", self.k, self.entries.len())?;
        for p in &self.entries {
            writeln!(out, "{p}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.save(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("table text is ASCII")
    }

    /// Parses and fully re-validates a saved table.
    pub fn load<R: BufRead>(mut source: R) -> Result<Self, TableError> {
        let mut text = String::new();
        source.read_to_string(&mut text).map_err(|e| match e.kind() {
            io::ErrorKind::InvalidData => TableError::Parse {
                line: 0,
                message: "not valid UTF-8".into(),
            },
            _ => TableError::Io(e),
        })?;
        let body = text.strip_suffix('\n').ok_or_else(|| TableError::Parse {
            line: text.lines().count().max(1),
            message: "missing final LF".into(),
        })?;
        let mut lines = body.split('\n');
        let header = lines.next().unwrap_or_default();
        let (k, count) = parse_header(header)?;
        check_width(k).map_err(|e| TableError::Parse {
            line: 1,
            message: e.to_string(),
        })?;

        let mut entries = Vec::with_capacity(count.min(1 << 24));
        for (i, raw) in lines.enumerate() {
            let line = i + 2;
            if entries.len() == count {
                return Err(TableError::Parse {
                    line,
                    message: format!("more entries than the declared count={count}"),
                });
            }
            if raw.is_empty() || !raw.bytes().all(|b| b.is_ascii_digit()) {
                return Err(TableError::Parse {
                    line,
                    message: format!("expected a decimal prime, found {raw:?}"),
                });
            }
            let p: u64 = raw.parse().map_err(|_| TableError::Integrity {
                line,
                message: format!("{raw} does not fit in {k} bits"),
            })?;
            validate_entry(k, p, entries.last().copied())
                .map_err(|message| TableError::Integrity { line, message })?;
            entries.push(p);
        }
        if entries.len() != count {
            return Err(TableError::Parse {
                line: entries.len() + 2,
                message: format!("header declares count={count} but {} entries follow", entries.len()),
            });
        }
        if count < 2 {
            return Err(TableError::Parse {
                line: 1,
                message: format!("count={count} is below the minimum of 2"),
            });
        }
        Ok(Self { k, entries })
    }
}

fn validate_entry(k: u32, p: u64, previous: Option<u64>) -> Result<(), String> {
    if bit_length(p) != k {
        return Err(format!("{p} has {} bits, table width is {k}", bit_length(p)));
    }
    if !is_safe_prime_u64(p) {
        return Err(format!("{p} is not a safe prime"));
    }
    if let Some(prev) = previous {
        if p <= prev {
            return Err(format!("{p} does not exceed the previous entry {prev}"));
        }
    }
    Ok(())
}

fn parse_header(header: &str) -> Result<(u32, usize), TableError> {
    let bad = |message: String| TableError::Parse { line: 1, message };
    let fields: Vec<&str> = header.split(' ').collect();
    match fields.as_slice() {
        [magic, version, k, count] if *magic == MAGIC && *version == VERSION => {
            let k = k
                .strip_prefix("k=")
                .and_then(|v| v.parse::<u32>().ok())
                .ok_or_else(|| bad(format!("bad width field {k:?}")))?;
            let count = count
                .strip_prefix("count=")
                .and_then(|v| v.parse::<usize>().ok())
                .ok_or_else(|| bad(format!("bad count field {count:?}")))?;
            Ok((k, count))
        }
        _ => Err(bad(format!("expected \"{MAGIC} {VERSION} k=<k> count=<n>\", found {header:?}"))),
    }
}

/// An ordered selection of `s ≥ 2` table positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(indexes: Vec<usize>, table: &PrimeTable) -> Result<Self, TableError> {
        if indexes.len() < 2 {
            return Err(TableError::Invalid(format!(
                "an index set needs at least 2 entries, got {}",
                indexes.len()
            )));
        }
        if let Some(&bad) = indexes.iter().find(|&&i| i >= table.len()) {
            return Err(TableError::Index {
                index: bad,
                count: table.len(),
            });
        }
        Ok(Self(indexes))
    }

    /// Caller has checked every index against the table.
    pub(crate) fn new_unchecked(indexes: Vec<usize>) -> Self {
        Self(indexes)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for IndexSet {
    type Output = usize;

    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::BufferEntropy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn eight_bit() -> PrimeTable {
        PrimeTable::build_full(8).unwrap()
    }

    #[test]
    fn full_eight_bit_table() {
        let t = eight_bit();
        assert_eq!(t.entries(), &[167, 179, 227]);
        assert_eq!(t.get(0).unwrap().to_u64(), Some(167));
        assert_eq!(t.get(t.len() - 1).unwrap().to_u64(), Some(227));
        assert!(matches!(t.get(3), Err(TableError::Index { index: 3, count: 3 })));
        assert_eq!(t.index_bits(), 1);
    }

    #[test]
    fn build_sixteen_bit() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let t = PrimeTable::build(16, 64, &mut rng).unwrap();
        assert_eq!(t.len(), 64);
        assert!(t.entries().windows(2).all(|w| w[0] < w[1]));
        assert!(t.entries().iter().all(|&p| is_safe_prime_u64(p) && bit_length(p) == 16));
        assert_eq!(t.index_bits(), 6);
    }

    #[test]
    fn build_exhaustion_reports_partial_count() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        match PrimeTable::build(8, 1_000_000, &mut rng) {
            Err(TableError::Exhausted { found: 3, requested: 1_000_000, k: 8 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn build_is_deterministic_per_entropy() {
        let a = PrimeTable::build(24, 32, &mut ChaCha20Rng::seed_from_u64(11)).unwrap();
        let b = PrimeTable::build(24, 32, &mut ChaCha20Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
        let mut dry = BufferEntropy::new(vec![]);
        assert!(matches!(PrimeTable::build(24, 32, &mut dry), Err(TableError::Entropy(_))));
    }

    #[test]
    fn save_format() {
        let t = PrimeTable::from_entries(8, vec![167, 179]).unwrap();
        assert_eq!(t.to_text(), "SAFEPRIMES v1 k=8 count=2\n167\n179\n");
        assert!(PrimeTable::from_entries(8, vec![]).is_err());
        assert!(PrimeTable::from_entries(8, vec![167]).is_err());
    }

    #[test]
    fn load_valid_file() {
        let t = PrimeTable::load("SAFEPRIMES v1 k=8 count=3\n167\n179\n227\n".as_bytes()).unwrap();
        assert_eq!(t, eight_bit());
    }

    #[test]
    fn load_rejects_bad_entries() {
        let short = PrimeTable::load("SAFEPRIMES v1 k=8 count=3\n167\n13\n".as_bytes());
        assert!(matches!(short, Err(TableError::Integrity { line: 3, .. })), "{short:?}");
        let missing = PrimeTable::load("SAFEPRIMES v1 k=8 count=3\n167\n179\n".as_bytes());
        assert!(matches!(missing, Err(TableError::Parse { .. })), "{missing:?}");
        let unsorted = PrimeTable::load("SAFEPRIMES v1 k=8 count=2\n179\n167\n".as_bytes());
        assert!(matches!(unsorted, Err(TableError::Integrity { line: 3, .. })));
        let composite = PrimeTable::load("SAFEPRIMES v1 k=8 count=2\n167\n239\n".as_bytes());
        assert!(matches!(composite, Err(TableError::Integrity { line: 3, .. })));
    }

    #[test]
    fn load_rejects_bad_framing() {
        for text in [
            "SAFEPRIMES v2 k=8 count=2\n167\n179\n",
            "SAFEPRIMES v1 k=8  count=2\n167\n179\n",
            "SAFEPRIMES v1 k=x count=2\n167\n179\n",
            "SAFEPRIMES v1 k=8 count=2\n167\n179",
            "SAFEPRIMES v1 k=8 count=2\n167\n179\n\n",
            "SAFEPRIMES v1 k=8 count=2\r\n167\n179\n",
            "SAFEPRIMES v1 k=8 count=2\n167\n+179\n",
        ] {
            assert!(
                matches!(PrimeTable::load(text.as_bytes()), Err(TableError::Parse { .. })),
                "{text:?}"
            );
        }
    }

    #[test]
    fn key_space() {
        let t = PrimeTable::build_full(16).unwrap();
        assert_eq!(t.len(), 193);
        assert_eq!(t.index_bits(), 7);
        assert_eq!(t.key_space_bits(6), 16 + 6 * 7);
        assert_eq!(t.key_space_size(6), BigUint::from(1u64 << 58));
    }

    #[test]
    fn index_set_bounds() {
        let t = eight_bit();
        assert!(IndexSet::new(vec![0, 2], &t).is_ok());
        assert!(IndexSet::new(vec![0, 3], &t).is_err());
        assert!(IndexSet::new(vec![0], &t).is_err());
    }
}
