//! Run configuration for stream generation: every generator parameter plus
//! seed, output size, format and paths, readable from a flat
//! `key = value` file.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use num_traits::Num;
use thiserror::Error;

use crate::feistel::{DEFAULT_E2, DEFAULT_ROUNDS};
use crate::known;
use crate::modmath::SafePrime;
use crate::prime_table::{IndexSet, PrimeTable, TableError};
use crate::prng::{
    Mode, Prng, PrngError, PrngParams, WordFormat, DEFAULT_E1, DEFAULT_INDEX_COUNT, DEFAULT_REFRESH_PERIOD,
    DEFAULT_WORD_BITS,
};

/// Largest `k` for which a missing table is replaced by the full table.
pub const MAX_IMPLICIT_TABLE_K: u32 = 16;
pub const DEFAULT_Q_BITS: u64 = 1024;
pub const DEFAULT_WORDS: usize = 1024;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("{key}: {message}")]
    Value { key: String, message: String },
    #[error("{0}")]
    Prng(#[from] PrngError),
    #[error("table: {0}")]
    Table(#[from] TableError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn value_error(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Decimal or `0x`-prefixed hexadecimal.
pub fn parse_seed(text: &str) -> Result<u64, String> {
    let t = text.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {t:?}: {e}"))
}

/// Decimal or `0x` hexadecimal big integer.
pub fn parse_biguint(text: &str) -> Result<BigUint, String> {
    let t = text.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => BigUint::from_str_radix(hex, 16),
        None => BigUint::from_str_radix(t, 10),
    };
    parsed.map_err(|e| format!("invalid integer {t:?}: {e}"))
}

pub fn parse_indexes(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| format!("invalid index {s:?}: {e}")))
        .collect()
}

fn parse_bool(text: &str) -> Result<bool, String> {
    match text {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true or false, got {other:?}")),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub qbits: u64,
    /// Explicit modulus; overrides `qbits`.
    pub q: Option<BigUint>,
    pub k: u32,
    pub s: usize,
    pub mr: u64,
    pub nrounds: u32,
    pub e1: u64,
    pub e2: u64,
    pub seed: u64,
    /// Explicit index set; derived from the seed when absent.
    pub indexes: Option<Vec<usize>>,
    pub table: Option<PathBuf>,
    pub n: usize,
    pub format: WordFormat,
    /// Output path, `-` for standard output.
    pub out: String,
    pub security_mode: bool,
    pub stretch: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            qbits: DEFAULT_Q_BITS,
            q: None,
            k: DEFAULT_WORD_BITS,
            s: DEFAULT_INDEX_COUNT,
            mr: DEFAULT_REFRESH_PERIOD,
            nrounds: DEFAULT_ROUNDS,
            e1: DEFAULT_E1,
            e2: DEFAULT_E2,
            seed: 0,
            indexes: None,
            table: None,
            n: DEFAULT_WORDS,
            format: WordFormat::RawBe,
            out: "-".into(),
            security_mode: false,
            stretch: false,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.merge_text(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn merge_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected key = value, got {content:?}"),
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            self.set(key, value.trim())?;
        }
        Ok(())
    }

    /// Sets one field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let err = |m: String| value_error(key, m);
        let num = |v: &str| v.parse::<u64>().map_err(|e| format!("{v:?}: {e}"));
        match key {
            "qbits" => self.qbits = num(value).map_err(err)?,
            "q" => self.q = Some(parse_biguint(value).map_err(err)?),
            "k" => self.k = num(value).map_err(err)? as u32,
            "s" => self.s = num(value).map_err(err)? as usize,
            "mr" => self.mr = num(value).map_err(err)?,
            "nrounds" => self.nrounds = num(value).map_err(err)? as u32,
            "e1" => self.e1 = num(value).map_err(err)?,
            "e2" => self.e2 = num(value).map_err(err)?,
            "seed" => self.seed = parse_seed(value).map_err(err)?,
            "indexes" => self.indexes = Some(parse_indexes(value).map_err(err)?),
            "table" => self.table = Some(PathBuf::from(value)),
            "n" => self.n = num(value).map_err(err)? as usize,
            "format" => self.format = value.parse().map_err(err)?,
            "out" => self.out = value.to_string(),
            "security_mode" => self.security_mode = parse_bool(value).map_err(err)?,
            "stretch" => self.stretch = parse_bool(value).map_err(err)?,
            other => return Err(value_error(other, "unknown key")),
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "qbits = {}", self.qbits);
        if let Some(q) = &self.q {
            let _ = writeln!(out, "q = {q}");
        }
        let _ = writeln!(out, "k = {}", self.k);
        let _ = writeln!(out, "s = {}", self.s);
        let _ = writeln!(out, "mr = {}", self.mr);
        let _ = writeln!(out, "nrounds = {}", self.nrounds);
        let _ = writeln!(out, "e1 = {}", self.e1);
        let _ = writeln!(out, "e2 = {}", self.e2);
        let _ = writeln!(out, "seed = {}", self.seed);
        if let Some(idx) = &self.indexes {
            let list: Vec<String> = idx.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "indexes = {}", list.join(","));
        }
        if let Some(t) = &self.table {
            let _ = writeln!(out, "table = {}", t.display());
        }
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "format = {}", self.format);
        let _ = writeln!(out, "out = {}", self.out);
        let _ = writeln!(out, "security_mode = {}", self.security_mode);
        let _ = writeln!(out, "stretch = {}", self.stretch);
        out
    }

    pub fn mode(&self) -> Mode {
        if self.security_mode {
            Mode::Security
        } else {
            Mode::Test
        }
    }

    pub fn modulus(&self) -> Result<SafePrime, ConfigError> {
        match &self.q {
            Some(q) => SafePrime::new(q.clone()).map_err(|e| value_error("q", e.to_string())),
            None => known::q_for_bits(self.qbits).map_err(|e| value_error("qbits", e.to_string())),
        }
    }

    pub fn params(&self) -> Result<PrngParams, ConfigError> {
        Ok(PrngParams::builder(self.modulus()?)
            .word_bits(self.k)
            .index_count(self.s)
            .refresh_period(self.mr)
            .rounds(self.nrounds)
            .e1(self.e1)
            .e2(self.e2)
            .mode(self.mode())
            .stretch(self.stretch)
            .build()?)
    }

    /// The configured table file, or the full table for small `k`.
    pub fn load_table(&self) -> Result<PrimeTable, ConfigError> {
        match &self.table {
            Some(path) => {
                let file = File::open(path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                Ok(PrimeTable::load(BufReader::new(file))?)
            }
            None if self.k <= MAX_IMPLICIT_TABLE_K => Ok(PrimeTable::build_full(self.k)?),
            None => Err(value_error(
                "table",
                format!("a table file is required for k = {} (build one with `primes`)", self.k),
            )),
        }
    }

    /// Seeded generator over borrowed parameters and table.
    pub fn generator<'a>(&self, params: &'a PrngParams, table: &'a PrimeTable) -> Result<Prng<'a>, ConfigError> {
        let prng = match &self.indexes {
            Some(idx) => {
                let set = IndexSet::new(idx.clone(), table).map_err(|e| value_error("indexes", e.to_string()))?;
                Prng::new(params, table, self.seed, set)?
            }
            None => Prng::bootstrap(params, table, self.seed)?,
        };
        Ok(prng)
    }
}

const KEYS: &[&str] = &[
    "qbits",
    "q",
    "k",
    "s",
    "mr",
    "nrounds",
    "e1",
    "e2",
    "seed",
    "indexes",
    "table",
    "n",
    "format",
    "out",
    "security_mode",
    "stretch",
];
