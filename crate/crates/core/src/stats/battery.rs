//! Battery driver.

use std::fmt;

use super::bits::BitSeq;
use super::kernels;
use super::report::{TestReport, TestResult, TestSummary};
use super::uniformity::{pass_ratio, uniformity_tests, PassRatio, MIN_UNIFORMITY_SAMPLES};
use super::verdict::{Tail, Verdict};
use super::StatsError;
use crate::par::Execution;

pub const DEFAULT_ALPHA: f64 = 0.001;
pub const DEFAULT_META_ALPHA: f64 = 0.01;
pub const DEFAULT_SUBSEQUENCES: usize = 64;
pub const DEFAULT_LAGS: [usize; 3] = [1, 2, 4];
pub const DEFAULT_BLOCK_SIZES: [usize; 2] = [32, 256];
/// Floor on the length of each subsequence.
pub const MIN_SUBSEQUENCE_BITS: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kernel {
    Monobit,
    Runs,
    Autocorrelation(usize),
    HammingWeight(usize),
    HammingCorrelation(usize),
}

impl Kernel {
    pub fn id(&self) -> String {
        match *self {
            Kernel::Monobit => "monobit".into(),
            Kernel::Runs => "runs".into(),
            Kernel::Autocorrelation(d) => format!("autocor_d{d}"),
            Kernel::HammingWeight(l) => format!("hamming_weight_L{l}"),
            Kernel::HammingCorrelation(l) => format!("hamming_corr_L{l}"),
        }
    }

    /// Which p-value extremes signal a defect. Only the chi-square weight
    /// test has a meaningful "too good" upper tail.
    pub fn tail(&self) -> Tail {
        match self {
            Kernel::HammingWeight(_) => Tail::Both,
            _ => Tail::Lower,
        }
    }

    /// Shortest input the kernel accepts.
    pub fn min_bits(&self) -> usize {
        match *self {
            Kernel::Monobit | Kernel::Runs => kernels::MIN_BITS,
            Kernel::Autocorrelation(d) => kernels::MIN_BITS + d,
            Kernel::HammingWeight(l) => kernels::MIN_WEIGHT_BLOCKS * l,
            Kernel::HammingCorrelation(l) => kernels::MIN_CORRELATION_BLOCKS * l,
        }
    }

    /// Raw kernel evaluation.
    pub fn evaluate(&self, bits: &BitSeq) -> Result<f64, StatsError> {
        match *self {
            Kernel::Monobit => kernels::monobit(bits),
            Kernel::Runs => kernels::runs_test(bits),
            Kernel::Autocorrelation(d) => kernels::autocorrelation(bits, d),
            Kernel::HammingWeight(l) => kernels::hamming_weight_blocks(bits, l),
            Kernel::HammingCorrelation(l) => kernels::hamming_correlation(bits, l),
        }
    }

    /// As [`evaluate`](Self::evaluate), but an undefined statistic is scored
    /// `p = 0` (a failure) and a failed prerequisite gives `None` (skipped).
    pub fn score(&self, bits: &BitSeq) -> Result<Option<f64>, StatsError> {
        match self.evaluate(bits) {
            Ok(p) => Ok(Some(p)),
            Err(StatsError::Undefined(_)) => Ok(Some(0.0)),
            Err(StatsError::Prerequisite(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatteryConfig {
    pub alpha: f64,
    pub meta_alpha: f64,
    pub subsequences: usize,
    pub lags: Vec<usize>,
    pub block_sizes: Vec<usize>,
    pub exec: Execution,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            meta_alpha: DEFAULT_META_ALPHA,
            subsequences: DEFAULT_SUBSEQUENCES,
            lags: DEFAULT_LAGS.to_vec(),
            block_sizes: DEFAULT_BLOCK_SIZES.to_vec(),
            exec: Execution::default(),
        }
    }
}

impl BatteryConfig {
    pub fn validate(&self) -> Result<(), StatsError> {
        let bad = |m: String| Err(StatsError::Config(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} outside (0, 1)", self.alpha));
        }
        if !(self.meta_alpha > 0.0 && self.meta_alpha < 1.0) {
            return bad(format!("meta alpha {} outside (0, 1)", self.meta_alpha));
        }
        if self.subsequences == 0 {
            return bad("at least one subsequence required".into());
        }
        if self.lags.iter().any(|&d| d == 0) {
            return bad("lags must be positive".into());
        }
        if self.block_sizes.iter().any(|&l| l == 0) {
            return bad("block sizes must be positive".into());
        }
        Ok(())
    }

    pub fn kernels(&self) -> Vec<Kernel> {
        let mut out = vec![Kernel::Monobit, Kernel::Runs];
        out.extend(self.lags.iter().map(|&d| Kernel::Autocorrelation(d)));
        out.extend(self.block_sizes.iter().map(|&l| Kernel::HammingWeight(l)));
        out.extend(self.block_sizes.iter().map(|&l| Kernel::HammingCorrelation(l)));
        out
    }

    pub fn min_subsequence_bits(&self) -> usize {
        self.kernels()
            .iter()
            .map(Kernel::min_bits)
            .fold(MIN_SUBSEQUENCE_BITS, usize::max)
    }

    /// Minimum stream length; `2^20` bits for the default configuration.
    pub fn min_stream_bits(&self) -> usize {
        self.subsequences * self.min_subsequence_bits()
    }
}

/// Splits `bits` into `M` equal subsequences (dropping any remainder), runs
/// every kernel on each, and assembles the meta-analysis.
pub fn run_battery(bits: &BitSeq, config: &BatteryConfig) -> Result<TestReport, StatsError> {
    config.validate()?;
    let needed = config.min_stream_bits();
    if bits.len() < needed {
        return Err(StatsError::InsufficientData {
            needed,
            got: bits.len(),
        });
    }
    let kernels = config.kernels();
    let m = config.subsequences;
    let len = bits.len() / m;

    let per_subsequence = config.exec.map_range(m, |i| {
        let sub = bits.slice(i * len..(i + 1) * len);
        kernels.iter().map(|k| k.score(&sub)).collect::<Result<Vec<_>, _>>()
    });
    let per_subsequence = per_subsequence.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut results = Vec::with_capacity(m * kernels.len());
    let mut summaries = Vec::with_capacity(kernels.len());
    for (j, kernel) in kernels.iter().enumerate() {
        let scored: Vec<Option<f64>> = per_subsequence.iter().map(|row| row[j]).collect();
        for (i, &p) in scored.iter().enumerate() {
            results.push(TestResult {
                test_id: kernel.id(),
                subseq: i,
                n_bits: len,
                p_value: p,
                verdict: p.map_or(Verdict::Skipped, |p| {
                    Verdict::classify_tail(p, config.alpha, kernel.tail())
                }),
            });
        }
        // Skipped subsequences take no part in the meta-analysis.
        let ps: Vec<f64> = scored.iter().flatten().copied().collect();
        let ratio = match pass_ratio(&ps, config.alpha) {
            Err(StatsError::Empty) => PassRatio {
                passes: 0,
                total: 0,
                ratio: 0.0,
                passed: false,
            },
            other => other?,
        };
        let uniformity = if ps.len() >= MIN_UNIFORMITY_SAMPLES {
            Some(uniformity_tests(&ps)?)
        } else {
            None
        };
        summaries.push(TestSummary::new(kernel.id(), ratio, uniformity));
    }
    Ok(TestReport::new(config.alpha, config.meta_alpha, results, summaries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_bits(bits: usize, seed: u64) -> BitSeq {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut s = BitSeq::with_capacity(bits);
        for _ in 0..bits / 64 {
            s.push_word(rng.next_u64(), 64);
        }
        s
    }

    #[test]
    fn default_minimum_is_2_pow_20() {
        let c = BatteryConfig::default();
        assert_eq!(c.min_stream_bits(), 1 << 20);
        assert_eq!(c.kernels().len(), 9);
        let err = run_battery(&random_bits(1 << 19, 1), &c).unwrap_err();
        assert_eq!(err, StatsError::InsufficientData { needed: 1 << 20, got: 1 << 19 });
    }

    #[test]
    fn deterministic_and_ordered() {
        let c = BatteryConfig {
            subsequences: 16,
            ..Default::default()
        };
        let bits = random_bits(16 << 14, 7);
        let a = run_battery(&bits, &c).unwrap();
        let b = run_battery(&bits, &BatteryConfig { exec: Execution::Sequential, ..c.clone() }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.results.len(), 16 * 9);
        assert_eq!(a.results[1].subseq, 1);
        assert_eq!(a.failures(), 0);
    }

    #[test]
    fn config_validation() {
        let bad = BatteryConfig {
            alpha: 0.0,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(StatsError::Config(_))));
        let bad = BatteryConfig {
            lags: vec![0],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn biased_subsequence_skips_runs() {
        let c = BatteryConfig {
            subsequences: 16,
            ..Default::default()
        };
        let mut bits = BitSeq::with_capacity(16 << 14);
        for (i, b) in random_bits(16 << 14, 3).iter().enumerate() {
            // First subsequence: roughly 3/4 ones.
            bits.push_bit(b || (i < 1 << 14 && i % 2 == 0));
        }
        let report = run_battery(&bits, &c).unwrap();
        let runs: Vec<_> = report.results.iter().filter(|r| r.test_id == "runs").collect();
        assert_eq!(runs[0].verdict, Verdict::Skipped);
        assert_eq!(runs[0].p_value, None);
        assert!(runs[1..].iter().all(|r| r.p_value.is_some()));
        assert_eq!(report.skipped(), 1);
        assert_eq!(report.summary("runs").unwrap().ratio.total, 15);
        assert_eq!(TestReport::parse(&report.to_text()).unwrap(), report);
    }
}
