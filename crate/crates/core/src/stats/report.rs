//! Battery results and their line-oriented text form.
//!
//! ```text
//! #BATTERY<TAB>alpha<TAB>meta_alpha
//! test_id<TAB>subseq<TAB>n_bits<TAB>p_value|-<TAB>verdict
//! #RATIO<TAB>test_id<TAB>passes<TAB>total<TAB>ratio<TAB>pass|fail
//! #UNIF<TAB>test_id<TAB>ks<TAB>ad<TAB>chi2<TAB>pass|fail
//! ```
//!
//! Reals are written with 17 significant digits, so parsing is lossless.

use std::fmt::Write as _;

use super::uniformity::{PassRatio, Uniformity};
use super::verdict::Verdict;
use super::StatsError;

#[derive(Clone, Debug, PartialEq)]
pub struct TestResult {
    pub test_id: String,
    pub subseq: usize,
    pub n_bits: usize,
    /// `None` when the kernel was skipped.
    pub p_value: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestSummary {
    pub test_id: String,
    pub ratio: PassRatio,
    /// Absent when there are too few subsequences for the meta-tests.
    pub uniformity: Option<Uniformity>,
}

impl TestSummary {
    pub fn new(test_id: String, ratio: PassRatio, uniformity: Option<Uniformity>) -> Self {
        Self {
            test_id,
            ratio,
            uniformity,
        }
    }

    pub fn uniform(&self, meta_alpha: f64) -> bool {
        self.uniformity.is_none_or(|u| u.accepted(meta_alpha))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestReport {
    pub alpha: f64,
    pub meta_alpha: f64,
    pub results: Vec<TestResult>,
    pub summaries: Vec<TestSummary>,
}

/// Verdict counts for one test across subsequences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerdictCounts {
    pub test_id: String,
    pub runs: usize,
    pub weak: usize,
    pub failures: usize,
    pub skipped: usize,
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

impl TestReport {
    pub fn new(alpha: f64, meta_alpha: f64, results: Vec<TestResult>, summaries: Vec<TestSummary>) -> Self {
        Self {
            alpha,
            meta_alpha,
            results,
            summaries,
        }
    }

    pub fn failures(&self) -> usize {
        self.results.iter().filter(|r| r.verdict == Verdict::Failure).count()
    }

    pub fn suspicious(&self) -> usize {
        self.results.iter().filter(|r| r.verdict == Verdict::Suspicious).count()
    }

    pub fn skipped(&self) -> usize {
        self.results.iter().filter(|r| r.verdict == Verdict::Skipped).count()
    }

    /// Test ids whose results include at least one failure.
    pub fn failed_tests(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = Vec::new();
        for r in self.results.iter().filter(|r| r.verdict == Verdict::Failure) {
            if !ids.contains(&r.test_id.as_str()) {
                ids.push(&r.test_id);
            }
        }
        ids
    }

    pub fn summary(&self, test_id: &str) -> Option<&TestSummary> {
        self.summaries.iter().find(|s| s.test_id == test_id)
    }

    pub fn all_ratios_passed(&self) -> bool {
        self.summaries.iter().all(|s| s.ratio.passed)
    }

    pub fn all_uniform(&self) -> bool {
        self.summaries.iter().all(|s| s.uniform(self.meta_alpha))
    }

    /// No failures, every pass ratio above `1 − α`, every uniformity
    /// meta-test accepted.
    pub fn passed(&self) -> bool {
        self.failures() == 0 && self.all_ratios_passed() && self.all_uniform()
    }

    pub fn verdict_counts(&self) -> Vec<VerdictCounts> {
        self.summaries
            .iter()
            .map(|s| {
                let of_test = self.results.iter().filter(|r| r.test_id == s.test_id);
                let (mut runs, mut weak, mut failures, mut skipped) = (0, 0, 0, 0);
                for r in of_test {
                    runs += 1;
                    match r.verdict {
                        Verdict::Suspicious => weak += 1,
                        Verdict::Failure => failures += 1,
                        Verdict::Skipped => skipped += 1,
                        Verdict::Pass => {}
                    }
                }
                VerdictCounts {
                    test_id: s.test_id.clone(),
                    runs,
                    weak,
                    failures,
                    skipped,
                }
            })
            .collect()
    }

    /// Human-readable per-test table of runs, weak and failed results.
    pub fn verdict_table(&self) -> String {
        let counts = self.verdict_counts();
        let width = counts.iter().map(|c| c.test_id.len()).max().unwrap_or(4).max(4);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>5}  {:>5}  {:>5}  {:>5}  {:>8}  uniform",
            "Test", "Runs", "Weak", "Fail", "Skip", "R_t"
        );
        for (c, s) in counts.iter().zip(&self.summaries) {
            let _ = writeln!(
                out,
                "{:<width$}  {:>5}  {:>5}  {:>5}  {:>5}  {:>8.5}  {}",
                c.test_id,
                c.runs,
                c.weak,
                c.failures,
                c.skipped,
                s.ratio.ratio,
                if s.uniform(self.meta_alpha) { "yes" } else { "no" },
            );
        }
        let total: usize = counts.iter().map(|c| c.runs).sum();
        let _ = writeln!(
            out,
            "{:<width$}  {:>5}  {:>5}  {:>5}  {:>5}",
            "Total",
            total,
            self.suspicious(),
            self.failures(),
            self.skipped()
        );
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "#BATTERY\t{}\t{}", real(self.alpha), real(self.meta_alpha));
        for r in &self.results {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                r.test_id,
                r.subseq,
                r.n_bits,
                r.p_value.map_or("-".to_string(), real),
                r.verdict
            );
        }
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "#RATIO\t{}\t{}\t{}\t{}\t{}",
                s.test_id,
                s.ratio.passes,
                s.ratio.total,
                real(s.ratio.ratio),
                flag(s.ratio.passed)
            );
            if let Some(u) = s.uniformity {
                let _ = writeln!(
                    out,
                    "#UNIF\t{}\t{}\t{}\t{}\t{}",
                    s.test_id,
                    real(u.ks),
                    real(u.ad),
                    real(u.chi2),
                    flag(u.accepted(self.meta_alpha))
                );
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, StatsError> {
        let mut alpha = None;
        let mut results = Vec::new();
        let mut summaries: Vec<TestSummary> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| StatsError::Parse { line: line_no, message };
            let fields: Vec<&str> = line.split('\t').collect();
            let num = |s: &str| s.parse::<f64>().map_err(|e| err(format!("{s:?}: {e}")));
            let int = |s: &str| s.parse::<usize>().map_err(|e| err(format!("{s:?}: {e}")));
            let pass = |s: &str| match s {
                "pass" => Ok(true),
                "fail" => Ok(false),
                other => Err(err(format!("expected pass/fail, got {other:?}"))),
            };
            match fields[0] {
                "#BATTERY" if fields.len() == 3 => alpha = Some((num(fields[1])?, num(fields[2])?)),
                "#RATIO" if fields.len() == 6 => {
                    let ratio = PassRatio {
                        passes: int(fields[2])?,
                        total: int(fields[3])?,
                        ratio: num(fields[4])?,
                        passed: pass(fields[5])?,
                    };
                    summaries.push(TestSummary::new(fields[1].to_string(), ratio, None));
                }
                "#UNIF" if fields.len() == 6 => {
                    let s = summaries
                        .iter_mut()
                        .rev()
                        .find(|s| s.test_id == fields[1])
                        .ok_or_else(|| err(format!("#UNIF for {} before its #RATIO", fields[1])))?;
                    s.uniformity = Some(Uniformity {
                        ks: num(fields[2])?,
                        ad: num(fields[3])?,
                        chi2: num(fields[4])?,
                    });
                    pass(fields[5])?;
                }
                f if f.starts_with('#') => return Err(err(format!("unknown or malformed line {f:?}"))),
                _ if fields.len() == 5 => results.push(TestResult {
                    test_id: fields[0].to_string(),
                    subseq: int(fields[1])?,
                    n_bits: int(fields[2])?,
                    p_value: match fields[3] {
                        "-" => None,
                        s => Some(num(s)?),
                    },
                    verdict: fields[4].parse().map_err(err)?,
                }),
                _ => return Err(err(format!("expected 5 fields, got {}", fields.len()))),
            }
        }
        let (alpha, meta_alpha) = alpha.ok_or(StatsError::Parse {
            line: 1,
            message: "missing #BATTERY header".into(),
        })?;
        Ok(Self::new(alpha, meta_alpha, results, summaries))
    }
}
