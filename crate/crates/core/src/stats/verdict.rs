//! Verdict taxonomy for single p-values.

use std::fmt;
use std::str::FromStr;

/// p-values at or beyond this distance from 0 or 1 are outright failures.
pub const FAILURE_EPSILON: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Pass,
    Suspicious,
    Failure,
    /// The kernel's prerequisite did not hold; no p-value exists.
    Skipped,
}

/// Which extremes of the p-value indicate a defect.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tail {
    /// Only small p-values (statistic far out on either side already folded in).
    Lower,
    /// Both p near 0 and p near 1 are extreme.
    Both,
}

impl Verdict {
    /// Both extremes count: failure iff `p ≤ 1e-10` or `p ≥ 1 − 1e-10`,
    /// suspicious iff `p < α` or `p > 1 − α`.
    pub fn classify(p: f64, alpha: f64) -> Self {
        Self::classify_tail(p, alpha, Tail::Both)
    }

    pub fn classify_tail(p: f64, alpha: f64, tail: Tail) -> Self {
        if p.is_nan() || p <= FAILURE_EPSILON {
            return Verdict::Failure;
        }
        let upper = tail == Tail::Both;
        if upper && p >= 1.0 - FAILURE_EPSILON {
            Verdict::Failure
        } else if p < alpha || (upper && p > 1.0 - alpha) {
            Verdict::Suspicious
        } else {
            Verdict::Pass
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Suspicious => "suspicious",
            Verdict::Failure => "failure",
            Verdict::Skipped => "skipped",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pass" => Ok(Verdict::Pass),
            "suspicious" => Ok(Verdict::Suspicious),
            "failure" => Ok(Verdict::Failure),
            "skipped" => Ok(Verdict::Skipped),
            other => Err(format!("unknown verdict {other:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundaries() {
        let a = 0.001;
        assert_eq!(Verdict::classify(1e-10, a), Verdict::Failure);
        assert_eq!(Verdict::classify(1.0000001e-10, a), Verdict::Suspicious);
        assert_eq!(Verdict::classify(1.0 - 1e-10, a), Verdict::Failure);
        assert_eq!(Verdict::classify(0.0005, a), Verdict::Suspicious);
        assert_eq!(Verdict::classify(0.9995, a), Verdict::Suspicious);
        assert_eq!(Verdict::classify(0.001, a), Verdict::Pass);
        assert_eq!(Verdict::classify(0.5, a), Verdict::Pass);
        assert_eq!(Verdict::classify(f64::NAN, a), Verdict::Failure);
        assert_eq!(Verdict::classify_tail(1.0, a, Tail::Lower), Verdict::Pass);
        assert_eq!(Verdict::classify_tail(1e-11, a, Tail::Lower), Verdict::Failure);
        for v in [Verdict::Pass, Verdict::Suspicious, Verdict::Failure] {
            assert_eq!(v.to_string().parse::<Verdict>().unwrap(), v);
        }
    }
}
