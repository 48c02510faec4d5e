//! Meta-tests on collections of p-values: pass ratio and uniformity.

use super::special::{ad_inf_sf, chi2_sf, ks_sf};
use super::StatsError;

pub const MIN_UNIFORMITY_SAMPLES: usize = 10;
pub const UNIFORMITY_BINS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PassRatio {
    pub passes: usize,
    pub total: usize,
    pub ratio: f64,
    pub passed: bool,
}

/// `R = #{p ≥ α} / M`; passed iff `R > 1 − α`.
pub fn pass_ratio(p_values: &[f64], alpha: f64) -> Result<PassRatio, StatsError> {
    if p_values.is_empty() {
        return Err(StatsError::Empty);
    }
    let passes = p_values.iter().filter(|&&p| p >= alpha).count();
    let ratio = passes as f64 / p_values.len() as f64;
    Ok(PassRatio {
        passes,
        total: p_values.len(),
        ratio,
        passed: ratio > 1.0 - alpha,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Uniformity {
    pub ks: f64,
    pub ad: f64,
    pub chi2: f64,
}

impl Uniformity {
    /// All three tests accept at level `alpha`.
    pub fn accepted(&self, alpha: f64) -> bool {
        self.ks >= alpha && self.ad >= alpha && self.chi2 >= alpha
    }
}

fn sorted(p_values: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = p_values.iter().map(|&p| p.clamp(0.0, 1.0)).collect();
    u.sort_by(f64::total_cmp);
    u
}

/// Kolmogorov–Smirnov distance to Uniform(0, 1).
pub fn ks_statistic(p_values: &[f64]) -> f64 {
    let u = sorted(p_values);
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}

/// Anderson–Darling `A²` against Uniform(0, 1). Values are clamped away
/// from 0 and 1 so the logarithms stay finite.
pub fn ad_statistic(p_values: &[f64]) -> f64 {
    const EDGE: f64 = 1e-300;
    let u: Vec<f64> = sorted(p_values).into_iter().map(|x| x.clamp(EDGE, 1.0 - f64::EPSILON / 2.0)).collect();
    let n = u.len();
    let s: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * (u[i].ln() + (-u[n - 1 - i]).ln_1p()))
        .sum();
    -(n as f64) - s / n as f64
}

/// Ten equal bins on `[0, 1]`; the last bin is closed.
pub fn bin_counts(p_values: &[f64]) -> [usize; UNIFORMITY_BINS] {
    let mut counts = [0; UNIFORMITY_BINS];
    for &p in p_values {
        let bin = ((p.clamp(0.0, 1.0) * UNIFORMITY_BINS as f64) as usize).min(UNIFORMITY_BINS - 1);
        counts[bin] += 1;
    }
    counts
}

pub fn chi2_statistic(p_values: &[f64]) -> f64 {
    let expected = p_values.len() as f64 / UNIFORMITY_BINS as f64;
    bin_counts(p_values)
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}

/// KS, AD and chi-square p-values of the hypothesis that `p_values` are
/// uniform on `[0, 1]`.
pub fn uniformity_tests(p_values: &[f64]) -> Result<Uniformity, StatsError> {
    let n = p_values.len();
    if n < MIN_UNIFORMITY_SAMPLES {
        return Err(StatsError::InsufficientData {
            needed: MIN_UNIFORMITY_SAMPLES,
            got: n,
        });
    }
    Ok(Uniformity {
        ks: ks_sf(ks_statistic(p_values), n),
        ad: ad_inf_sf(ad_statistic(p_values)),
        chi2: chi2_sf(chi2_statistic(p_values), (UNIFORMITY_BINS - 1) as f64),
    })
}
