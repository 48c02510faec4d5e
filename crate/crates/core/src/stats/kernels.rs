//! The five test kernels. Each maps a bit sequence to one p-value.

use statrs::function::factorial::ln_binomial;

use super::bits::BitSeq;
use super::special::{chi2_sf, erfc, normal_two_sided};
use super::StatsError;

pub const MIN_BITS: usize = 100;
pub const MIN_WEIGHT_BLOCKS: usize = 20;
pub const MIN_CORRELATION_BLOCKS: usize = 21;
/// Pooled chi-square cells must expect at least this many blocks.
pub const MIN_CELL_EXPECTATION: f64 = 5.0;

fn require(got: usize, needed: usize) -> Result<(), StatsError> {
    if got < needed {
        Err(StatsError::InsufficientData { needed, got })
    } else {
        Ok(())
    }
}

/// Frequency test: `erfc(|#1 − #0| / √(2n))`.
pub fn monobit(bits: &BitSeq) -> Result<f64, StatsError> {
    let n = bits.len();
    require(n, MIN_BITS)?;
    let s = 2.0 * bits.count_ones() as f64 - n as f64;
    Ok(erfc(s.abs() / (2.0 * n as f64).sqrt()))
}

/// Runs test. Skipped (error) when the proportion of ones is too far from
/// one half for the runs statistic to be meaningful.
pub fn runs_test(bits: &BitSeq) -> Result<f64, StatsError> {
    let n = bits.len();
    require(n, MIN_BITS)?;
    let nf = n as f64;
    let pi = bits.count_ones() as f64 / nf;
    let tau = 2.0 / nf.sqrt();
    if (pi - 0.5).abs() >= tau {
        return Err(StatsError::Prerequisite(format!(
            "proportion of ones {pi:.6} outside 1/2 ± {tau:.6}"
        )));
    }
    let runs = 1.0 + bits.lag_xor_count(1) as f64;
    let spread = pi * (1.0 - pi);
    Ok(erfc((runs - 2.0 * nf * spread).abs() / (2.0 * (2.0 * nf).sqrt() * spread)))
}

/// Autocorrelation at lag `d`: `A = Σ b_i ⊕ b_{i+d}` against `(n − d)/2`.
pub fn autocorrelation(bits: &BitSeq, d: usize) -> Result<f64, StatsError> {
    let n = bits.len();
    if d == 0 || d >= n {
        return Err(StatsError::Domain(format!("lag {d} outside [1, {n})")));
    }
    require(n - d, MIN_BITS)?;
    let m = (n - d) as f64;
    let a = bits.lag_xor_count(d) as f64;
    let z = 2.0 * (a - m / 2.0) / m.sqrt();
    Ok(normal_two_sided(z))
}

/// `P(W = w)` for `W ~ Binomial(L, 1/2)`, `w = 0..=L`.
pub fn binomial_half(l: usize) -> Vec<f64> {
    let ln2 = std::f64::consts::LN_2;
    (0..=l)
        .map(|w| (ln_binomial(l as u64, w as u64) - l as f64 * ln2).exp())
        .collect()
}

/// Groups weights `0..=L` into consecutive cells each expecting at least
/// [`MIN_CELL_EXPECTATION`] of `blocks` observations. Returns the first
/// weight of every cell.
pub fn pooled_cells(probs: &[f64], blocks: usize) -> Vec<usize> {
    let mut starts = vec![0];
    let mut acc = 0.0;
    for (w, &p) in probs.iter().enumerate() {
        acc += p * blocks as f64;
        if acc >= MIN_CELL_EXPECTATION && w + 1 < probs.len() {
            starts.push(w + 1);
            acc = 0.0;
        }
    }
    // A short trailing cell is merged into its predecessor.
    if acc < MIN_CELL_EXPECTATION && starts.len() > 1 {
        starts.pop();
    }
    starts
}

/// Chi-square of the counts of block weights against `Binomial(L, 1/2)`,
/// with tail cells pooled.
pub fn hamming_weight_blocks(bits: &BitSeq, l: usize) -> Result<f64, StatsError> {
    if l == 0 {
        return Err(StatsError::Domain("block size must be positive".into()));
    }
    let blocks = bits.len() / l;
    if blocks < MIN_WEIGHT_BLOCKS {
        return Err(StatsError::Domain(format!(
            "block size {l} leaves {blocks} blocks, need {MIN_WEIGHT_BLOCKS}"
        )));
    }
    let mut counts = vec![0usize; l + 1];
    for w in bits.block_weights(l) {
        counts[w as usize] += 1;
    }
    weight_chi2(&counts, l)
}

/// Chi-square p-value for a histogram of block weights.
pub fn weight_chi2(counts: &[usize], l: usize) -> Result<f64, StatsError> {
    assert_eq!(counts.len(), l + 1);
    let blocks: usize = counts.iter().sum();
    let probs = binomial_half(l);
    let starts = pooled_cells(&probs, blocks);
    if starts.len() < 2 {
        return Err(StatsError::Domain(format!(
            "{blocks} blocks too few for two cells"
        )));
    }
    let mut chi2 = 0.0;
    for (c, &start) in starts.iter().enumerate() {
        let end = starts.get(c + 1).copied().unwrap_or(l + 1);
        let observed: usize = counts[start..end].iter().sum();
        let expected: f64 = probs[start..end].iter().sum::<f64>() * blocks as f64;
        let diff = observed as f64 - expected;
        chi2 += diff * diff / expected;
    }
    Ok(chi2_sf(chi2, (starts.len() - 1) as f64))
}

/// Lag-one sample correlation of successive block weights,
/// `z = ρ̂·√(B − 1)`, two-sided.
pub fn hamming_correlation(bits: &BitSeq, l: usize) -> Result<f64, StatsError> {
    if l == 0 {
        return Err(StatsError::Domain("block size must be positive".into()));
    }
    let weights = bits.block_weights(l);
    require(weights.len(), MIN_CORRELATION_BLOCKS).map_err(|_| {
        StatsError::Domain(format!(
            "block size {l} leaves {} blocks, need {MIN_CORRELATION_BLOCKS}",
            weights.len()
        ))
    })?;
    weight_correlation(&weights)
}

pub fn weight_correlation(weights: &[u32]) -> Result<f64, StatsError> {
    let b = weights.len();
    let mean = weights.iter().map(|&w| w as f64).sum::<f64>() / b as f64;
    let dev: Vec<f64> = weights.iter().map(|&w| w as f64 - mean).collect();
    let var: f64 = dev.iter().map(|d| d * d).sum();
    if var == 0.0 {
        return Err(StatsError::Undefined("block weights are constant".into()));
    }
    let cov: f64 = dev.windows(2).map(|p| p[0] * p[1]).sum();
    let rho = cov / var;
    Ok(normal_two_sided(rho * ((b - 1) as f64).sqrt()))
}
