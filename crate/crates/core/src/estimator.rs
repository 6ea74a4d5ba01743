//! Order-statistic estimator of QFGCPE and percentile bootstrap intervals.
//!
//! For a sorted sample `X₁ ≤ … ≤ Xₙ`
//!
//! ```text
//! Ĉ = Γ(η+1)^{-1} Σ_{k=1}^{n-1} (k/n) (-ln(k/n))^η (X_{k+1} - X_k)
//! ```
//!
//! which is the left-endpoint Riemann sum of the defining integral with the
//! spacing estimate `q̄(v) = n (X_{k+1} - X_k)` of the quantile density.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::sample::Sample;
use crate::special::gamma;

/// Percentile interval from bootstrap replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Point estimate with an optional bootstrap interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub eta: f64,
    pub n: usize,
    pub point: f64,
    pub ci: Option<ConfidenceInterval>,
    pub n_boot: Option<usize>,
    pub seed: Option<u64>,
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("estimator", format!("eta = {eta} must be positive and finite")))
    }
}

fn check_len(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(Error::InvalidSample(format!(
            "the estimator needs at least 2 observations, got {n}"
        )))
    }
}

/// Spacing weights `(k/n)(-ln(k/n))^η / Γ(η+1)` for `k = 1..n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorWeights {
    eta: f64,
    w: Vec<f64>,
}

impl EstimatorWeights {
    pub fn new(n: usize, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        check_len(n)?;
        let g = gamma(eta + 1.0)?;
        let nf = n as f64;
        let w = (1..n)
            .map(|k| {
                let p = k as f64 / nf;
                p * (-p.ln()).powf(eta) / g
            })
            .collect();
        Ok(Self { eta, w })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Sample size these weights belong to.
    pub fn n(&self) -> usize {
        self.w.len() + 1
    }

    /// The estimate for a sorted slice of length [`EstimatorWeights::n`].
    pub fn apply(&self, sorted: &[f64]) -> f64 {
        debug_assert_eq!(sorted.len(), self.n());
        self.w
            .iter()
            .zip(sorted.windows(2))
            .map(|(w, x)| w * (x[1] - x[0]))
            .sum()
    }

    /// The estimate for the sorted sample in which `sorted[j]` occurs
    /// `counts[j]` times (`Σ counts = n`).
    ///
    /// Equal to [`EstimatorWeights::apply`] on the expanded sample, bit for
    /// bit: only the spacings between distinct groups are nonzero.
    pub fn apply_counts(&self, sorted: &[f64], counts: &[u32]) -> f64 {
        let mut sum = 0.0;
        let mut pos = 0usize;
        let mut last: Option<f64> = None;
        for (x, &c) in sorted.iter().zip(counts) {
            if c == 0 {
                continue;
            }
            if let Some(prev) = last {
                // The spacing between the last copy of `prev` (1-based index
                // `pos`) and the first copy of `x`.
                sum += self.w[pos - 1] * (x - prev);
            }
            pos += c as usize;
            last = Some(*x);
        }
        sum
    }
}

/// QFGCPE estimate from a sample.
pub fn estimate(sample: &Sample, eta: f64) -> Result<f64> {
    let w = EstimatorWeights::new(sample.len(), eta)?;
    Ok(w.apply(sample.values()))
}

/// Spacing estimate `n (X_k - X_{k-1})` of the quantile density at `v`,
/// with `k = ⌈n v⌉`; on the first bucket `v ≤ 1/n` the second spacing
/// `n (X₂ - X₁)` is used.
pub fn empirical_qdf(sample: &Sample, v: f64) -> Result<f64> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::domain("empirical_qdf", format!("v = {v} is outside (0, 1)")));
    }
    let n = sample.len();
    check_len(n)?;
    let k = ((v * n as f64).ceil() as usize).clamp(2, n);
    let x = sample.values();
    Ok(n as f64 * (x[k - 1] - x[k - 2]))
}

/// Linear-interpolation (type 7) quantile of sorted data.
pub fn type7_quantile(sorted: &[f64], p: f64) -> f64 {
    let m = sorted.len();
    if m == 1 {
        return sorted[0];
    }
    let h = (m - 1) as f64 * p;
    let lo = (h.floor() as usize).min(m - 1);
    let hi = (lo + 1).min(m - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn check_bootstrap(level: f64, b: usize) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("level = {level} must lie in (0, 1)")));
    }
    if b < 2 {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs at least 2 replicates, got {b}"
        )));
    }
    Ok(())
}

/// One bootstrap replicate: `n` indices drawn with replacement, tallied.
fn replicate(weights: &EstimatorWeights, sorted: &[f64], rng: &mut rng::StreamRng, counts: &mut [u32]) -> f64 {
    counts.iter_mut().for_each(|c| *c = 0);
    let n = sorted.len();
    for _ in 0..n {
        counts[rng.gen_range(0..n)] += 1;
    }
    weights.apply_counts(sorted, counts)
}

/// `b` bootstrap re-estimates of a sorted sample, in replicate order.
///
/// Replicate `r` draws its indices from stream `r` of the `(seed, Bootstrap)`
/// keystream via `gen_range(0..n)`, so the output does not depend on how the
/// work is scheduled.
pub fn bootstrap_replicates(
    weights: &EstimatorWeights,
    sorted: &[f64],
    b: usize,
    seed: u64,
    parallel: bool,
) -> Vec<f64> {
    let one = |r: usize, counts: &mut Vec<u32>| {
        let mut rng = rng::stream(seed, Purpose::Bootstrap, r as u64);
        replicate(weights, sorted, &mut rng, counts)
    };
    if parallel {
        (0..b)
            .into_par_iter()
            .map_init(|| vec![0u32; sorted.len()], |counts, r| one(r, counts))
            .collect()
    } else {
        let mut counts = vec![0u32; sorted.len()];
        (0..b).map(|r| one(r, &mut counts)).collect()
    }
}

/// Percentile interval `(α/2, 1 - α/2)` of the replicates, `α = 1 - level`.
pub fn percentile_interval(mut replicates: Vec<f64>, level: f64) -> ConfidenceInterval {
    replicates.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    ConfidenceInterval {
        lower: type7_quantile(&replicates, alpha / 2.0),
        upper: type7_quantile(&replicates, 1.0 - alpha / 2.0),
        level,
    }
}

pub(crate) fn bootstrap_interval(
    weights: &EstimatorWeights,
    sorted: &[f64],
    level: f64,
    b: usize,
    seed: u64,
    parallel: bool,
) -> ConfidenceInterval {
    percentile_interval(bootstrap_replicates(weights, sorted, b, seed, parallel), level)
}

/// Point estimate plus a percentile bootstrap interval from `b` resamples.
pub fn bootstrap_ci(sample: &Sample, eta: f64, level: f64, b: usize, seed: u64) -> Result<EstimateResult> {
    check_bootstrap(level, b)?;
    let weights = EstimatorWeights::new(sample.len(), eta)?;
    let point = weights.apply(sample.values());
    let ci = bootstrap_interval(&weights, sample.values(), level, b, seed, true);
    Ok(EstimateResult {
        eta,
        n: sample.len(),
        point,
        ci: Some(ci),
        n_boot: Some(b),
        seed: Some(seed),
    })
}

/// Checks `level ∈ (0, 1)` and `b ≥ 2` without computing anything.
pub fn validate_bootstrap(level: f64, b: usize) -> Result<()> {
    check_bootstrap(level, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> Sample {
        Sample::from_values(v.to_vec()).unwrap()
    }

    #[test]
    fn hand_values() {
        assert_eq!(estimate(&s(&[3.0; 7]), 0.5).unwrap(), 0.0);
        let two = estimate(&s(&[0.0, 1.0]), 1.0).unwrap();
        assert!((two - 0.5 * std::f64::consts::LN_2).abs() < 1e-15);
        assert!(estimate(&s(&[1.0]), 1.0).is_err());
        assert!(estimate(&s(&[1.0, 2.0]), 0.0).is_err());
    }

    #[test]
    fn empirical_qdf_values() {
        assert_eq!(empirical_qdf(&s(&[1.0, 2.0, 3.0]), 0.5).unwrap(), 3.0);
        assert_eq!(empirical_qdf(&s(&[2.0; 4]), 0.3).unwrap(), 0.0);
        let n = 50;
        let grid: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
        for v in [0.001, 0.2, 0.77, 0.999] {
            assert!((empirical_qdf(&s(&grid), v).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(empirical_qdf(&s(&grid), 1.0).is_err());
        // First bucket borrows the second spacing.
        assert_eq!(empirical_qdf(&s(&[0.0, 1.0, 5.0]), 0.1).unwrap(), 3.0);
    }

    #[test]
    fn type7() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(type7_quantile(&x, 0.0), 1.0);
        assert_eq!(type7_quantile(&x, 1.0), 4.0);
        assert_eq!(type7_quantile(&x, 0.5), 2.5);
        assert!((type7_quantile(&x, 0.025) - 1.075).abs() < 1e-15);
    }

    #[test]
    fn counts_match_sorted_resample() {
        let data = s(&[0.3, 0.1, 0.9, 0.4, 0.4, 2.0, 1.1]);
        let w = EstimatorWeights::new(data.len(), 0.75).unwrap();
        let mut rng = rng::stream(5, Purpose::Bootstrap, 0);
        for _ in 0..200 {
            let n = data.len();
            let idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let mut counts = vec![0u32; n];
            let mut expanded: Vec<f64> = idx.iter().map(|&i| data.values()[i]).collect();
            idx.iter().for_each(|&i| counts[i] += 1);
            expanded.sort_by(f64::total_cmp);
            assert_eq!(w.apply(&expanded).to_bits(), w.apply_counts(data.values(), &counts).to_bits());
        }
    }

    #[test]
    fn bootstrap_is_reproducible_and_ordered() {
        let data = s(&(1..=40).map(|k| (k as f64).sqrt()).collect::<Vec<_>>());
        let a = bootstrap_ci(&data, 0.5, 0.9, 200, 11).unwrap();
        let b = bootstrap_ci(&data, 0.5, 0.9, 200, 11).unwrap();
        assert_eq!(a, b);
        let ci = a.ci.unwrap();
        assert!(ci.lower <= ci.upper);
        let w = EstimatorWeights::new(data.len(), 0.5).unwrap();
        assert_eq!(
            bootstrap_replicates(&w, data.values(), 64, 3, true),
            bootstrap_replicates(&w, data.values(), 64, 3, false)
        );
        let flat = bootstrap_ci(&s(&[1.5; 10]), 0.5, 0.95, 50, 1).unwrap().ci.unwrap();
        assert_eq!((flat.lower, flat.upper), (0.0, 0.0));
        assert!(bootstrap_ci(&data, 0.5, 1.0, 50, 1).is_err());
        assert!(bootstrap_ci(&data, 0.5, 0.95, 1, 1).is_err());
    }
}
