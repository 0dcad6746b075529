//! Goodness-of-fit statistics: empirical laws, Kolmogorov-Smirnov, χ².

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::limit_laws::ContinuousLaw;
use crate::pmf::DiscretePMF;

/// Normalized histogram on the observed support.
pub fn empirical_pmf<T: Copy + Into<i64>>(samples: &[T]) -> Result<DiscretePMF> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let total = samples.len() as f64;
    let (support, probs) = histogram(samples)
        .into_iter()
        .map(|(x, c)| (x, c as f64 / total))
        .unzip();
    DiscretePMF::new(support, probs)
}

/// `sup_x |F_N(x) - F(x)|` against a continuous reference; ties are handled
/// by comparing both sides of each jump.
pub fn ks_distance(samples: &[f64], law: &ContinuousLaw) -> Result<f64> {
    ks_against(samples, |x| law.cdf(x))
}

/// As [`ks_distance`] for any nondecreasing reference CDF.
pub fn ks_against(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        worst = worst.max((j as f64 / n - f).abs()).max((f - i as f64 / n).abs());
        i = j;
    }
    Ok(worst.min(1.0))
}

/// `sup_x |F_emp(x) - F_ref(x)|` for two discrete laws.
pub fn ks_discrete(empirical: &DiscretePMF, reference: &DiscretePMF) -> f64 {
    let mut points: Vec<i64> = empirical
        .support()
        .iter()
        .chain(reference.support())
        .copied()
        .collect();
    points.sort_unstable();
    points.dedup();
    points
        .iter()
        .map(|&x| (empirical.cdf(x) - reference.cdf(x)).abs())
        .fold(0.0, f64::max)
        .min(1.0)
}

/// Pearson χ² result.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Minimum expected count per bin.
pub const MIN_EXPECTED: f64 = 5.0;

/// Pearson χ² of observed integer samples against `reference`.
///
/// Bins follow the reference support; a bin whose expected count is below
/// [`MIN_EXPECTED`] absorbs its right neighbours. The last bin is open to
/// the right and the first open to the left, so every sample is counted.
/// `None` when fewer than two bins survive merging.
pub fn chi_square(counts: &BTreeMap<i64, u64>, reference: &DiscretePMF) -> Option<ChiSquare> {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return None;
    }
    let nf = total as f64;
    // (upper support label, expected) for each closed bin
    let mut bins: Vec<(i64, f64)> = Vec::new();
    let mut pending = 0.0;
    for (x, p) in reference.iter() {
        pending += p * nf;
        if pending >= MIN_EXPECTED {
            bins.push((x, pending));
            pending = 0.0;
        }
    }
    if let Some(last) = bins.last_mut() {
        last.1 += pending;
        last.0 = i64::MAX;
    }
    if bins.len() < 2 {
        return None;
    }
    let mut observed = vec![0u64; bins.len()];
    for (&x, &c) in counts {
        let idx = bins.partition_point(|&(upper, _)| upper < x);
        observed[idx.min(bins.len() - 1)] += c;
    }
    let statistic: f64 = bins
        .iter()
        .zip(&observed)
        .map(|(&(_, e), &o)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = bins.len() - 1;
    let p_value = ChiSquared::new(dof as f64)
        .map(|d| d.sf(statistic))
        .unwrap_or(f64::NAN);
    Some(ChiSquare {
        statistic,
        dof,
        p_value,
    })
}

/// Tallies integer samples.
pub fn histogram<T: Copy + Into<i64>>(samples: &[T]) -> BTreeMap<i64, u64> {
    let mut counts = BTreeMap::new();
    for &s in samples {
        *counts.entry(s.into()).or_insert(0) += 1;
    }
    counts
}
