//! Finite discrete distributions on integer labels.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::Serialize;
use statrs::distribution::{Discrete, Poisson};

use crate::error::{Error, Result};

/// Default tolerance on total mass.
pub const MASS_TOL: f64 = 1e-10;

/// Probability vector on a strictly increasing integer support.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscretePMF {
    support: Vec<i64>,
    probs: Vec<f64>,
}

impl DiscretePMF {
    /// Requires total mass within [`MASS_TOL`] of 1.
    pub fn new(support: Vec<i64>, probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(support, probs, MASS_TOL)
    }

    /// As [`DiscretePMF::new`] with a caller-chosen mass tolerance, for
    /// truncated laws that carry a separate tail bound.
    pub fn with_tolerance(support: Vec<i64>, probs: Vec<f64>, tol: f64) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::LengthMismatch {
                left: support.len(),
                right: probs.len(),
            });
        }
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDistribution(
                "support must be strictly increasing".into(),
            ));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution(format!(
                "total mass {total} differs from 1 by more than {tol}"
            )));
        }
        Ok(Self { support, probs })
    }

    /// Consecutive support `offset, offset + 1, ...`.
    pub fn from_dense(offset: i64, probs: Vec<f64>) -> Result<Self> {
        let support = (0..probs.len() as i64).map(|i| offset + i).collect();
        Self::new(support, probs)
    }

    pub fn point_mass(x: i64) -> Self {
        Self {
            support: vec![x],
            probs: vec![1.0],
        }
    }

    pub fn support(&self) -> &[i64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn prob(&self, x: i64) -> f64 {
        self.support
            .binary_search(&x)
            .map(|i| self.probs[i])
            .unwrap_or(0.0)
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: i64) -> f64 {
        let end = self.support.partition_point(|&s| s <= x);
        self.probs[..end].iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(x, p)| x as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.iter().map(|(x, p)| (x as f64 - m).powi(2) * p).sum()
    }

    /// Image under `x ↦ f(x)` for a strictly increasing `f`.
    pub fn map_support(&self, f: impl Fn(i64) -> i64) -> Self {
        Self {
            support: self.support.iter().map(|&x| f(x)).collect(),
            probs: self.probs.clone(),
        }
    }

    /// `support,prob` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("support,prob\n");
        for (x, p) in self.iter() {
            let _ = writeln!(out, "{x},{p:.17e}");
        }
        out
    }
}

/// `(1/2) Σ |p(x) - r(x)|` over the union of the supports.
pub fn tv_distance(p: &DiscretePMF, r: &DiscretePMF) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < p.len() || j < r.len() {
        let ord = match (p.support.get(i), r.support.get(j)) {
            (Some(a), Some(b)) => a.cmp(b),
            (Some(_), None) => Ordering::Less,
            _ => Ordering::Greater,
        };
        match ord {
            Ordering::Less => {
                acc += p.probs[i];
                i += 1;
            }
            Ordering::Greater => {
                acc += r.probs[j];
                j += 1;
            }
            Ordering::Equal => {
                acc += (p.probs[i] - r.probs[j]).abs();
                i += 1;
                j += 1;
            }
        }
    }
    (0.5 * acc).min(1.0)
}

/// Neglected upper-tail mass when truncating a sum of Bernoullis.
const POISSON_BINOMIAL_TAIL: f64 = 1e-15;

/// Smallest `m` beyond which the Chernoff bound
/// `P(S >= m) <= e^{-μ} (eμ/m)^m` drops below `eps`.
fn chernoff_cutoff(mean: f64, count: usize, eps: f64) -> usize {
    let log_eps = eps.ln();
    let start = mean.ceil().max(1.0) as usize;
    (start..=count)
        .find(|&m| {
            let mf = m as f64;
            mf > mean && -mean + mf * (1.0 + mean.ln() - mf.ln()) < log_eps
        })
        .unwrap_or(count)
}

/// Law of a sum of independent Bernoulli(`ps[i]`) variables.
///
/// Dynamic programming over the running count, truncated where the Chernoff
/// upper tail drops below 1e-15, then renormalized.
pub fn poisson_binomial(ps: &[f64]) -> Result<DiscretePMF> {
    check_bernoulli(ps)?;
    let mean: f64 = ps.iter().sum();
    let cap = if mean > 0.0 {
        chernoff_cutoff(mean, ps.len(), POISSON_BINOMIAL_TAIL)
    } else {
        0
    };
    convolve(ps, cap)
}

/// As [`poisson_binomial`] but keeps the full support `{0, ..., ps.len()}`.
pub fn poisson_binomial_full(ps: &[f64]) -> Result<DiscretePMF> {
    check_bernoulli(ps)?;
    convolve(ps, ps.len())
}

fn check_bernoulli(ps: &[f64]) -> Result<()> {
    match ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        Some(p) => Err(Error::InvalidDistribution(format!(
            "Bernoulli parameter {p} outside [0, 1]"
        ))),
        None => Ok(()),
    }
}

fn convolve(ps: &[f64], cap: usize) -> Result<DiscretePMF> {
    let mut dist = vec![0.0; cap + 1];
    dist[0] = 1.0;
    let mut top = 0;
    for &p in ps {
        if top < cap {
            top += 1;
        }
        for m in (1..=top).rev() {
            dist[m] = dist[m] * (1.0 - p) + dist[m - 1] * p;
        }
        dist[0] *= 1.0 - p;
    }
    let total: f64 = dist.iter().sum();
    dist.iter_mut().for_each(|d| *d /= total);
    DiscretePMF::from_dense(0, dist)
}

/// Poisson(`lambda`) on `{0, ..., M}` with `M` chosen so the neglected tail is
/// below `tail`; the tail mass is folded into the last cell.
pub fn poisson_pmf(lambda: f64, tail: f64) -> Result<DiscretePMF> {
    let law = Poisson::new(lambda).map_err(|_| Error::InvalidParameter {
        name: "lambda",
        value: lambda,
        reason: "must be positive and finite",
    })?;
    let mut probs = Vec::new();
    let mut acc = 0.0;
    let mut m = 0u64;
    loop {
        let p = law.pmf(m);
        probs.push(p);
        acc += p;
        if m as f64 > lambda && (1.0 - acc < tail || p < tail * 1e-3) {
            break;
        }
        m += 1;
    }
    if let Some(last) = probs.last_mut() {
        *last += (1.0 - acc).max(0.0);
    }
    DiscretePMF::from_dense(0, probs)
}
