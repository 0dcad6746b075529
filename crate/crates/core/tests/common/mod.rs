//! Independent oracles for integration tests.
//!
//! Everything here is computed the slow, direct way: inversions by pair
//! counting, Mallows weights by explicit powers, the induced measure by
//! pushing every `(σ, τ)` pair through the parking map.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use parkfn::{from_pair, Permutation};

pub fn inversions_by_pairs(word: &[usize]) -> u64 {
    let mut count = 0;
    for i in 0..word.len() {
        for j in i + 1..word.len() {
            if word[i] > word[j] {
                count += 1;
            }
        }
    }
    count
}

pub fn rational_pow(q: &BigRational, e: u64) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * q)
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Mallows weights `q^{I(σ)} / Σ q^{I}` over `S_n`, keyed by one-line word.
pub fn mallows_law(n: usize, q: f64) -> BTreeMap<Vec<usize>, f64> {
    let raw: Vec<(Vec<usize>, f64)> = Permutation::all(n)
        .map(|s| {
            let w = q.powi(inversions_by_pairs(s.as_slice()) as i32);
            (s.into_vec(), w)
        })
        .collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    raw.into_iter().map(|(s, w)| (s, w / total)).collect()
}

/// The induced measure on `PF_n`, pushed forward pair by pair.
pub fn induced_measure(n: usize, q: &BigRational) -> BTreeMap<Vec<usize>, BigRational> {
    let perms: Vec<Permutation> = Permutation::all(n).collect();
    let weights: Vec<BigRational> = perms
        .iter()
        .map(|s| rational_pow(q, inversions_by_pairs(s.as_slice())))
        .collect();
    let z = weights.iter().fold(BigRational::zero(), |a, w| a + w);
    let norm = z * BigRational::from_integer(BigInt::from(perms.len()));
    let mut out: BTreeMap<Vec<usize>, BigRational> = BTreeMap::new();
    for (sigma, w) in perms.iter().zip(&weights) {
        for tau in &perms {
            let pf = from_pair(sigma, tau).expect("same length").into_vec();
            *out.entry(pf).or_insert_with(BigRational::zero) += w;
        }
    }
    for p in out.values_mut() {
        *p /= &norm;
    }
    out
}

/// `P(π_1 = k)` for `k = 1..=n` read off a measure.
pub fn first_marginal(measure: &BTreeMap<Vec<usize>, BigRational>, n: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); n];
    for (pf, p) in measure {
        out[pf[0] - 1] += p;
    }
    out
}

/// `P(N_k = m)` for `m = 0..=n` read off a measure.
pub fn count_marginal(measure: &BTreeMap<Vec<usize>, BigRational>, n: usize, k: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); n + 1];
    for (pf, p) in measure {
        out[pf.iter().filter(|&&v| v == k).count()] += p;
    }
    out
}

/// `P(π_1 = k)` by summing truncated-geometric masses with explicit powers.
pub fn first_pmf_naive(n: usize, q: f64, k: usize) -> f64 {
    let mass = |j: usize| {
        let z: f64 = (0..j).map(|i| q.powi(i as i32)).sum();
        q.powi(k as i32 - 1) / z
    };
    (k..=n).map(mass).sum::<f64>() / n as f64
}

/// Law of a sum of independent Bernoullis by the textbook recursion.
pub fn bernoulli_sum(ps: &[f64]) -> Vec<f64> {
    let mut dist = vec![1.0];
    for &p in ps {
        let mut next = vec![0.0; dist.len() + 1];
        for (m, d) in dist.iter().enumerate() {
            next[m] += d * (1.0 - p);
            next[m + 1] += d * p;
        }
        dist = next;
    }
    dist
}

pub fn tv_dense(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..len).map(|i| (at(a, i) - at(b, i)).abs()).sum::<f64>()
}
