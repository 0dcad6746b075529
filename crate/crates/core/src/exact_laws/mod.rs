//! Exact finite-`n` laws of `π_1` and `N_k` under the induced measure.
//!
//! All `(1 - q) q^{i-1} / (1 - q^j)` factors go through the stable evaluators
//! in [`crate::mallows`], so `q` arbitrarily close to 1 is safe.

pub mod rational;

use serde::Serialize;

use crate::error::{check_positive, check_range, Error, Result};
use crate::mallows::{geom_ratio_t, log_q, trunc_geom_pmf_t};
use crate::parking::enumerate_parking;
use crate::pmf::{poisson_binomial, DiscretePMF};

pub use rational::{induced_measure_bruteforce, parse_rational, InducedMeasure};

fn check_nq(n: usize, q: f64) -> Result<f64> {
    check_range("n", n, 1, usize::MAX)?;
    check_positive("q", q)?;
    Ok(log_q(q))
}

/// `P(π_1 = k) = (1/n) Σ_{j=k}^n (1 - q) q^{k-1} / (1 - q^j)`.
pub fn pi1_pmf(n: usize, q: f64, k: usize) -> Result<f64> {
    let t = check_nq(n, q)?;
    check_range("k", k, 1, n)?;
    let sum: f64 = (k..=n).map(|j| trunc_geom_pmf_t(j, k, t)).sum();
    Ok(sum / n as f64)
}

/// `P(π_1 = k)` for every `k = 1..=n` in O(n).
///
/// Uses `A_{k-1} = A_k / q + p_{k-1}(k-1)` where `A_k = Σ_{j>=k} p_j(k)`,
/// run downwards for `q >= 1` and upwards for `q < 1` so the dominant terms
/// are never lost to underflow.
pub fn pi1_pmf_table(n: usize, q: f64) -> Result<Vec<f64>> {
    let t = check_nq(n, q)?;
    let mut sums = vec![0.0; n + 1];
    if t >= 0.0 {
        sums[n] = trunc_geom_pmf_t(n, n, t);
        let inv_q = (-t).exp();
        for k in (1..n).rev() {
            sums[k] = sums[k + 1] * inv_q + trunc_geom_pmf_t(k, k, t);
        }
    } else {
        sums[1] = (1..=n).map(|j| trunc_geom_pmf_t(j, 1, t)).sum();
        for k in 2..=n {
            sums[k] = (q * (sums[k - 1] - trunc_geom_pmf_t(k - 1, k - 1, t))).max(0.0);
        }
    }
    let nf = n as f64;
    Ok(sums[1..].iter().map(|s| s / nf).collect())
}

/// `P(π_1 <= k) = k/n + (1/n)(1 - q^k) Σ_{j>k} 1/(1 - q^j)`.
pub fn pi1_cdf(n: usize, q: f64, k: usize) -> Result<f64> {
    let t = check_nq(n, q)?;
    check_range("k", k, 0, n)?;
    if k == 0 {
        return Ok(0.0);
    }
    if k == n {
        return Ok(1.0);
    }
    let tail: f64 = (k + 1..=n).map(|j| geom_ratio_t(k, j, t)).sum();
    Ok(((k as f64 + tail) / n as f64).min(1.0))
}

/// `P(π_1 <= k)` for `k = 0..=n`, from the O(n) PMF table.
pub fn pi1_cdf_table(n: usize, q: f64) -> Result<Vec<f64>> {
    let pmf = pi1_pmf_table(n, q)?;
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for p in pmf {
        acc += p;
        out.push(acc.min(1.0));
    }
    out[n] = 1.0;
    Ok(out)
}

/// `E π_1`; the uniform case is `(n + 3) / 4`.
pub fn pi1_mean(n: usize, q: f64) -> Result<f64> {
    check_nq(n, q)?;
    if q == 1.0 {
        return Ok((n as f64 + 3.0) / 4.0);
    }
    let table = pi1_pmf_table(n, q)?;
    Ok(table
        .iter()
        .enumerate()
        .map(|(i, p)| (i + 1) as f64 * p)
        .sum())
}

/// Bernoulli parameters `p_j = (1 - q) q^{k-1} / (1 - q^j)`, `j = k..=n`, whose
/// independent sum has the law of `N_k`.
pub fn nk_bernoulli_params(n: usize, q: f64, k: usize) -> Result<Vec<f64>> {
    let t = check_nq(n, q)?;
    check_range("k", k, 1, n)?;
    Ok((k..=n).map(|j| trunc_geom_pmf_t(j, k, t).min(1.0)).collect())
}

/// Exact law of `N_k`.
pub fn nk_pmf(n: usize, q: f64, k: usize) -> Result<DiscretePMF> {
    poisson_binomial(&nk_bernoulli_params(n, q, k)?)
}

/// `E e^{-s N_k} = Π_j (1 - p_j (1 - e^{-s}))`.
pub fn nk_laplace(n: usize, q: f64, k: usize, s: f64) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s,
            reason: "must be nonnegative",
        });
    }
    let damp = -(-s).exp_m1();
    Ok(nk_bernoulli_params(n, q, k)?
        .iter()
        .map(|p| 1.0 - p * damp)
        .product())
}

/// Result of comparing `P(π_1 >= k)` under two parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dominance {
    pub holds: bool,
    /// First `k` where the strict inequality fails.
    pub witness: Option<usize>,
}

fn upper_tails(n: usize, q: f64) -> Result<Vec<f64>> {
    let pmf = pi1_pmf_table(n, q)?;
    let mut tails = vec![0.0; n + 2];
    for k in (1..=n).rev() {
        tails[k] = tails[k + 1] + pmf[k - 1];
    }
    Ok(tails)
}

/// Checks `P_{q_lo}(π_1 >= k) < P_{q_hi}(π_1 >= k)` for `k = 2..=n`.
pub fn dominance_check(n: usize, q_lo: f64, q_hi: f64) -> Result<Dominance> {
    check_range("n", n, 2, usize::MAX)?;
    check_positive("q_lo", q_lo)?;
    check_positive("q_hi", q_hi)?;
    if q_lo >= q_hi {
        return Err(Error::InvalidParameter {
            name: "q_lo",
            value: q_lo,
            reason: "must be strictly below q_hi",
        });
    }
    let lo = upper_tails(n, q_lo)?;
    let hi = upper_tails(n, q_hi)?;
    let witness = (2..=n).find(|&k| lo[k] >= hi[k]);
    Ok(Dominance {
        holds: witness.is_none(),
        witness,
    })
}

/// `π_1` tallies over all of `PF_n` (uniform measure), by enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UniformFirstCoordinate {
    /// `counts[k - 1] = #{π ∈ PF_n : π_1 = k}`.
    pub counts: Vec<u64>,
    pub total: u64,
}

impl UniformFirstCoordinate {
    pub fn prob(&self, k: usize) -> f64 {
        self.counts[k - 1] as f64 / self.total as f64
    }
}

pub fn uniform_first_coordinate(n: usize) -> Result<UniformFirstCoordinate> {
    let mut counts = vec![0u64; n];
    let mut total = 0;
    for pf in enumerate_parking(n)? {
        counts[pf.first() - 1] += 1;
        total += 1;
    }
    Ok(UniformFirstCoordinate { counts, total })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_examples() {
        assert!((pi1_pmf(3, 1.0, 1).unwrap() - 11.0 / 18.0).abs() < 1e-15);
        assert!((pi1_pmf(4, 1.0, 4).unwrap() - 1.0 / 16.0).abs() < 1e-15);
        let total: f64 = (1..=5).map(|k| pi1_pmf(5, 0.7, k).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(pi1_pmf(3, 1.0, 0).is_err());
        assert!(pi1_pmf(3, 1.0, 4).is_err());
        assert!(pi1_pmf(3, 0.0, 1).is_err());
    }

    #[test]
    fn table_matches_direct() {
        for &q in &[0.05, 0.5, 0.999_999_999, 1.0, 1.000_000_001, 1.3, 2.0, 7.0] {
            for &n in &[1usize, 2, 7, 60] {
                let table = pi1_pmf_table(n, q).unwrap();
                for k in 1..=n {
                    let direct = pi1_pmf(n, q, k).unwrap();
                    let err = (table[k - 1] - direct).abs();
                    assert!(err <= 1e-11 * direct + 1e-300, "n={n} q={q} k={k}");
                }
            }
        }
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(pi1_cdf(4, 2.0, 0).unwrap(), 0.0);
        assert_eq!(pi1_cdf(4, 2.0, 4).unwrap(), 1.0);
        let two = pi1_pmf(4, 2.0, 1).unwrap() + pi1_pmf(4, 2.0, 2).unwrap();
        assert!((pi1_cdf(4, 2.0, 2).unwrap() - two).abs() < 1e-14);
        assert!((pi1_cdf(3, 1.0, 1).unwrap() - 11.0 / 18.0).abs() < 1e-15);
        for &q in &[0.3, 1.0, 1.0 + 1e-12, 4.0] {
            let table = pi1_cdf_table(40, q).unwrap();
            for (k, &c) in table.iter().enumerate() {
                assert!((pi1_cdf(40, q, k).unwrap() - c).abs() < 1e-12, "q={q} k={k}");
            }
        }
        assert!(pi1_cdf(4, 2.0, 5).is_err());
    }

    #[test]
    fn uniform_cdf_closed_form() {
        let n = 30;
        let harmonic = |m: usize| (1..=m).map(|j| 1.0 / j as f64).sum::<f64>();
        for k in 0..=n {
            let expect = k as f64 / n as f64 * (1.0 + harmonic(n) - harmonic(k));
            assert!((pi1_cdf(n, 1.0, k).unwrap() - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn mean_examples() {
        assert_eq!(pi1_mean(5, 1.0).unwrap(), 2.0);
        for &q in &[0.2, 1.0, 5.0] {
            assert!((pi1_mean(1, q).unwrap() - 1.0).abs() < 1e-15);
        }
        let n = 37;
        let table = pi1_pmf_table(n, 1.0).unwrap();
        let summed: f64 = table.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum();
        assert!((summed - (n as f64 + 3.0) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_pmf_strictly_decreasing() {
        for n in 2..=100 {
            let table = pi1_pmf_table(n, 1.0).unwrap();
            assert!(table.windows(2).all(|w| w[0] > w[1]), "n={n}");
        }
    }

    #[test]
    fn bernoulli_params() {
        let p = nk_bernoulli_params(4, 1.0, 2).unwrap();
        let expect = [0.5, 1.0 / 3.0, 0.25];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        for &q in &[0.2, 1.0, 3.0] {
            assert_eq!(nk_bernoulli_params(6, q, 1).unwrap()[0], 1.0);
        }
        let total: f64 = (1..=5)
            .flat_map(|k| nk_bernoulli_params(5, 0.8, k).unwrap())
            .sum();
        assert!((total - 5.0).abs() < 1e-12);
        assert!(nk_bernoulli_params(5, 0.8, 6).is_err());
    }

    #[test]
    fn expected_count_identity() {
        for &q in &[0.5, 1.0, 2.0] {
            for n in 1..=50 {
                for k in 1..=n {
                    let s: f64 = nk_bernoulli_params(n, q, k).unwrap().iter().sum();
                    let p = pi1_pmf(n, q, k).unwrap();
                    assert!((s - n as f64 * p).abs() < 1e-11, "q={q} n={n} k={k}");
                }
            }
        }
        for k in 1..=5 {
            let law = nk_pmf(5, 1.3, k).unwrap();
            assert!((law.mean() - 5.0 * pi1_pmf(5, 1.3, k).unwrap()).abs() < 1e-10);
        }
        let total: f64 = (1..=20).map(|k| nk_pmf(20, 0.6, k).unwrap().mean()).sum();
        assert!((total - 20.0).abs() < 1e-10);
    }

    #[test]
    fn nk_pmf_edges() {
        let q: f64 = 1.7;
        let n = 6;
        let law = nk_pmf(n, q, n).unwrap();
        let p = (1.0 - q) * q.powi(n as i32 - 1) / (1.0 - q.powi(n as i32));
        assert_eq!(law.support(), &[0, 1]);
        assert!((law.prob(1) - p).abs() < 1e-14);
        assert_eq!(nk_pmf(n, q, 1).unwrap().prob(0), 0.0);
    }

    #[test]
    fn laplace_two_routes() {
        assert_eq!(nk_laplace(4, 1.0, 2, 0.0).unwrap(), 1.0);
        let law = nk_pmf(4, 1.0, 2).unwrap();
        let via_pmf: f64 = law.iter().map(|(m, p)| (-(m as f64)).exp() * p).sum();
        assert!((nk_laplace(4, 1.0, 2, 1.0).unwrap() - via_pmf).abs() < 1e-12);
        let law = nk_pmf(9, 0.6, 3).unwrap();
        assert!((nk_laplace(9, 0.6, 3, 50.0).unwrap() - law.prob(0)).abs() < 1e-15);
        assert!(nk_laplace(4, 1.0, 2, -1.0).is_err());
    }

    #[test]
    fn dominance() {
        assert!(dominance_check(5, 0.5, 2.0).unwrap().holds);
        let d = dominance_check(2, 0.9, 1.1).unwrap();
        assert!(d.holds);
        assert!(pi1_pmf(2, 0.9, 2).unwrap() < pi1_pmf(2, 1.1, 2).unwrap());
        assert!(dominance_check(4, 2.0, 2.0).is_err());
        assert!(dominance_check(1, 0.5, 2.0).is_err());
        let grid = [0.25, 0.5, 1.0, 2.0, 4.0];
        for &n in &[2, 5, 10] {
            for &a in &grid {
                for &b in grid.iter().filter(|&&b| b > a) {
                    assert!(dominance_check(n, a, b).unwrap().holds, "n={n} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn uniform_enumeration_tally() {
        let u = uniform_first_coordinate(3).unwrap();
        assert_eq!(u.total, 16);
        assert_eq!(u.counts, vec![8, 5, 3]);
        assert_eq!(u.counts.iter().sum::<u64>(), u.total);
    }

    #[test]
    fn small_q_head_approaches_geometric() {
        // The gap is O(1/n): about 8e-4 at n = 1e3, below 1e-6 at n = 1e6.
        let table = pi1_pmf_table(1_000_000, 0.5).unwrap();
        for k in 1..=20 {
            let geometric = 0.5f64.powi(k as i32);
            assert!((table[k - 1] - geometric).abs() < 1e-6, "k={k}");
        }
        let coarse = pi1_pmf_table(1000, 0.5).unwrap();
        assert!((coarse[0] - 0.5).abs() > 1e-4);
    }
}
