//! Exact rational arithmetic: closed forms at rational `q` and the
//! brute-force induced measure over `S_n × S_n`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{check_range, Error, Result};
use crate::perm::{LehmerCode, Permutation};

/// Largest `n` accepted by [`induced_measure_bruteforce`].
pub const MAX_BRUTEFORCE_N: usize = 6;

/// Parses `3/2`, `0.5` or `2` into a positive rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    let value = if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        BigRational::new(num, den)
    } else if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        BigRational::new(digits, scale)
    } else {
        BigRational::from_integer(s.parse().map_err(|_| bad())?)
    };
    if !value.is_positive() {
        return Err(Error::Parse(format!("`{s}` must be positive")));
    }
    Ok(value)
}

/// `[j]_q = 1 + q + ... + q^{j-1}`.
pub fn q_integer(j: usize, q: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    let mut power = BigRational::one();
    for _ in 0..j {
        acc += &power;
        power *= q;
    }
    acc
}

/// `P(Ĩ_{<j} = i) = q^{i-1} / [j]_q`.
pub fn trunc_geom_pmf(j: usize, i: usize, q: &BigRational) -> BigRational {
    if i == 0 || i > j {
        return BigRational::zero();
    }
    Pow::pow(q, (i - 1) as u32) / q_integer(j, q)
}

/// Exact `P(π_1 = k)`.
pub fn pi1_pmf(n: usize, q: &BigRational, k: usize) -> Result<BigRational> {
    check_range("k", k, 1, n)?;
    let sum = (k..=n).fold(BigRational::zero(), |acc, j| acc + trunc_geom_pmf(j, k, q));
    Ok(sum / BigRational::from_integer(BigInt::from(n)))
}

/// Exact `P(π_1 <= k)` from the closed form
/// `k/n + (1/n) Σ_{j>k} [k]_q / [j]_q`.
pub fn pi1_cdf(n: usize, q: &BigRational, k: usize) -> Result<BigRational> {
    check_range("k", k, 0, n)?;
    let head = q_integer(k, q);
    let tail = (k + 1..=n).fold(BigRational::zero(), |acc, j| acc + &head / q_integer(j, q));
    let nn = BigRational::from_integer(BigInt::from(n));
    Ok((BigRational::from_integer(BigInt::from(k)) + tail) / nn)
}

/// Exact law of `N_k` on `{0, ..., n - k + 1}` via the Bernoulli convolution.
pub fn nk_pmf(n: usize, q: &BigRational, k: usize) -> Result<Vec<BigRational>> {
    check_range("k", k, 1, n)?;
    let mut dist = vec![BigRational::one()];
    for j in k..=n {
        let p = trunc_geom_pmf(j, k, q);
        let miss = BigRational::one() - &p;
        let mut next = vec![BigRational::zero(); dist.len() + 1];
        for (m, d) in dist.iter().enumerate() {
            next[m] += d * &miss;
            next[m + 1] += d * &p;
        }
        dist = next;
    }
    Ok(dist)
}

/// The induced measure on `PF_n` with exact weights.
///
/// Weights are stored as integers over a shared denominator.
#[derive(Clone, Debug)]
pub struct InducedMeasure {
    n: usize,
    q: BigRational,
    weights: BTreeMap<Vec<usize>, BigUint>,
    denominator: BigUint,
}

/// Pushes `Mallows(q) × uniform` on `S_n × S_n` through the parking map.
///
/// With `q = a/b` and `D = n(n-1)/2`, a code with `I` inversions has weight
/// `a^I b^{D-I}` up to a common factor; each of the `n!` choices of `τ` adds
/// that weight to the parking function it produces.
pub fn induced_measure_bruteforce(n: usize, q: &BigRational) -> Result<InducedMeasure> {
    check_range("n", n, 1, usize::MAX)?;
    if n > MAX_BRUTEFORCE_N {
        return Err(Error::TooLarge {
            n,
            max: MAX_BRUTEFORCE_N,
        });
    }
    if !q.is_positive() {
        return Err(Error::Parse("q must be positive".into()));
    }
    let a = q.numer().to_biguint().expect("positive numerator");
    let b = q.denom().to_biguint().expect("positive denominator");
    let max_inv = n * (n - 1) / 2;
    let a_pow: Vec<BigUint> = (0..=max_inv).map(|i| Pow::pow(&a, i as u32)).collect();
    let b_pow: Vec<BigUint> = (0..=max_inv).map(|i| Pow::pow(&b, i as u32)).collect();
    let taus: Vec<Permutation> = Permutation::all(n).collect();

    let mut weights: BTreeMap<Vec<usize>, BigUint> = BTreeMap::new();
    let mut code_total = BigUint::zero();
    for code in LehmerCode::all(n) {
        let inv = code.inversions() as usize;
        let w = &a_pow[inv] * &b_pow[max_inv - inv];
        for tau in &taus {
            let pf: Vec<usize> = tau.as_slice().iter().map(|&t| code.at(t)).collect();
            *weights.entry(pf).or_insert_with(BigUint::zero) += &w;
        }
        code_total += w;
    }
    let denominator = code_total * BigUint::from(taus.len());
    Ok(InducedMeasure {
        n,
        q: q.clone(),
        weights,
        denominator,
    })
}

impl InducedMeasure {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> &BigRational {
        &self.q
    }

    /// Number of parking functions with positive mass.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn ratio(&self, w: &BigUint) -> BigRational {
        BigRational::new(BigInt::from(w.clone()), BigInt::from(self.denominator.clone()))
    }

    pub fn prob(&self, pf: &[usize]) -> BigRational {
        self.weights
            .get(pf)
            .map(|w| self.ratio(w))
            .unwrap_or_else(BigRational::zero)
    }

    /// Parking functions in lexicographic order with their probabilities.
    pub fn iter(&self) -> impl Iterator<Item = (&[usize], BigRational)> + '_ {
        self.weights.iter().map(|(pf, w)| (pf.as_slice(), self.ratio(w)))
    }

    pub fn total_mass(&self) -> BigRational {
        let total = self.weights.values().fold(BigUint::zero(), |acc, w| acc + w);
        self.ratio(&total)
    }

    /// Law of coordinate `i` (1-indexed), indexed by value `1..=n`.
    pub fn coordinate_marginal(&self, i: usize) -> Vec<BigRational> {
        let mut acc = vec![BigUint::zero(); self.n];
        for (pf, w) in &self.weights {
            acc[pf[i - 1] - 1] += w;
        }
        acc.iter().map(|w| self.ratio(w)).collect()
    }

    /// Law of `π_1`, indexed by value `1..=n`.
    pub fn pi1_marginal(&self) -> Vec<BigRational> {
        self.coordinate_marginal(1)
    }

    /// Law of `N_k`, indexed by count `0..=n`.
    pub fn nk_marginal(&self, k: usize) -> Vec<BigRational> {
        let mut acc = vec![BigUint::zero(); self.n + 1];
        for (pf, w) in &self.weights {
            acc[pf.iter().filter(|&&p| p == k).count()] += w;
        }
        acc.iter().map(|w| self.ratio(w)).collect()
    }

    /// True iff every rearrangement of every supported parking function is
    /// supported with the same weight.
    pub fn is_exchangeable(&self) -> bool {
        let mut groups: BTreeMap<Vec<usize>, (usize, &BigUint, bool)> = BTreeMap::new();
        for (pf, w) in &self.weights {
            let mut key = pf.clone();
            key.sort_unstable();
            let entry = groups.entry(key).or_insert((0, w, true));
            entry.0 += 1;
            entry.2 &= entry.1 == w;
        }
        groups.iter().all(|(key, &(count, _, equal))| {
            equal && count as u64 == distinct_arrangements(key)
        })
    }

    /// Probabilities as doubles, in lexicographic order.
    pub fn to_f64(&self) -> Vec<(Vec<usize>, f64)> {
        self.iter()
            .map(|(pf, p)| (pf.to_vec(), p.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }
}

/// Multinomial coefficient `len! / Π (multiplicity)!` for a sorted slice.
fn distinct_arrangements(sorted: &[usize]) -> u64 {
    let fact = |m: usize| (1..=m as u64).product::<u64>();
    let mut denom = 1;
    let mut run = 1;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            denom *= fact(run);
            run = 1;
        }
    }
    denom *= fact(run);
    fact(sorted.len()) / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parsing() {
        assert_eq!(r("3/2"), BigRational::new(3.into(), 2.into()));
        assert_eq!(r("0.5"), BigRational::new(1.into(), 2.into()));
        assert_eq!(r(" 2 "), BigRational::from_integer(2.into()));
        assert_eq!(r("1.25"), BigRational::new(5.into(), 4.into()));
        for bad in ["0", "-1/2", "1/0", "x", "1.", "1.2.3"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn two_by_two_by_hand() {
        let m = induced_measure_bruteforce(2, &r("1")).unwrap();
        assert_eq!(m.prob(&[1, 1]), r("1/2"));
        assert_eq!(m.prob(&[1, 2]), r("1/4"));
        assert_eq!(m.prob(&[2, 1]), r("1/4"));
        assert_eq!(m.len(), 3);
        assert_eq!(m.total_mass(), BigRational::one());
    }

    #[test]
    fn guard() {
        assert!(matches!(
            induced_measure_bruteforce(7, &r("1")),
            Err(Error::TooLarge { n: 7, max: 6 })
        ));
    }

    #[test]
    fn uniform_closed_form() {
        assert_eq!(pi1_pmf(3, &r("1"), 1).unwrap(), r("11/18"));
        assert_eq!(pi1_pmf(3, &r("1"), 2).unwrap(), r("5/18"));
        assert_eq!(pi1_pmf(3, &r("1"), 3).unwrap(), r("1/9"));
    }

    #[test]
    fn marginals_match_closed_forms() {
        let q = r("3/2");
        let m = induced_measure_bruteforce(4, &q).unwrap();
        assert_eq!(m.total_mass(), BigRational::one());
        let marginal = m.pi1_marginal();
        let mut cumulative = BigRational::zero();
        for k in 1..=4 {
            assert_eq!(marginal[k - 1], pi1_pmf(4, &q, k).unwrap());
            cumulative += &marginal[k - 1];
            assert_eq!(cumulative, pi1_cdf(4, &q, k).unwrap());
        }
        for k in 1..=4 {
            let exact = nk_pmf(4, &q, k).unwrap();
            let brute = m.nk_marginal(k);
            for (c, b) in brute.iter().enumerate() {
                let e = exact.get(c).cloned().unwrap_or_else(BigRational::zero);
                assert_eq!(*b, e, "k={k} count={c}");
            }
        }
    }

    #[test]
    fn exchangeable() {
        let m = induced_measure_bruteforce(4, &r("1/2")).unwrap();
        assert!(m.is_exchangeable());
        for i in 2..=4 {
            assert_eq!(m.coordinate_marginal(i), m.pi1_marginal());
        }
    }

    #[test]
    fn arrangements() {
        assert_eq!(distinct_arrangements(&[1, 1, 2]), 3);
        assert_eq!(distinct_arrangements(&[1, 2, 3]), 6);
        assert_eq!(distinct_arrangements(&[1, 1, 1]), 1);
    }
}
