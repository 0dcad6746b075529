//! Parking functions: validity, the car process, the `(σ, τ)` map and
//! exhaustive enumeration.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_range, Error, Result};
use crate::perm::{lehmer_encode, LehmerCode, Permutation};

/// Hard cap for exhaustive enumeration; `9^7 ≈ 4.8M` functions at `n = 8`.
pub const MAX_ENUMERATION_N: usize = 8;

/// A sequence `π ∈ [n]^n` with `|{i : π_i <= j}| >= j` for every `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParkingFunction {
    prefs: Vec<usize>,
}

impl ParkingFunction {
    pub fn new(prefs: Vec<usize>) -> Result<Self> {
        if is_parking(&prefs)? {
            Ok(Self { prefs })
        } else {
            Err(Error::InvalidDistribution(format!(
                "{} is not a parking function",
                format_prefs(&prefs)
            )))
        }
    }

    pub(crate) fn new_unchecked(prefs: Vec<usize>) -> Self {
        debug_assert!(is_parking(&prefs).unwrap_or(false));
        Self { prefs }
    }

    pub fn len(&self) -> usize {
        self.prefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefs.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.prefs
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.prefs
    }

    /// `π_1`.
    pub fn first(&self) -> usize {
        self.prefs[0]
    }

    /// `N_k(π)`, the number of coordinates equal to `k`.
    pub fn count_value(&self, k: usize) -> Result<usize> {
        check_range("k", k, 1, self.len())?;
        Ok(self.prefs.iter().filter(|&&p| p == k).count())
    }
}

impl fmt::Display for ParkingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_prefs(&self.prefs))
    }
}

impl FromStr for ParkingFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(parse_prefs(s)?)
    }
}

/// Comma-separated integers, e.g. `3,1,1`.
pub fn format_prefs(prefs: &[usize]) -> String {
    let parts: Vec<String> = prefs.iter().map(|p| p.to_string()).collect();
    parts.join(",")
}

pub fn parse_prefs(s: &str) -> Result<Vec<usize>> {
    s.trim()
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("invalid entry `{}` in `{s}`", p.trim())))
        })
        .collect()
}

fn check_entries(prefs: &[usize]) -> Result<()> {
    let n = prefs.len();
    for &p in prefs {
        check_range("preference", p, 1, n)?;
    }
    Ok(())
}

/// Counting test: `π` parks iff the prefix counts satisfy `#{π_i <= j} >= j`.
/// O(n), no sorting.
pub fn is_parking(prefs: &[usize]) -> Result<bool> {
    check_entries(prefs)?;
    let n = prefs.len();
    let mut counts = vec![0usize; n + 1];
    for &p in prefs {
        counts[p] += 1;
    }
    let mut cumulative = 0;
    for (j, &c) in counts.iter().enumerate().skip(1) {
        cumulative += c;
        if cumulative < j {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of running the one-way-street car process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CarOutcome {
    /// `spots[i]` is where car `i + 1` parked.
    Parked(Vec<usize>),
    /// 1-indexed number of the first car that could not park.
    Failed { car: usize },
}

impl CarOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, CarOutcome::Parked(_))
    }
}

/// Parks cars one at a time; each car takes the first free spot at or after
/// its preference. Uses a "next free spot" forest, so the run is near O(n).
pub fn simulate_cars(prefs: &[usize]) -> Result<CarOutcome> {
    check_entries(prefs)?;
    let n = prefs.len();
    // next[s] points towards the first free spot >= s; n + 1 is the exit.
    let mut next: Vec<usize> = (0..=n + 1).collect();
    fn find(next: &mut [usize], s: usize) -> usize {
        let mut root = s;
        while next[root] != root {
            root = next[root];
        }
        let mut cur = s;
        while next[cur] != root {
            let up = next[cur];
            next[cur] = root;
            cur = up;
        }
        root
    }
    let mut spots = Vec::with_capacity(n);
    for (car, &p) in prefs.iter().enumerate() {
        let spot = find(&mut next, p);
        if spot > n {
            return Ok(CarOutcome::Failed { car: car + 1 });
        }
        next[spot] = spot + 1;
        spots.push(spot);
    }
    Ok(CarOutcome::Parked(spots))
}

/// `(Ĩ_{<τ_1}(σ), ..., Ĩ_{<τ_n}(σ))`.
pub fn from_pair(sigma: &Permutation, tau: &Permutation) -> Result<ParkingFunction> {
    if sigma.len() != tau.len() {
        return Err(Error::LengthMismatch {
            left: sigma.len(),
            right: tau.len(),
        });
    }
    Ok(from_code(&lehmer_encode(sigma), tau))
}

/// The same map starting from the Lehmer code of `σ`.
pub fn from_code(code: &LehmerCode, tau: &Permutation) -> ParkingFunction {
    debug_assert_eq!(code.len(), tau.len());
    let prefs = tau.as_slice().iter().map(|&t| code.at(t)).collect();
    ParkingFunction::new_unchecked(prefs)
}

/// Lexicographic enumeration of `PF_n`.
///
/// Walks all of `[n]^n` as an odometer, pruning any prefix that can no longer
/// be completed: a prefix of length `m` is viable iff `C(j) + (n - m) >= j`
/// for all `j`, where `C(j)` counts prefix entries `<= j`.
pub struct ParkingFunctions {
    n: usize,
    prefs: Vec<usize>,
    counts: Vec<usize>,
    started: bool,
    done: bool,
}

/// Enumerates `PF_n`, refusing `n > 8`.
pub fn enumerate_parking(n: usize) -> Result<ParkingFunctions> {
    enumerate_parking_with(n, false)
}

/// As [`enumerate_parking`]; `unsafe_large` lifts the `n <= 8` guard.
pub fn enumerate_parking_with(n: usize, unsafe_large: bool) -> Result<ParkingFunctions> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "n",
            value: 0,
            lo: 1,
            hi: MAX_ENUMERATION_N as i64,
        });
    }
    if n > MAX_ENUMERATION_N && !unsafe_large {
        return Err(Error::TooLarge {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    let mut counts = vec![0; n + 1];
    counts[1] = n;
    Ok(ParkingFunctions {
        n,
        prefs: vec![1; n],
        counts,
        started: false,
        done: false,
    })
}

impl ParkingFunctions {
    fn viable(&self, len: usize) -> bool {
        let remaining = self.n - len;
        let mut cumulative = 0;
        for j in 1..=self.n {
            cumulative += self.counts[j];
            if cumulative + remaining < j {
                return false;
            }
        }
        true
    }

    /// Moves to the lexicographic successor. `counts` always mirrors the
    /// entries currently held in `prefs`.
    fn advance(&mut self) -> bool {
        let n = self.n;
        for pos in (0..n).rev() {
            let old = self.prefs[pos];
            self.counts[old] -= 1;
            let v = old + 1;
            if v <= n {
                self.counts[v] += 1;
                // Raising an entry only lowers prefix counts, so if `v` fails
                // every larger value fails too.
                if self.viable(pos + 1) {
                    self.prefs[pos] = v;
                    // Appending 1s keeps a viable prefix viable.
                    self.prefs[pos + 1..].fill(1);
                    self.counts[1] += n - pos - 1;
                    return true;
                }
                self.counts[v] -= 1;
            }
        }
        false
    }
}

impl Iterator for ParkingFunctions {
    type Item = ParkingFunction;

    fn next(&mut self) -> Option<ParkingFunction> {
        if self.done {
            return None;
        }
        if self.started && !self.advance() {
            self.done = true;
            return None;
        }
        self.started = true;
        Some(ParkingFunction::new_unchecked(self.prefs.clone()))
    }
}

/// `|PF_n| = (n + 1)^{n - 1}`.
pub fn parking_count(n: usize) -> u64 {
    if n == 0 {
        return 1;
    }
    (n as u64 + 1).pow(n as u32 - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_sequences(n: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            let mut next = Vec::new();
            for s in &out {
                for v in 1..=n {
                    let mut t = s.clone();
                    t.push(v);
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }

    #[test]
    fn validity_examples() {
        assert!(is_parking(&[1, 1, 1, 1]).unwrap());
        assert!(!is_parking(&[2, 2]).unwrap());
        assert!(is_parking(&[3, 1, 1]).unwrap());
        assert!(is_parking(&[3, 1, 2]).unwrap());
        assert!(is_parking(&[0, 1]).is_err());
        assert!(is_parking(&[1, 3]).is_err());
    }

    #[test]
    fn car_process_examples() {
        assert_eq!(simulate_cars(&[2, 2]).unwrap(), CarOutcome::Failed { car: 2 });
        assert_eq!(simulate_cars(&[3, 1, 2]).unwrap(), CarOutcome::Parked(vec![3, 1, 2]));
        assert_eq!(simulate_cars(&[3, 1, 1]).unwrap(), CarOutcome::Parked(vec![3, 1, 2]));
        assert_eq!(simulate_cars(&[1, 1, 1]).unwrap(), CarOutcome::Parked(vec![1, 2, 3]));
        for p in Permutation::all(5) {
            assert_eq!(
                simulate_cars(p.as_slice()).unwrap(),
                CarOutcome::Parked(p.as_slice().to_vec())
            );
        }
    }

    #[test]
    fn counting_test_agrees_with_car_process() {
        for n in 1..=5 {
            for s in all_sequences(n) {
                assert_eq!(is_parking(&s).unwrap(), simulate_cars(&s).unwrap().is_success(), "{s:?}");
            }
        }
    }

    #[test]
    fn from_pair_examples() {
        let n = 6;
        let id = Permutation::identity(n);
        for tau in Permutation::all(n).step_by(37) {
            assert_eq!(from_pair(&id, &tau).unwrap().as_slice(), &[1; 6]);
        }
        let pf = from_pair(&Permutation::reversal(n), &id).unwrap();
        assert_eq!(pf.as_slice(), &[1, 2, 3, 4, 5, 6]);
        assert!(from_pair(&Permutation::identity(3), &Permutation::identity(4)).is_err());
    }

    #[test]
    fn from_pair_always_parks() {
        let perms: Vec<Permutation> = Permutation::all(4).collect();
        let mut pairs = 0;
        for s in &perms {
            for t in &perms {
                let pf = from_pair(s, t).unwrap();
                assert!(is_parking(pf.as_slice()).unwrap());
                pairs += 1;
            }
        }
        assert_eq!(pairs, 576);
    }

    #[test]
    fn enumeration_counts_and_contents() {
        let one: Vec<_> = enumerate_parking(1).unwrap().map(|p| p.into_vec()).collect();
        assert_eq!(one, vec![vec![1]]);
        let two: Vec<_> = enumerate_parking(2).unwrap().map(|p| p.into_vec()).collect();
        assert_eq!(two, vec![vec![1, 1], vec![1, 2], vec![2, 1]]);
        assert_eq!(enumerate_parking(3).unwrap().count(), 16);
        for n in 1..=5 {
            let listed: Vec<Vec<usize>> = enumerate_parking(n).unwrap().map(|p| p.into_vec()).collect();
            let brute: Vec<Vec<usize>> = all_sequences(n)
                .into_iter()
                .filter(|s| is_parking(s).unwrap())
                .collect();
            assert_eq!(listed, brute);
            assert_eq!(listed.len() as u64, parking_count(n));
        }
    }

    #[test]
    fn enumeration_guard() {
        assert!(matches!(enumerate_parking(9), Err(Error::TooLarge { n: 9, max: 8 })));
        assert!(enumerate_parking(0).is_err());
        assert!(enumerate_parking_with(9, true).is_ok());
    }

    #[test]
    fn closure_under_coordinate_permutation() {
        for n in 1..=4 {
            for pf in enumerate_parking(n).unwrap() {
                for p in Permutation::all(n) {
                    let permuted: Vec<usize> = p.as_slice().iter().map(|&i| pf.as_slice()[i - 1]).collect();
                    assert!(is_parking(&permuted).unwrap());
                }
            }
        }
    }

    #[test]
    fn value_counts() {
        let pf: ParkingFunction = "3,1,1".parse().unwrap();
        assert_eq!(pf.count_value(1).unwrap(), 2);
        assert_eq!(pf.count_value(2).unwrap(), 0);
        assert_eq!(pf.count_value(3).unwrap(), 1);
        assert!(pf.count_value(4).is_err());
        let ones = ParkingFunction::new(vec![1; 7]).unwrap();
        assert_eq!(ones.count_value(1).unwrap(), 7);
        for n in 1..=6 {
            for pf in enumerate_parking(n).unwrap() {
                let total: usize = (1..=n).map(|k| pf.count_value(k).unwrap()).sum();
                assert_eq!(total, n);
                assert!(pf.count_value(1).unwrap() >= 1);
            }
        }
    }

    #[test]
    fn text_format() {
        let pf: ParkingFunction = " 2, 1 ,1".parse().unwrap();
        assert_eq!(pf.to_string(), "2,1,1");
        assert!("2,2".parse::<ParkingFunction>().is_err());
        assert!("a,1".parse::<ParkingFunction>().is_err());
    }
}
