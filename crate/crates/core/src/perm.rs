//! Permutations, inversion statistics and the Lehmer-code bijection.
//!
//! Values are 1-indexed (`σ ∈ S_n` is a word over `{1, ..., n}`) even though
//! they are stored in 0-indexed vectors. The Lehmer code used here is the
//! vector `(Ĩ_{<1}(σ), ..., Ĩ_{<n}(σ))` where `Ĩ_{<j}(σ) = 1 + #{i < j : i
//! appears after j in σ}`, so `1 <= code[j] <= j`.

use crate::error::{check_range, Error, Result};

/// A permutation of `{1, ..., n}` in one-line notation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    word: Vec<usize>,
}

impl Permutation {
    /// Validates that `word` is a bijection of `{1, ..., word.len()}`.
    pub fn new(word: Vec<usize>) -> Result<Self> {
        let n = word.len();
        let mut seen = vec![false; n + 1];
        for (pos, &v) in word.iter().enumerate() {
            if v == 0 || v > n {
                return Err(Error::InvalidPermutation(format!(
                    "value {v} at position {} outside 1..={n}",
                    pos + 1
                )));
            }
            if seen[v] {
                return Err(Error::InvalidPermutation(format!("duplicate value {v}")));
            }
            seen[v] = true;
        }
        Ok(Self { word })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            word: (1..=n).collect(),
        }
    }

    /// The reversal `n, n-1, ..., 1` of the identity.
    pub fn reversal(n: usize) -> Self {
        Self {
            word: (1..=n).rev().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.word
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.word
    }

    /// `σ_i` for 1-indexed position `i`.
    pub fn at(&self, i: usize) -> usize {
        self.word[i - 1]
    }

    /// The inverse permutation: `inverse().at(v)` is the position of `v` in `σ`.
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.word.len()];
        for (pos, &v) in self.word.iter().enumerate() {
            inv[v - 1] = pos + 1;
        }
        Self { word: inv }
    }

    /// `σ_n σ_{n-1} ... σ_1`.
    pub fn reverse(&self) -> Self {
        let mut word = self.word.clone();
        word.reverse();
        Self { word }
    }

    /// Number of pairs `i < j` with `σ_j < σ_i`, by merge counting.
    pub fn inversions(&self) -> u64 {
        let mut buf = self.word.clone();
        let mut scratch = vec![0; buf.len()];
        merge_count(&mut buf, &mut scratch)
    }

    /// `I_{n,<j}(σ)`: inversions between `j` and values smaller than `j`.
    pub fn inversions_below(&self, j: usize) -> Result<usize> {
        check_range("j", j, 1, self.len())?;
        let pos_j = self.word.iter().position(|&v| v == j).expect("valid permutation");
        Ok(self.word[pos_j + 1..].iter().filter(|&&v| v < j).count())
    }

    /// All permutations of `{1, ..., n}` in lexicographic order.
    pub fn all(n: usize) -> AllPermutations {
        AllPermutations {
            next: Some((1..=n).collect()),
        }
    }
}

fn merge_count(xs: &mut [usize], scratch: &mut [usize]) -> u64 {
    let n = xs.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (left, right) = xs.split_at_mut(mid);
        let (sl, sr) = scratch.split_at_mut(mid);
        merge_count(left, sl) + merge_count(right, sr)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if xs[i] <= xs[j] {
            scratch[k] = xs[i];
            i += 1;
        } else {
            scratch[k] = xs[j];
            count += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].copy_from_slice(&xs[i..mid]);
    k += mid - i;
    scratch[k..k + n - j].copy_from_slice(&xs[j..n]);
    xs.copy_from_slice(&scratch[..n]);
    count
}

/// Lexicographic iterator over `S_n`.
pub struct AllPermutations {
    next: Option<Vec<usize>>,
}

impl Iterator for AllPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(Permutation { word: current })
    }
}

fn next_permutation(xs: &mut [usize]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

/// Lehmer code `(Ĩ_{<1}, ..., Ĩ_{<n})` with `1 <= code[j] <= j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LehmerCode {
    code: Vec<usize>,
}

impl LehmerCode {
    pub fn new(code: Vec<usize>) -> Result<Self> {
        for (idx, &c) in code.iter().enumerate() {
            let j = idx + 1;
            if c == 0 || c > j {
                return Err(Error::InvalidLehmerCode { index: j, value: c });
            }
        }
        Ok(Self { code })
    }

    pub(crate) fn new_unchecked(code: Vec<usize>) -> Self {
        debug_assert!(code.iter().enumerate().all(|(i, &c)| c >= 1 && c <= i + 1));
        Self { code }
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.code
    }

    /// `Ĩ_{<j}` for 1-indexed `j`.
    pub fn at(&self, j: usize) -> usize {
        self.code[j - 1]
    }

    /// Total inversions of the encoded permutation, `Σ (code[j] - 1)`.
    pub fn inversions(&self) -> u64 {
        self.code.iter().map(|&c| (c - 1) as u64).sum()
    }

    /// Iterates over all `n!` valid codes in mixed-radix order.
    pub fn all(n: usize) -> AllCodes {
        AllCodes {
            next: Some(vec![1; n]),
        }
    }
}

pub struct AllCodes {
    next: Option<Vec<usize>>,
}

impl Iterator for AllCodes {
    type Item = LehmerCode;

    fn next(&mut self) -> Option<LehmerCode> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut idx = succ.len();
        let advanced = loop {
            if idx == 0 {
                break false;
            }
            idx -= 1;
            if succ[idx] < idx + 1 {
                succ[idx] += 1;
                break true;
            }
            succ[idx] = 1;
        };
        if advanced {
            self.next = Some(succ);
        }
        Some(LehmerCode { code: current })
    }
}

/// Fenwick tree over `{1, ..., n}` with order-statistic selection.
struct Fenwick {
    tree: Vec<u32>,
    top: usize,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self {
            tree: vec![0; n + 1],
            top: if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) },
        }
    }

    /// All slots occupied, built in O(n).
    fn full(n: usize) -> Self {
        let mut f = Self::new(n);
        for i in 1..=n {
            f.tree[i] += 1;
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                f.tree[parent] += f.tree[i];
            }
        }
        f
    }

    fn add(&mut self, mut i: usize, delta: i32) {
        while i < self.tree.len() {
            self.tree[i] = (self.tree[i] as i32 + delta) as u32;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, mut i: usize) -> u32 {
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    /// Smallest index whose prefix count reaches `rank` (1-indexed rank).
    fn select(&self, mut rank: u32) -> usize {
        let mut pos = 0;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] < rank {
                pos = next;
                rank -= self.tree[next];
            }
            step >>= 1;
        }
        pos + 1
    }
}

/// Encodes `σ` in O(n log n).
pub fn lehmer_encode(sigma: &Permutation) -> LehmerCode {
    let n = sigma.len();
    let mut code = vec![0; n];
    let mut seen = Fenwick::new(n);
    for &v in sigma.word.iter().rev() {
        code[v - 1] = seen.prefix(v - 1) as usize + 1;
        seen.add(v, 1);
    }
    LehmerCode { code }
}

/// Decodes a Lehmer code in O(n log n).
///
/// Values are placed from `n` down to `1`; value `j` takes the free slot that
/// has exactly `code[j] - 1` free slots to its right, i.e. the
/// `(j - code[j] + 1)`-th free slot from the left.
pub fn lehmer_decode(code: &LehmerCode) -> Permutation {
    let n = code.len();
    let mut word = vec![0; n];
    let mut free = Fenwick::full(n);
    for j in (1..=n).rev() {
        let rank = (j + 1 - code.code[j - 1]) as u32;
        let slot = free.select(rank);
        word[slot - 1] = j;
        free.add(slot, -1);
    }
    Permutation { word }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(w: &[usize]) -> Permutation {
        Permutation::new(w.to_vec()).unwrap()
    }

    fn naive_inversions(p: &Permutation) -> u64 {
        let w = p.as_slice();
        let mut c = 0;
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                if w[j] < w[i] {
                    c += 1;
                }
            }
        }
        c
    }

    // Insertion-based decode: value j is inserted with code[j]-1 smaller
    // values to its right.
    fn naive_decode(code: &[usize]) -> Vec<usize> {
        let mut word: Vec<usize> = Vec::new();
        for (idx, &c) in code.iter().enumerate() {
            let j = idx + 1;
            let at = word.len() - (c - 1);
            word.insert(at, j);
        }
        word
    }

    #[test]
    fn rejects_malformed_words() {
        assert!(Permutation::new(vec![1, 1, 2]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!(Permutation::new(vec![1, 4, 2]).is_err());
        assert!(Permutation::new(vec![]).is_ok());
    }

    #[test]
    fn inversion_examples() {
        for n in 1..=9 {
            assert_eq!(Permutation::identity(n).inversions(), 0);
            assert_eq!(Permutation::reversal(n).inversions(), (n * (n - 1) / 2) as u64);
        }
        let p = perm(&[3, 1, 2]);
        assert_eq!(p.inversions(), 2);
        assert_eq!(naive_inversions(&p), 2);
        let below: usize = (1..=3).map(|j| p.inversions_below(j).unwrap()).sum();
        assert_eq!(below, 2);
    }

    #[test]
    fn inversions_below_examples() {
        let p = perm(&[2, 4, 1, 3]);
        assert_eq!(p.inversions_below(1).unwrap(), 0);
        let rev = Permutation::reversal(7);
        for j in 1..=7 {
            assert_eq!(rev.inversions_below(j).unwrap(), j - 1);
        }
        assert!(p.inversions_below(0).is_err());
        assert!(p.inversions_below(5).is_err());
    }

    #[test]
    fn merge_count_matches_pairs_exhaustively() {
        for n in 0..=7 {
            for p in Permutation::all(n) {
                assert_eq!(p.inversions(), naive_inversions(&p));
            }
        }
    }

    #[test]
    fn lehmer_examples() {
        assert_eq!(lehmer_encode(&Permutation::identity(5)).as_slice(), &[1, 1, 1, 1, 1]);
        assert_eq!(lehmer_encode(&Permutation::reversal(5)).as_slice(), &[1, 2, 3, 4, 5]);
        let id = LehmerCode::new(vec![1; 6]).unwrap();
        assert_eq!(lehmer_decode(&id), Permutation::identity(6));
        let top = LehmerCode::new((1..=6).collect()).unwrap();
        assert_eq!(lehmer_decode(&top), Permutation::reversal(6));
    }

    #[test]
    fn code_rejects_out_of_range() {
        assert_eq!(
            LehmerCode::new(vec![1, 3]),
            Err(Error::InvalidLehmerCode { index: 2, value: 3 })
        );
        assert!(LehmerCode::new(vec![0]).is_err());
    }

    #[test]
    fn decode_matches_insertion_oracle() {
        for n in 1..=6 {
            let mut count = 0;
            for code in LehmerCode::all(n) {
                let fast = lehmer_decode(&code);
                assert_eq!(fast.as_slice(), naive_decode(code.as_slice()).as_slice());
                assert_eq!(lehmer_encode(&fast), code);
                count += 1;
            }
            assert_eq!(count, (1..=n).product::<usize>());
        }
    }

    #[test]
    fn roundtrip_and_reversal_complement() {
        for n in 1..=6 {
            let total = (n * (n - 1) / 2) as u64;
            for p in Permutation::all(n) {
                assert_eq!(lehmer_decode(&lehmer_encode(&p)), p);
                assert_eq!(p.reverse().reverse(), p);
                assert_eq!(p.inversions() + p.reverse().inversions(), total);
                let code = lehmer_encode(&p);
                for j in 1..=n {
                    assert_eq!(code.at(j), p.inversions_below(j).unwrap() + 1);
                }
                assert_eq!(code.inversions(), p.inversions());
            }
        }
    }

    #[test]
    fn all_permutations_count() {
        assert_eq!(Permutation::all(0).count(), 1);
        assert_eq!(Permutation::all(1).count(), 1);
        assert_eq!(Permutation::all(5).count(), 120);
    }

    #[test]
    fn inverse_positions() {
        let p = perm(&[3, 1, 4, 2]);
        let inv = p.inverse();
        for v in 1..=4 {
            assert_eq!(p.at(inv.at(v)), v);
        }
    }
}
