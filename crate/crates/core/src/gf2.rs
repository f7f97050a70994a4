//! Bit matrices over GF(2) and the index sets that select their rows.
//!
//! Rows are packed into one `u64` each, with column `j` (1-based) stored in
//! bit `j - 1`. Index sets are 1-based row numbers, matching the way the
//! error analysis numbers the rows of a scrambling matrix.

use std::fmt;

use crate::error::{Error, Result};

/// Dense GF(2) matrix with at most 64 columns.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: Vec<u64>,
    n_cols: usize,
}

#[inline]
fn col_mask(n_cols: usize) -> u64 {
    if n_cols >= 64 {
        u64::MAX
    } else {
        (1u64 << n_cols) - 1
    }
}

impl BitMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Result<Self> {
        if n_cols > 64 {
            return Err(Error::TooManyColumns(n_cols));
        }
        Ok(Self {
            rows: vec![0; n_rows],
            n_cols,
        })
    }

    /// Builds a matrix from packed rows. Bits at or above `n_cols` must be clear.
    pub fn from_rows(rows: Vec<u64>, n_cols: usize) -> Result<Self> {
        if n_cols > 64 {
            return Err(Error::TooManyColumns(n_cols));
        }
        let mask = col_mask(n_cols);
        if let Some(i) = rows.iter().position(|r| r & !mask != 0) {
            return Err(Error::Precondition(format!(
                "row {} has bits beyond column {n_cols}",
                i + 1
            )));
        }
        Ok(Self { rows, n_cols })
    }

    /// Parses rows written as `'0'`/`'1'` strings, column 1 first.
    pub fn parse(rows: &[&str]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut packed = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_cols {
                return Err(Error::Precondition(format!(
                    "row {} has {} columns, expected {n_cols}",
                    i + 1,
                    r.len()
                )));
            }
            let mut word = 0u64;
            for (j, c) in r.bytes().enumerate() {
                match c {
                    b'0' => {}
                    b'1' => word |= 1 << j,
                    _ => {
                        return Err(Error::Precondition(format!(
                            "invalid bit character {:?}",
                            c as char
                        )))
                    }
                }
            }
            packed.push(word);
        }
        Self::from_rows(packed, n_cols)
    }

    pub fn identity(m: usize) -> Result<Self> {
        let rows = (0..m).map(|k| 1u64 << k).collect();
        Self::from_rows(rows, m)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Packed row, 0-based.
    pub fn row(&self, i: usize) -> u64 {
        self.rows[i]
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// Entry at 0-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> bool {
        (self.rows[row] >> col) & 1 == 1
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        assert!(col < self.n_cols, "column {col} out of range");
        if value {
            self.rows[row] |= 1 << col;
        } else {
            self.rows[row] &= !(1 << col);
        }
    }

    /// Bitmask of column `col` (0-based): bit `i` is entry `(i, col)`.
    /// Only meaningful for matrices with at most 64 rows.
    pub fn column(&self, col: usize) -> u64 {
        debug_assert!(self.rows.len() <= 64);
        self.rows
            .iter()
            .enumerate()
            .fold(0, |acc, (i, r)| acc | (((r >> col) & 1) << i))
    }

    /// GF(2) rank by row reduction.
    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for col in 0..self.n_cols {
            let bit = 1u64 << col;
            let Some(p) = (rank..rows.len()).find(|&i| rows[i] & bit != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank];
            for (i, r) in rows.iter_mut().enumerate() {
                if i != rank && *r & bit != 0 {
                    *r ^= pivot;
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn is_nonsingular(&self) -> bool {
        self.n_rows() == self.n_cols && self.rank() == self.n_cols
    }

    /// GF(2) sum of the rows named by `set` (1-based).
    pub fn xor_rows(&self, set: &IndexSet) -> Result<u64> {
        let top = set.max() as usize;
        if top > self.rows.len() {
            return Err(Error::IndexOutOfRange {
                index: top,
                rows: self.rows.len(),
            });
        }
        Ok(set
            .elements()
            .iter()
            .fold(0, |acc, &l| acc ^ self.rows[l as usize - 1]))
    }

    /// Matrix product `self * rhs` over GF(2).
    pub fn mul(&self, rhs: &BitMatrix) -> Result<BitMatrix> {
        if self.n_cols != rhs.n_rows() {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                got: rhs.n_rows(),
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|&r| {
                let mut acc = 0u64;
                let mut bits = r;
                while bits != 0 {
                    acc ^= rhs.rows[bits.trailing_zeros() as usize];
                    bits &= bits - 1;
                }
                acc
            })
            .collect();
        BitMatrix::from_rows(rows, rhs.n_cols)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.n_rows(), self.n_cols)?;
        for r in &self.rows {
            let s: String = (0..self.n_cols)
                .map(|j| if (r >> j) & 1 == 1 { '1' } else { '0' })
                .collect();
            writeln!(f, "  {s}")?;
        }
        write!(f, "]")
    }
}

pub fn rank(mat: &BitMatrix) -> usize {
    mat.rank()
}

pub fn xor_rows(mat: &BitMatrix, set: &IndexSet) -> Result<u64> {
    mat.xor_rows(set)
}

/// Finite nonempty set of positive integers, kept strictly increasing.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(Vec<u32>);

impl IndexSet {
    /// Accepts elements in any order; rejects duplicates, zero and the empty set.
    pub fn new(mut elements: Vec<u32>) -> Result<Self> {
        elements.sort_unstable();
        if elements.is_empty() {
            return Err(Error::Precondition("index set must be nonempty".into()));
        }
        if elements[0] == 0 {
            return Err(Error::Precondition("index set elements start at 1".into()));
        }
        if elements.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition(
                "index set elements must be distinct".into(),
            ));
        }
        Ok(Self(elements))
    }

    pub fn singleton(l: u32) -> Self {
        assert!(l >= 1);
        Self(vec![l])
    }

    /// `L_k`: the 1-based positions of the set bits of `k >= 1`.
    pub fn from_walsh_index(k: u64) -> Option<Self> {
        if k == 0 {
            return None;
        }
        let mut out = Vec::with_capacity(k.count_ones() as usize);
        let mut bits = k;
        while bits != 0 {
            out.push(bits.trailing_zeros() + 1);
            bits &= bits - 1;
        }
        Some(Self(out))
    }

    /// `k_L = sum 2^(l-1)`; `None` when an element exceeds 64.
    pub fn walsh_index(&self) -> Option<u64> {
        if self.max() > 64 {
            return None;
        }
        Some(self.0.iter().fold(0u64, |acc, &l| acc | 1 << (l - 1)))
    }

    pub fn elements(&self) -> &[u32] {
        &self.0
    }

    pub fn norm(&self) -> u64 {
        self.0.iter().map(|&l| l as u64).sum()
    }

    pub fn card(&self) -> usize {
        self.0.len()
    }

    pub fn max(&self) -> u32 {
        *self.0.last().expect("index sets are nonempty")
    }

    /// The `j`-th largest element, `1 <= j <= card()`.
    pub fn largest(&self, j: usize) -> u32 {
        assert!(
            j >= 1 && j <= self.0.len(),
            "largest({j}) of a {}-set",
            self.0.len()
        );
        self.0[self.0.len() - j]
    }

    /// Sum of the `u` largest elements.
    pub fn top_norm(&self, u: usize) -> u64 {
        assert!(u <= self.0.len());
        self.0.iter().rev().take(u).map(|&l| l as u64).sum()
    }

    pub fn contains(&self, l: u32) -> bool {
        self.0.binary_search(&l).is_ok()
    }

    pub fn is_within(&self, m: u32) -> bool {
        self.max() <= m
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut v: Vec<u32> = self.0.iter().chain(&other.0).copied().collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }

    /// `None` when the two sets are equal.
    pub fn symmetric_difference(&self, other: &IndexSet) -> Option<IndexSet> {
        let v: Vec<u32> = self
            .union(other)
            .0
            .into_iter()
            .filter(|l| self.contains(*l) != other.contains(*l))
            .collect();
        (!v.is_empty()).then_some(IndexSet(v))
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Every index set of norm `n`, i.e. every partition of `n` into distinct
/// parts. Order: lexicographic on the decreasing part list.
pub struct IndexSets {
    n: u64,
    // parts in decreasing order
    parts: Vec<u64>,
    started: bool,
}

pub fn enumerate_index_sets(n: u64) -> IndexSets {
    assert!(n >= 1, "index sets have norm at least 1");
    IndexSets {
        n,
        parts: Vec::new(),
        started: false,
    }
}

// Appends the lexicographically smallest run of distinct parts below `max_part`
// summing to `remaining`. Callers guarantee `remaining <= max_part*(max_part+1)/2`.
fn fill_smallest(parts: &mut Vec<u64>, mut remaining: u64, mut max_part: u64) {
    while remaining > 0 {
        // smallest p with p(p+1)/2 >= remaining
        let mut p = ((((8 * remaining + 1) as f64).sqrt() - 1.0) / 2.0).floor() as u64;
        while p * (p + 1) / 2 < remaining {
            p += 1;
        }
        while p > 1 && (p - 1) * p / 2 >= remaining {
            p -= 1;
        }
        debug_assert!(p <= max_part && p <= remaining);
        parts.push(p);
        remaining -= p;
        max_part = p - 1;
    }
}

impl Iterator for IndexSets {
    type Item = IndexSet;

    fn next(&mut self) -> Option<IndexSet> {
        if !self.started {
            self.started = true;
            fill_smallest(&mut self.parts, self.n, self.n);
        } else {
            let mut remaining = 0;
            loop {
                let p = self.parts.pop()?;
                remaining += p;
                let max_part = self.parts.last().map_or(self.n, |&q| q - 1);
                let next = p + 1;
                if next <= max_part && next <= remaining {
                    self.parts.push(next);
                    fill_smallest(&mut self.parts, remaining - next, next - 1);
                    break;
                }
            }
        }
        let mut v: Vec<u32> = self.parts.iter().map(|&p| p as u32).collect();
        v.reverse();
        Some(IndexSet(v))
    }
}

/// Smallest `N <= n_max` admitting an index set of norm `N` whose rows XOR to
/// zero, with the first such set in enumeration order.
///
/// Candidates are scanned by increasing norm, since rows are weighted by
/// their index rather than by count.
pub fn min_dependent_norm(mat: &BitMatrix, n_max: u64) -> Result<Option<(u64, IndexSet)>> {
    if n_max == 0 {
        return Err(Error::Precondition("n_max must be at least 1".into()));
    }
    if (mat.n_rows() as u64) < n_max {
        return Err(Error::Precondition(format!(
            "sets of norm up to {n_max} need {n_max} rows, matrix has {}",
            mat.n_rows()
        )));
    }
    for n in 1..=n_max {
        for set in enumerate_index_sets(n) {
            if mat.xor_rows(&set)? == 0 {
                return Ok(Some((n, set)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[u32]) -> IndexSet {
        IndexSet::new(v.to_vec()).unwrap()
    }

    // Brute force over subsets of {1..n}.
    fn brute_sets(n: u64) -> Vec<IndexSet> {
        let mut out = Vec::new();
        for mask in 1u64..(1 << n) {
            let elems: Vec<u32> = (0..n as u32)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| b + 1)
                .collect();
            let s = IndexSet(elems);
            if s.norm() == n {
                out.push(s);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn rank_examples() {
        assert_eq!(BitMatrix::identity(3).unwrap().rank(), 3);
        assert_eq!(BitMatrix::zeros(2, 2).unwrap().rank(), 0);
        let m = BitMatrix::parse(&["110", "011", "101"]).unwrap();
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn rejects_wide_and_dirty_rows() {
        assert!(matches!(
            BitMatrix::zeros(1, 65),
            Err(Error::TooManyColumns(65))
        ));
        assert!(BitMatrix::from_rows(vec![0b100], 2).is_err());
    }

    #[test]
    fn xor_rows_examples() {
        let m = BitMatrix::parse(&["110", "011", "101"]).unwrap();
        assert_eq!(m.xor_rows(&set(&[2])).unwrap(), m.row(1));
        let dup = BitMatrix::parse(&["101", "101"]).unwrap();
        assert_eq!(dup.xor_rows(&set(&[1, 2])).unwrap(), 0);
        assert!(matches!(
            m.xor_rows(&set(&[4])),
            Err(Error::IndexOutOfRange { index: 4, rows: 3 })
        ));
    }

    #[test]
    fn enumeration_examples() {
        let one: Vec<_> = enumerate_index_sets(1).collect();
        assert_eq!(one, vec![set(&[1])]);
        let five: Vec<_> = enumerate_index_sets(5).collect();
        assert_eq!(five, vec![set(&[2, 3]), set(&[1, 4]), set(&[5])]);
        let three: Vec<_> = enumerate_index_sets(3).collect();
        assert_eq!(three, vec![set(&[1, 2]), set(&[3])]);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for n in 1..=18 {
            let mut got: Vec<_> = enumerate_index_sets(n).collect();
            got.sort();
            assert_eq!(got, brute_sets(n), "n = {n}");
        }
    }

    #[test]
    fn index_set_accessors() {
        let s = set(&[7, 2, 4]);
        assert_eq!(s.elements(), &[2, 4, 7]);
        assert_eq!(s.norm(), 13);
        assert_eq!(s.card(), 3);
        assert_eq!(s.largest(1), 7);
        assert_eq!(s.largest(3), 2);
        assert_eq!(s.top_norm(2), 11);
        assert_eq!(s.walsh_index(), Some(0b1001010));
        assert_eq!(IndexSet::from_walsh_index(0b1001010), Some(s));
        assert!(IndexSet::new(vec![]).is_err());
        assert!(IndexSet::new(vec![0, 1]).is_err());
        assert!(IndexSet::new(vec![3, 3]).is_err());
    }

    #[test]
    fn min_dependent_identity_extended() {
        for m in 1..=6usize {
            let mut rows: Vec<u64> = (0..m).map(|k| 1 << k).collect();
            rows.push(0);
            let mat = BitMatrix::from_rows(rows, m).unwrap();
            let (n, w) = min_dependent_norm(&mat, m as u64 + 1).unwrap().unwrap();
            assert_eq!(n, m as u64 + 1);
            assert_eq!(w, set(&[m as u32 + 1]));
        }
    }

    #[test]
    fn min_dependent_asm() {
        // rows k: ones in columns 1..=min(k, 3)
        let rows: Vec<u64> = (1..=8u32).map(|k| (1u64 << k.min(3)) - 1).collect();
        let mat = BitMatrix::from_rows(rows, 3).unwrap();
        assert_eq!(
            min_dependent_norm(&mat, 8).unwrap(),
            Some((7, set(&[3, 4])))
        );
        let short = BitMatrix::from_rows(vec![1, 3, 7], 3).unwrap();
        assert!(min_dependent_norm(&short, 10).is_err());
    }

    #[test]
    fn nonsingular_square_has_no_dependent_set() {
        let mat = BitMatrix::parse(&["1000", "1100", "0110", "1011"]).unwrap();
        assert!(mat.is_nonsingular());
        assert_eq!(min_dependent_norm(&mat, 4).unwrap(), None);
    }

    fn lower_unit(m: usize, fill: &[u64]) -> BitMatrix {
        let rows = (0..m)
            .map(|k| (1u64 << k) | (fill[k] & ((1u64 << k) - 1)))
            .collect();
        BitMatrix::from_rows(rows, m).unwrap()
    }

    proptest! {
        #[test]
        fn xor_of_symmetric_difference(rows in prop::collection::vec(0u64..256, 10),
                                       a in prop::collection::btree_set(1u32..=10, 1..6),
                                       b in prop::collection::btree_set(1u32..=10, 1..6)) {
            let mat = BitMatrix::from_rows(rows, 8).unwrap();
            let la = IndexSet::new(a.into_iter().collect()).unwrap();
            let lb = IndexSet::new(b.into_iter().collect()).unwrap();
            let lhs = match la.symmetric_difference(&lb) {
                Some(d) => mat.xor_rows(&d).unwrap(),
                None => 0,
            };
            prop_assert_eq!(lhs, mat.xor_rows(&la).unwrap() ^ mat.xor_rows(&lb).unwrap());
        }

        #[test]
        fn nonsingular_has_no_zero_subset(m in 1usize..=12, fill in prop::collection::vec(any::<u64>(), 12)) {
            let mat = lower_unit(m, &fill);
            prop_assert!(mat.is_nonsingular());
            for mask in 1u64..(1 << m) {
                let elems: Vec<u32> = (0..m as u32).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
                prop_assert_ne!(mat.xor_rows(&IndexSet(elems)).unwrap(), 0);
            }
        }

        #[test]
        fn min_dependent_monotone(rows in prop::collection::vec(0u64..64, 14), lo in 1u64..8, extra in 0u64..6) {
            let mat = BitMatrix::from_rows(rows, 6).unwrap();
            let small = min_dependent_norm(&mat, lo).unwrap();
            let big = min_dependent_norm(&mat, lo + extra).unwrap();
            if let Some((n, _)) = small {
                prop_assert_eq!(big.as_ref().map(|b| b.0), Some(n));
            }
            if let Some((n, w)) = big {
                prop_assert_eq!(mat.xor_rows(&w).unwrap(), 0);
                prop_assert_eq!(w.norm(), n);
            }
        }
    }
}
