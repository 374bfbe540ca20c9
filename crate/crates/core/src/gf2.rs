//! Dense linear algebra over GF(2) with bits packed into `u64` words.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{usage, Error, Result};

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A fixed-length vector over GF(2).
///
/// Bit `i` lives in word `i / 64` at bit position `i % 64`. Unused high bits of
/// the last word are always zero. Ordering is lexicographic with coordinate 0
/// most significant, so `"011" < "100"`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self {
            words: vec![u64::MAX; words_for(len)],
            len,
        };
        v.clear_tail();
        v
    }

    /// Builds a vector whose support is `positions`. Repeated positions cancel.
    pub fn from_support(len: usize, positions: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v = Self::zeros(len);
        for p in positions {
            if p >= len {
                return usage(format!("position {p} out of range for length {len}"));
            }
            v.flip(p);
        }
        Ok(v)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// The low `len` bits of `mask`, bit `j` of the mask becoming coordinate `j`.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        assert!(len <= WORD);
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = mask;
            v.clear_tail();
        }
        v
    }

    /// Inverse of [`BitVec::from_mask`]; only valid for `len <= 64`.
    pub fn to_mask(&self) -> u64 {
        assert!(self.len <= WORD);
        self.words.first().copied().unwrap_or(0)
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let bit = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= bit;
        } else {
            self.words[i / WORD] &= !bit;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return usage(format!(
                "length mismatch: {} vs {}",
                self.len, other.len
            ));
        }
        Ok(())
    }

    pub fn xor_assign(&mut self, other: &Self) -> Result<()> {
        self.check_len(other)?;
        self.xor_assign_unchecked(other);
        Ok(())
    }

    #[inline]
    pub(crate) fn xor_assign_unchecked(&mut self, other: &Self) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Self) -> Result<bool> {
        self.check_len(other)?;
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        Ok(ones % 2 == 1)
    }

    /// Indices of the nonzero coordinates, ascending.
    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + b)
            })
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// First coordinate where `self` and `other` differ.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        self.words
            .iter()
            .zip(&other.words)
            .enumerate()
            .find(|(_, (a, b))| a != b)
            .map(|(wi, (a, b))| wi * WORD + (a ^ b).trailing_zeros() as usize)
    }
}

/// Number of coordinates where `u` and `v` differ.
pub fn hamming_distance(u: &BitVec, v: &BitVec) -> Result<usize> {
    u.check_len(v)?;
    Ok(u
        .words
        .iter()
        .zip(&v.words)
        .map(|(a, b)| (a ^ b).count_ones() as usize)
        .sum())
}

pub fn weight(u: &BitVec) -> usize {
    u.weight()
}

impl Ord for BitVec {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.first_difference(other) {
            // Common prefix: shorter vector first.
            Some(i) if i < self.len.min(other.len) => {
                if self.get(i) {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            _ => self.len.cmp(&other.len),
        }
    }
}

impl PartialOrd for BitVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl FromStr for BitVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut v = Self::zeros(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => v.set(i, true),
                other => {
                    return Err(Error::Parse(format!(
                        "unexpected character {other:?} at position {i} in bit string"
                    )))
                }
            }
        }
        Ok(v)
    }
}

/// A dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    rows: Vec<BitVec>,
    cols: usize,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows: vec![BitVec::zeros(cols); rows],
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    /// Builds a matrix from rows that all have length `cols`.
    pub fn from_rows(rows: Vec<BitVec>, cols: usize) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return usage(format!(
                "row of length {} in a matrix with {cols} columns",
                bad.len()
            ));
        }
        Ok(Self { rows, cols })
    }

    /// Parses rows written as 0/1 strings.
    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| r.parse::<BitVec>())
            .collect::<Result<Vec<_>>>()?;
        let cols = parsed.first().map_or(0, BitVec::len);
        Self::from_rows(parsed, cols)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value)
    }

    pub fn push_row(&mut self, row: BitVec) -> Result<()> {
        if row.len() != self.cols {
            return usage(format!(
                "row of length {} in a matrix with {} columns",
                row.len(),
                self.cols
            ));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.ones_iter() {
                t.rows[c].set(r, true);
            }
        }
        t
    }

    /// Reduced row echelon form, pivoting on columns left to right.
    /// Returns the reduced matrix (zero rows dropped) and the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == rows.len() {
                break;
            }
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(rank, p);
            let (before, rest) = rows.split_at_mut(rank);
            let (pivot, after) = rest.split_first_mut().expect("pivot row exists");
            let pivot = &*pivot;
            for row in before.iter_mut().chain(after.iter_mut()) {
                if row.get(col) {
                    row.xor_assign_unchecked(pivot);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        rows.truncate(rank);
        (
            Self {
                rows,
                cols: self.cols,
            },
            pivots,
        )
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// A basis of `{v : Mv = 0}`, one vector per free column in ascending order.
    pub fn nullspace_basis(&self) -> Vec<BitVec> {
        let (reduced, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = BitVec::zeros(self.cols);
                v.set(free, true);
                for (row, &p) in reduced.rows.iter().zip(&pivots) {
                    if row.get(free) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect()
    }

    pub fn mat_vec_mul(&self, v: &BitVec) -> Result<BitVec> {
        if v.len() != self.cols {
            return usage(format!(
                "matrix has {} columns but vector has length {}",
                self.cols,
                v.len()
            ));
        }
        let mut out = BitVec::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot(v)? {
                out.set(i, true);
            }
        }
        Ok(out)
    }
}

/// Gray-code walk over every combination of `basis`, calling `visit` on each
/// of the `2^basis.len()` vectors (the zero vector first).
pub(crate) fn for_each_combination(len: usize, basis: &[BitVec], mut visit: impl FnMut(&BitVec)) {
    let mut current = BitVec::zeros(len);
    visit(&current);
    let total: u64 = 1u64 << basis.len();
    for step in 1..total {
        let flip = step.trailing_zeros() as usize;
        current.xor_assign_unchecked(&basis[flip]);
        visit(&current);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hamming_74_h() -> BitMatrix {
        BitMatrix::from_strs(&["1010101", "0110011", "0001111"]).unwrap()
    }

    #[test]
    fn distance_examples() {
        let z: BitVec = "000".parse().unwrap();
        assert_eq!(hamming_distance(&z, &z).unwrap(), 0);
        let a: BitVec = "011".parse().unwrap();
        let b: BitVec = "111".parse().unwrap();
        assert_eq!(hamming_distance(&a, &b).unwrap(), 1);
        let long: BitVec = "0110".parse().unwrap();
        assert!(matches!(hamming_distance(&a, &long), Err(Error::Usage(_))));
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight(&"0000".parse().unwrap()), 0);
        assert_eq!(weight(&"1111".parse().unwrap()), 4);
        assert_eq!(weight(&"1110000".parse().unwrap()), 3);
        assert_eq!(BitVec::ones(130).weight(), 130);
    }

    #[test]
    fn lexicographic_order_puts_coordinate_zero_first() {
        let v = |s: &str| s.parse::<BitVec>().unwrap();
        assert!(v("011") < v("100"));
        assert!(v("00") < v("01"));
        let mut all: Vec<BitVec> = (0..8u64).map(|m| BitVec::from_mask(m, 3)).collect();
        all.sort();
        let strs: Vec<String> = all.iter().map(|b| b.to_string()).collect();
        assert_eq!(strs, ["000", "001", "010", "011", "100", "101", "110", "111"]);
    }

    #[test]
    fn nullspace_examples() {
        assert!(BitMatrix::identity(3).nullspace_basis().is_empty());
        assert_eq!(BitMatrix::zeros(2, 4).nullspace_basis().len(), 4);
        let h = BitMatrix::from_strs(&["111"]).unwrap();
        let basis = h.nullspace_basis();
        assert_eq!(basis.len(), 2);
        // Brute force: the even-weight vectors are exactly the kernel.
        let kernel: Vec<u64> = (0..8u64)
            .filter(|&m| h.mat_vec_mul(&BitVec::from_mask(m, 3)).unwrap().is_zero())
            .collect();
        assert_eq!(kernel, vec![0b000, 0b011, 0b101, 0b110]);
        for b in &basis {
            assert_eq!(b.weight() % 2, 0);
            assert!(kernel.contains(&b.to_mask()));
        }
    }

    #[test]
    fn mat_vec_examples() {
        let v: BitVec = "1011".parse().unwrap();
        assert_eq!(BitMatrix::identity(4).mat_vec_mul(&v).unwrap(), v);
        assert!(BitMatrix::zeros(3, 4).mat_vec_mul(&v).unwrap().is_zero());
        assert!(BitMatrix::zeros(3, 5).mat_vec_mul(&v).is_err());
    }

    #[test]
    fn hamming_codewords_are_in_the_kernel() {
        let h = hamming_74_h();
        // Enumerate all 128 words by brute force and keep the kernel.
        let codewords: Vec<BitVec> = (0..128u64)
            .map(|m| BitVec::from_mask(m, 7))
            .filter(|w| {
                h.rows()
                    .iter()
                    .all(|r| r.ones_iter().filter(|&j| w.get(j)).count() % 2 == 0)
            })
            .collect();
        assert_eq!(codewords.len(), 16);
        for c in &codewords {
            assert!(h.mat_vec_mul(c).unwrap().is_zero());
        }
        assert_eq!(h.nullspace_basis().len(), 4);
    }

    #[test]
    fn gray_walk_visits_span() {
        let basis = hamming_74_h().nullspace_basis();
        let mut seen = std::collections::HashSet::new();
        for_each_combination(7, &basis, |v| {
            seen.insert(v.to_mask());
        });
        assert_eq!(seen.len(), 16);
    }

    fn arb_matrix() -> impl Strategy<Value = BitMatrix> {
        (1usize..8, 1usize..12).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), c), r).prop_map(
                move |rows| {
                    let rows = rows.iter().map(|b| BitVec::from_bools(b)).collect();
                    BitMatrix::from_rows(rows, c).unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn triangle_inequality_and_xor_weight(
            a in proptest::collection::vec(any::<bool>(), 70),
            b in proptest::collection::vec(any::<bool>(), 70),
            c in proptest::collection::vec(any::<bool>(), 70),
        ) {
            let (u, v, w) = (BitVec::from_bools(&a), BitVec::from_bools(&b), BitVec::from_bools(&c));
            let uv = hamming_distance(&u, &v).unwrap();
            let vw = hamming_distance(&v, &w).unwrap();
            let uw = hamming_distance(&u, &w).unwrap();
            prop_assert!(uw <= uv + vw);
            prop_assert_eq!(uv, hamming_distance(&v, &u).unwrap());
            prop_assert_eq!(u.xor(&v).unwrap().weight(), uv);
        }

        #[test]
        fn distance_to_corruption_is_error_weight(
            a in proptest::collection::vec(any::<bool>(), 16),
            e in proptest::collection::vec(any::<bool>(), 16),
        ) {
            let u = BitVec::from_bools(&a);
            let err = BitVec::from_bools(&e);
            let corrupted = u.xor(&err).unwrap();
            let by_coordinate = (0..16).filter(|&i| u.get(i) != corrupted.get(i)).count();
            prop_assert_eq!(hamming_distance(&u, &corrupted).unwrap(), by_coordinate);
            prop_assert_eq!(by_coordinate, e.iter().filter(|&&b| b).count());
        }

        #[test]
        fn nullspace_is_independent_kernel(m in arb_matrix()) {
            let basis = m.nullspace_basis();
            prop_assert_eq!(basis.len(), m.n_cols() - m.rank());
            for b in &basis {
                prop_assert!(m.mat_vec_mul(b).unwrap().is_zero());
            }
            if !basis.is_empty() {
                let stacked = BitMatrix::from_rows(basis.clone(), m.n_cols()).unwrap();
                prop_assert_eq!(stacked.rank(), basis.len());
            }
            // Row rank equals column rank.
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn string_round_trip(a in proptest::collection::vec(any::<bool>(), 0..150)) {
            let v = BitVec::from_bools(&a);
            prop_assert_eq!(v.to_string().parse::<BitVec>().unwrap(), v);
        }
    }
}
