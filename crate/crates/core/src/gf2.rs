//! Dense linear algebra over GF(2).
//!
//! Vectors and matrices are packed into 64-bit words, row-major. Every
//! homology query in the crate bottoms out in [`EchelonBasis`], an
//! incremental span basis keyed by the lowest set bit of each stored row.

use std::fmt;

use rand::Rng;
use thiserror::Error;

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

/// A vector over GF(2) of fixed length.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn unit(len: usize, bit: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(bit, true);
        v
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

    /// Builds a vector with the given positions set; repeated indices cancel.
    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
            v.flip(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Index of the lowest set bit.
    pub fn lowest_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, &w)| k * WORD + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * WORD + t)
                }
            })
        })
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "xor of vectors of different length");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn and_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn or_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// Clears every bit set in `mask`.
    pub fn and_not_assign(&mut self, mask: &BitVector) {
        assert_eq!(self.len, mask.len);
        for (a, b) in self.words.iter_mut().zip(&mask.words) {
            *a &= !b;
        }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    /// True iff every bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Keeps the entries at `positions`, in order.
    pub fn select(&self, positions: &[usize]) -> BitVector {
        let mut out = BitVector::zeros(positions.len());
        for (k, &p) in positions.iter().enumerate() {
            if self.get(p) {
                out.set(k, true);
            }
        }
        out
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        for w in v.words.iter_mut() {
            *w = rng.random();
        }
        v.mask_tail();
        v
    }

    fn mask_tail(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

impl std::ops::Add for &BitVector {
    type Output = BitVector;
    fn add(self, rhs: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(rhs);
        out
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[")?;
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        write!(f, "]")
    }
}

/// Incremental basis of a subspace of GF(2)^len.
///
/// Stored rows have pairwise distinct lowest set bits, so membership is a
/// single reduction pass.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    len: usize,
    rows: Vec<BitVector>,
    pivot_row: Vec<Option<usize>>,
}

impl EchelonBasis {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            rows: Vec::new(),
            pivot_row: vec![None; len],
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Reduces `v` against the basis in place; the result is zero iff `v`
    /// was in the span.
    pub fn reduce(&self, v: &mut BitVector) {
        assert_eq!(v.len(), self.len);
        let mut start = 0;
        loop {
            let Some(low) = first_one_from(v, start) else {
                return;
            };
            match self.pivot_row[low] {
                Some(r) => v.xor_assign(&self.rows[r]),
                None => start = low + 1,
            }
        }
    }

    /// Lowest set bit of `v` after reduction whose pivot is free.
    fn leading_free(&self, v: &mut BitVector) -> Option<usize> {
        let mut start = 0;
        loop {
            let low = first_one_from(v, start)?;
            match self.pivot_row[low] {
                Some(r) => v.xor_assign(&self.rows[r]),
                None => return Some(low),
            }
            start = low;
        }
    }

    /// Adds `v` to the basis; returns false if it was already in the span.
    pub fn insert(&mut self, mut v: BitVector) -> bool {
        assert_eq!(v.len(), self.len);
        match self.leading_free(&mut v) {
            None => false,
            Some(low) => {
                self.pivot_row[low] = Some(self.rows.len());
                self.rows.push(v);
                true
            }
        }
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        let mut w = v.clone();
        self.reduce(&mut w);
        w.is_zero()
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }
}

fn first_one_from(v: &BitVector, start: usize) -> Option<usize> {
    let words = v.words();
    let mut k = start / WORD;
    if k >= words.len() {
        return None;
    }
    let mut w = words[k] & (!0u64 << (start % WORD));
    loop {
        if w != 0 {
            return Some(k * WORD + w.trailing_zeros() as usize);
        }
        k += 1;
        if k >= words.len() {
            return None;
        }
        w = words[k];
    }
}

/// Dense matrix over GF(2), row-major, 64-bit packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Result<Self, Gf2Error> {
        for r in &rows {
            if r.len() != cols {
                return Err(Gf2Error::DimensionMismatch {
                    expected: cols,
                    actual: r.len(),
                });
            }
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self {
            rows,
            cols,
            data: (0..rows).map(|_| BitVector::random(cols, rng)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols);
        self.data[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.rows && j < self.cols);
        self.data[i].set(j, value);
    }

    pub fn flip(&mut self, i: usize, j: usize) {
        assert!(i < self.rows && j < self.cols);
        self.data[i].flip(j);
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.data[i]
    }

    pub fn column(&self, j: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows);
        for i in 0..self.rows {
            if self.data[i].get(j) {
                v.set(i, true);
            }
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BitVector::is_zero)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for (i, row) in self.data.iter().enumerate() {
            for j in row.iter_ones() {
                t.data[j].set(i, true);
            }
        }
        t
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.cols != rhs.rows {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                actual: rhs.rows,
            });
        }
        let mut out = BitMatrix::zeros(self.rows, rhs.cols);
        for (i, row) in self.data.iter().enumerate() {
            for k in row.iter_ones() {
                out.data[i].xor_assign(&rhs.data[k]);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                actual: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows);
        for (i, row) in self.data.iter().enumerate() {
            if row.dot(v) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// Appends `v` as a new last column.
    pub fn augment(&self, v: &BitVector) -> Result<BitMatrix, Gf2Error> {
        if v.len() != self.rows {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.rows,
                actual: v.len(),
            });
        }
        let mut out = BitMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in self.data[i].iter_ones() {
                out.data[i].set(j, true);
            }
            if v.get(i) {
                out.data[i].set(self.cols, true);
            }
        }
        Ok(out)
    }

    /// Reorders rows: row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> BitMatrix {
        assert_eq!(perm.len(), self.rows);
        BitMatrix {
            rows: self.rows,
            cols: self.cols,
            data: perm.iter().map(|&p| self.data[p].clone()).collect(),
        }
    }

    /// Reorders columns: column `j` of the result is column `perm[j]` of `self`.
    pub fn permute_cols(&self, perm: &[usize]) -> BitMatrix {
        assert_eq!(perm.len(), self.cols);
        BitMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|r| r.select(perm)).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        let mut basis = EchelonBasis::new(self.cols);
        for r in &self.data {
            basis.insert(r.clone());
        }
        basis.rank()
    }

    /// Row space as an echelon basis.
    pub fn row_basis(&self) -> EchelonBasis {
        let mut basis = EchelonBasis::new(self.cols);
        for r in &self.data {
            basis.insert(r.clone());
        }
        basis
    }

    /// Whether `v` is a GF(2) combination of the columns.
    pub fn in_column_space(&self, v: &BitVector) -> Result<bool, Gf2Error> {
        if v.len() != self.rows {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.rows,
                actual: v.len(),
            });
        }
        Ok(self.transpose().row_basis().contains(v))
    }

    /// A basis of `{ v : self · v = 0 }`, of size `cols - rank`.
    pub fn kernel_basis(&self) -> Vec<BitVector> {
        let (rref, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut out = Vec::with_capacity(self.cols - pivots.len());
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVector::unit(self.cols, free);
            for (r, &p) in pivots.iter().enumerate() {
                if rref[r].get(free) {
                    v.set(p, true);
                }
            }
            out.push(v);
        }
        out
    }

    /// Reduced row echelon form: the nonzero rows and their pivot columns.
    pub fn rref(&self) -> (Vec<BitVector>, Vec<usize>) {
        let mut rows: Vec<BitVector> = self.data.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == rows.len() {
                break;
            }
            let Some(p) = (r..rows.len()).find(|&i| rows[i].get(c)) else {
                continue;
            };
            rows.swap(r, p);
            let pivot = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.get(c) {
                    row.xor_assign(&pivot);
                }
            }
            pivots.push(c);
            r += 1;
        }
        rows.truncate(r);
        (rows, pivots)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in &self.data {
            for j in 0..self.cols {
                write!(f, "{}", u8::from(r.get(j)))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub fn rank(m: &BitMatrix) -> usize {
    m.rank()
}

pub fn in_column_space(m: &BitMatrix, v: &BitVector) -> Result<bool, Gf2Error> {
    m.in_column_space(v)
}

pub fn kernel_basis(m: &BitMatrix) -> Vec<BitVector> {
    m.kernel_basis()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Textbook elimination on `Vec<Vec<bool>>`, independent of the packed code.
    fn naive_rank(m: &[Vec<bool>]) -> usize {
        let mut a: Vec<Vec<bool>> = m.to_vec();
        let cols = a.first().map_or(0, Vec::len);
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..a.len()).find(|&i| a[i][c]) else {
                continue;
            };
            a.swap(rank, p);
            for i in 0..a.len() {
                if i != rank && a[i][c] {
                    for j in 0..cols {
                        let x = a[rank][j];
                        a[i][j] ^= x;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn to_bools(m: &BitMatrix) -> Vec<Vec<bool>> {
        (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect())
            .collect()
    }

    fn low_rank_matrix(rows: usize, cols: usize, r: usize, rng: &mut ChaCha8Rng) -> BitMatrix {
        let a = BitMatrix::random(rows, r, rng);
        let b = BitMatrix::random(r, cols, rng);
        a.mul(&b).unwrap()
    }

    #[test]
    fn identity_and_zero_ranks() {
        assert_eq!(BitMatrix::identity(3).rank(), 3);
        assert_eq!(BitMatrix::zeros(4, 7).rank(), 0);
        assert!(BitMatrix::identity(3).kernel_basis().is_empty());
        let k = BitMatrix::zeros(3, 3).kernel_basis();
        assert_eq!(k.len(), 3);
        let mut basis = EchelonBasis::new(3);
        assert!(k.into_iter().all(|v| basis.insert(v)));
    }

    #[test]
    fn rank_matches_naive_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let rows = rng.random_range(1..=64);
            let cols = rng.random_range(1..=64);
            let m = if rng.random_bool(0.5) {
                BitMatrix::random(rows, cols, &mut rng)
            } else {
                let r = rng.random_range(0..=rows.min(cols));
                low_rank_matrix(rows, cols, r, &mut rng)
            };
            assert_eq!(m.rank(), naive_rank(&to_bools(&m)));
        }
    }

    #[test]
    fn column_space_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = BitVector::random(5, &mut rng);
        assert!(BitMatrix::identity(5).in_column_space(&v).unwrap());
        let nz = BitVector::unit(5, 2);
        assert!(!BitMatrix::zeros(5, 4).in_column_space(&nz).unwrap());
        assert_eq!(
            BitMatrix::zeros(5, 4).in_column_space(&BitVector::zeros(4)),
            Err(Gf2Error::DimensionMismatch {
                expected: 5,
                actual: 4
            })
        );
    }

    #[test]
    fn column_space_agrees_with_exhaustive_search() {
        // 20x20 with rank <= 12: enumerate the span of an explicit column basis.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let r = rng.random_range(1..=12);
            let m = low_rank_matrix(20, 20, r, &mut rng);
            let t = m.transpose();
            let basis: Vec<BitVector> = {
                let mut b = EchelonBasis::new(20);
                (0..20)
                    .map(|j| t.row(j).clone())
                    .filter(|c| b.insert(c.clone()))
                    .collect()
            };
            let mut span = std::collections::HashSet::new();
            for mask in 0u32..(1 << basis.len()) {
                let mut s = BitVector::zeros(20);
                for (k, b) in basis.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        s.xor_assign(b);
                    }
                }
                span.insert(s);
            }
            for _ in 0..50 {
                let v = if rng.random_bool(0.5) {
                    let x = BitVector::random(20, &mut rng);
                    m.mul_vec(&x).unwrap()
                } else {
                    BitVector::random(20, &mut rng)
                };
                assert_eq!(m.in_column_space(&v).unwrap(), span.contains(&v));
            }
        }
    }

    #[test]
    fn kernel_vectors_are_null_and_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let rows = rng.random_range(1..=40);
            let cols = rng.random_range(1..=40);
            let r = rng.random_range(0..=rows.min(cols));
            let m = low_rank_matrix(rows, cols, r, &mut rng);
            let k = m.kernel_basis();
            assert_eq!(k.len(), cols - naive_rank(&to_bools(&m)));
            let mut basis = EchelonBasis::new(cols);
            for v in k {
                assert!(m.mul_vec(&v).unwrap().is_zero());
                assert!(basis.insert(v));
            }
        }
    }

    #[test]
    fn bitvector_addition_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = BitVector::random(130, &mut rng);
        assert!((&v + &v).is_zero());
        assert_eq!(v.iter_ones().count(), v.count_ones());
    }

    fn matrix_strategy() -> impl Strategy<Value = BitMatrix> {
        (1usize..24, 1usize..24, any::<u64>()).prop_map(|(r, c, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            BitMatrix::random(r, c, &mut rng)
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in matrix_strategy()) {
            prop_assert_eq!(m.rank() + m.kernel_basis().len(), m.cols());
            prop_assert!(m.rank() <= m.rows().min(m.cols()));
        }

        #[test]
        fn transpose_involution_and_rank(m in matrix_strategy()) {
            prop_assert_eq!(&m.transpose().transpose(), &m);
            prop_assert_eq!(m.transpose().rank(), m.rank());
        }

        #[test]
        fn column_space_iff_augmented_rank(m in matrix_strategy(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = BitVector::random(m.rows(), &mut rng);
            let aug = m.augment(&v).unwrap();
            prop_assert_eq!(m.in_column_space(&v).unwrap(), aug.rank() == m.rank());
        }

        #[test]
        fn rank_invariant_under_permutations(m in matrix_strategy(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pr: Vec<usize> = (0..m.rows()).collect();
            let mut pc: Vec<usize> = (0..m.cols()).collect();
            pr.shuffle(&mut rng);
            pc.shuffle(&mut rng);
            prop_assert_eq!(m.permute_rows(&pr).permute_cols(&pc).rank(), m.rank());
        }
    }
}
