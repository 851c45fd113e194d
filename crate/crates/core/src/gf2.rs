//! Bit-packed linear algebra over GF(2).
//!
//! Matrices are stored row-major, one bit per entry, packed into `u64`
//! words. Column-space questions are answered by eliminating the columns
//! of a matrix into a basis keyed by the *highest* set row index, which is
//! exactly the ordering the erasure analysis needs: a vector lies in the
//! span of the columns supported on rows `≤ t` iff it reduces to zero
//! against basis vectors whose leading row is `≤ t`.

use std::fmt;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// A packed vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
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

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Parses a string of `'0'`/`'1'` characters, index 0 first.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidInput(format!(
                    "unexpected character {other:?} in bit string"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bools(&bits))
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
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Highest index holding a one.
    pub fn leading_index(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(k, &w)| k * WORD_BITS + (WORD_BITS - 1 - w.leading_zeros() as usize))
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn dot(&self, other: &BitVector) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

/// A dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            bits: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[BitVector]) -> Result<Self> {
        let cols = rows.first().map_or(0, BitVector::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            m.row_words_mut(r).copy_from_slice(row.words());
        }
        Ok(m)
    }

    /// Builds a matrix from `'0'`/`'1'` row strings.
    pub fn parse_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|s| BitVector::parse(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(&rows)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.bits[r * self.stride + c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.bits[r * self.stride + c / WORD_BITS];
        let mask = 1u64 << (c % WORD_BITS);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    fn row_words(&self, r: usize) -> &[u64] {
        &self.bits[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.bits[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector {
            len: self.cols,
            words: self.row_words(r).to_vec(),
        }
    }

    pub fn column(&self, c: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.stride {
            self.bits.swap(a * self.stride + k, b * self.stride + k);
        }
    }

    /// Returns the matrix whose row `i` is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: perm.len(),
            });
        }
        let mut seen = vec![false; self.rows];
        let mut out = Self::zeros(self.rows, self.cols);
        for (i, &src) in perm.iter().enumerate() {
            if src >= self.rows || std::mem::replace(&mut seen[src], true) {
                return Err(Error::InvalidInput(format!(
                    "not a permutation of [0, {}): entry {src} at position {i}",
                    self.rows
                )));
            }
            out.row_words_mut(i).copy_from_slice(self.row_words(src));
        }
        Ok(out)
    }

    /// Submatrix with the given rows and columns, in the order listed.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                if self.get(r, c) {
                    out.set(i, j, true);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    out.set(c, r, true);
                }
            }
        }
        out
    }

    /// Horizontal concatenation `(self, other)`.
    pub fn hconcat(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: other.rows,
            });
        }
        let mut out = BitMatrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    out.set(r, c, true);
                }
            }
            for c in 0..other.cols {
                if other.get(r, c) {
                    out.set(r, self.cols + c, true);
                }
            }
        }
        Ok(out)
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, rhs: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: rhs.rows,
            });
        }
        let mut out = BitMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    let (dst, src) = (r * out.stride, k * rhs.stride);
                    for w in 0..rhs.stride {
                        out.bits[dst + w] ^= rhs.bits[src + w];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `v · self`.
    pub fn vec_mul(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.cols);
        for r in (0..self.rows).filter(|&r| v.get(r)) {
            for (o, w) in out.words.iter_mut().zip(self.row_words(r)) {
                *o ^= *w;
            }
        }
        Ok(out)
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &BitMatrix) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if !self.get(r, c) {
                    continue;
                }
                for rr in 0..rhs.rows {
                    for cc in 0..rhs.cols {
                        if rhs.get(rr, cc) {
                            out.set(r * rhs.rows + rr, c * rhs.cols + cc, true);
                        }
                    }
                }
            }
        }
        out
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..m.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(rank, p);
            for r in 0..m.rows {
                if r != rank && m.get(r, c) {
                    let (src, dst) = (rank * m.stride, r * m.stride);
                    for w in 0..m.stride {
                        m.bits[dst + w] ^= m.bits[src + w];
                    }
                }
            }
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        rank
    }

    /// Echelon basis of the column space, reusable across membership tests.
    pub fn column_space(&self) -> ColumnSpace {
        let mut space = ColumnSpace::new(self.rows);
        for c in 0..self.cols {
            space.insert(self.column(c));
        }
        space
    }

    /// Whether `v` lies in the span of the columns.
    pub fn column_space_contains(&self, v: &BitVector) -> Result<bool> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: v.len(),
            });
        }
        Ok(self.column_space().contains(v))
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            writeln!(f, "{}", self.row(r))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "\n  {}", self.row(r))?;
        }
        Ok(())
    }
}

/// Column-space basis with pairwise distinct leading (highest) indices.
#[derive(Clone, Debug)]
pub struct ColumnSpace {
    dim: usize,
    by_lead: Vec<Option<BitVector>>,
}

impl ColumnSpace {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            by_lead: vec![None; dim],
        }
    }

    /// Adds a generator; returns whether the rank grew.
    pub fn insert(&mut self, mut v: BitVector) -> bool {
        debug_assert_eq!(v.len(), self.dim);
        while let Some(lead) = v.leading_index() {
            match &self.by_lead[lead] {
                Some(b) => v.xor_assign(b),
                None => {
                    self.by_lead[lead] = Some(v);
                    return true;
                }
            }
        }
        false
    }

    pub fn rank(&self) -> usize {
        self.by_lead.iter().filter(|b| b.is_some()).count()
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        let mut v = v.clone();
        while let Some(lead) = v.leading_index() {
            match &self.by_lead[lead] {
                Some(b) => v.xor_assign(b),
                None => return false,
            }
        }
        true
    }
}

/// Leading-index basis for vectors of at most 64 coordinates, one word each.
///
/// This is the hot path of the exhaustive erasure enumeration.
#[derive(Clone, Copy, Debug)]
pub struct WordBasis {
    by_lead: [u64; 64],
    occupied: u64,
}

impl Default for WordBasis {
    fn default() -> Self {
        Self {
            by_lead: [0; 64],
            occupied: 0,
        }
    }
}

impl WordBasis {
    #[inline]
    pub fn insert(&mut self, mut v: u64) -> bool {
        while v != 0 {
            let lead = 63 - v.leading_zeros() as usize;
            if self.occupied >> lead & 1 == 1 {
                v ^= self.by_lead[lead];
            } else {
                self.by_lead[lead] = v;
                self.occupied |= 1 << lead;
                return true;
            }
        }
        false
    }

    /// Bitmask of coordinates that occur as a leading index.
    #[inline]
    pub fn leads(&self) -> u64 {
        self.occupied
    }

    /// Basis vector whose highest set coordinate is `lead`, if any.
    #[inline]
    pub fn with_lead(&self, lead: usize) -> Option<u64> {
        (self.occupied >> lead & 1 == 1).then(|| self.by_lead[lead])
    }

    #[inline]
    pub fn contains(&self, mut v: u64) -> bool {
        while v != 0 {
            let lead = 63 - v.leading_zeros() as usize;
            if self.occupied >> lead & 1 == 0 {
                return false;
            }
            v ^= self.by_lead[lead];
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q4() -> BitMatrix {
        BitMatrix::parse_rows(&["1000", "1010", "0110", "1111"]).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(BitMatrix::identity(4).rank(), 4);
        assert_eq!(BitMatrix::zeros(3, 5).rank(), 0);
        assert_eq!(q4().rank(), 4);
    }

    #[test]
    fn membership_example_one() {
        let k = q4().submatrix(&[0, 1, 2, 3], &[1, 2]);
        assert!(k
            .column_space_contains(&BitVector::parse("0100").unwrap())
            .unwrap());
        assert!(!k
            .column_space_contains(&BitVector::parse("1000").unwrap())
            .unwrap());
        assert!(k.column_space_contains(&BitVector::zeros(4)).unwrap());
    }

    #[test]
    fn empty_column_set_spans_only_zero() {
        let m = BitMatrix::zeros(3, 0);
        assert!(m.column_space_contains(&BitVector::zeros(3)).unwrap());
        assert!(!m
            .column_space_contains(&BitVector::parse("010").unwrap())
            .unwrap());
    }

    #[test]
    fn membership_rejects_wrong_length() {
        let err = q4().column_space_contains(&BitVector::zeros(3));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn submatrix_preserves_order() {
        let m = q4();
        let s = m.submatrix(&[3, 1], &[2, 0]);
        assert_eq!(s.row(0).to_string(), "11");
        assert_eq!(s.row(1).to_string(), "11");
        let s = m.submatrix(&[2], &[0, 1, 2, 3]);
        assert_eq!(s.row(0).to_string(), "0110");
    }

    #[test]
    fn kron_of_arikan_kernel() {
        let f = BitMatrix::parse_rows(&["10", "11"]).unwrap();
        let f2 = f.kron(&f);
        let expect = BitMatrix::parse_rows(&["1000", "1100", "1010", "1111"]).unwrap();
        assert_eq!(f2, expect);
    }

    fn arb_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = BitMatrix> {
        (1..=max_rows, 0..=max_cols).prop_flat_map(|(r, c)| {
            proptest::collection::vec(any::<bool>(), r * c).prop_map(move |bits| {
                let mut m = BitMatrix::zeros(r, c);
                for (k, b) in bits.into_iter().enumerate() {
                    m.set(k / c.max(1), k % c.max(1), b);
                }
                m
            })
        })
    }

    proptest! {
        #[test]
        fn membership_matches_rank_test(m in arb_matrix(9, 9), seed in any::<u64>()) {
            let mut v = BitVector::zeros(m.rows());
            for i in 0..m.rows() {
                v.set(i, seed >> (i % 64) & 1 == 1);
            }
            let augmented = m.hconcat(&BitMatrix::from_rows(
                &(0..m.rows()).map(|i| BitVector::from_bools(&[v.get(i)])).collect::<Vec<_>>()
            ).unwrap()).unwrap();
            let r = m.rank();
            let ra = augmented.rank();
            prop_assert!(ra >= r);
            prop_assert_eq!(ra == r, m.column_space_contains(&v).unwrap());
            prop_assert!(r <= m.rows().min(m.cols()));
        }

        #[test]
        fn membership_invariant_under_column_permutation(
            m in arb_matrix(8, 8),
            keys in proptest::collection::vec(any::<u32>(), 8),
            seed in any::<u64>(),
        ) {
            let mut order: Vec<usize> = (0..m.cols()).collect();
            order.sort_by_key(|&c| (keys[c], c));
            let permuted = m.submatrix(&(0..m.rows()).collect::<Vec<_>>(), &order);
            let mut v = BitVector::zeros(m.rows());
            for i in 0..m.rows() {
                v.set(i, seed >> i & 1 == 1);
            }
            prop_assert_eq!(
                m.column_space_contains(&v).unwrap(),
                permuted.column_space_contains(&v).unwrap()
            );
        }

        #[test]
        fn word_basis_agrees_with_column_space(cols in proptest::collection::vec(any::<u16>(), 0..12), probe in any::<u16>()) {
            let mut fast = WordBasis::default();
            let mut slow = ColumnSpace::new(16);
            for &c in &cols {
                fast.insert(c as u64);
                let bits: Vec<bool> = (0..16).map(|i| c >> i & 1 == 1).collect();
                slow.insert(BitVector::from_bools(&bits));
            }
            let bits: Vec<bool> = (0..16).map(|i| probe >> i & 1 == 1).collect();
            prop_assert_eq!(fast.contains(probe as u64), slow.contains(&BitVector::from_bools(&bits)));
            prop_assert_eq!(fast.leads().count_ones() as usize, slow.rank());
        }
    }

    #[test]
    fn invertible_matrix_spans_everything() {
        let m = q4();
        for x in 0u8..16 {
            let v = BitVector::from_bools(&[(x & 1) != 0, (x & 2) != 0, (x & 4) != 0, (x & 8) != 0]);
            assert!(m.column_space_contains(&v).unwrap());
        }
    }
}
