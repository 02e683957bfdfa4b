//! Bit vectors and bit-packed matrices over GF(2).
//!
//! Bit levels are indexed from 1 (most significant) in [`LevelVector`], as in
//! the channel models. Matrix rows and columns are 0-based.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::error::{invalid, Error, Result};

/// An ordered sequence of bit levels; level 1 is the most significant bit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LevelVector {
    bits: Vec<bool>,
}

impl LevelVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    /// Builds a vector from 0/1 digits; any other value is rejected.
    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        digits
            .iter()
            .map(|&d| match d {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(invalid(format!("bit value {other} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit at `level` (1-based). Levels outside `1..=len` read as 0.
    pub fn level(&self, level: isize) -> bool {
        if level < 1 {
            return false;
        }
        self.bits.get(level as usize - 1).copied().unwrap_or(false)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// The `m` most significant levels.
    pub fn prefix(&self, m: usize) -> LevelVector {
        LevelVector::new(self.bits[..m.min(self.len())].to_vec())
    }

    pub fn xor(&self, other: &LevelVector) -> Result<LevelVector> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                context: "level vector xor",
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(LevelVector::new(
            self.bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a ^ b)
                .collect(),
        ))
    }

    pub fn concat(&self, other: &LevelVector) -> LevelVector {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        LevelVector::new(bits)
    }

    pub(crate) fn to_words(&self) -> Vec<u64> {
        let mut words = vec![0u64; words_for(self.len())];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        words
    }

    pub(crate) fn from_words(words: &[u64], len: usize) -> Self {
        Self::new((0..len).map(|i| get_bit(words, i)).collect())
    }
}

impl FromStr for LevelVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(invalid(format!("'{other}' is not a bit"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }
}

impl fmt::Display for LevelVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[inline]
pub(crate) fn get_bit(words: &[u64], i: usize) -> bool {
    (words[i / 64] >> (i % 64)) & 1 == 1
}

#[inline]
pub(crate) fn xor_words(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

/// Parity of the inner product of two packed bit rows.
#[inline]
pub(crate) fn dot(a: &[u64], b: &[u64]) -> bool {
    a.iter()
        .zip(b)
        .fold(0u32, |acc, (x, y)| acc ^ (x & y).count_ones())
        & 1
        == 1
}

fn first_set_bit(words: &[u64], from_word: usize) -> Option<usize> {
    words[from_word..]
        .iter()
        .position(|&w| w != 0)
        .map(|i| (from_word + i) * 64 + words[from_word + i].trailing_zeros() as usize)
}

/// Dense binary matrix with bit-packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Matrix with independent uniform entries.
    pub fn random<R: RngCore + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for w in m.row_words_mut(r) {
                *w = rng.next_u64();
            }
            m.mask_tail(r);
        }
        m
    }

    /// Builds a matrix from rows of 0/1 values.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: "matrix row length",
                    expected: cols,
                    actual: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => m.set(r, c, true),
                    other => return Err(invalid(format!("entry {other} is not 0 or 1"))),
                }
            }
        }
        Ok(m)
    }

    /// Parses rows written as bit strings, e.g. `["110", "011"]`.
    pub fn from_bit_strings(rows: &[&str]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|s| s.parse::<LevelVector>())
            .collect::<Result<Vec<_>>>()?;
        let digits: Vec<Vec<u8>> = parsed
            .iter()
            .map(|v| v.bits().iter().map(|&b| u8::from(b)).collect())
            .collect();
        if digits.is_empty() {
            return Ok(Self::zeros(0, 0));
        }
        Self::from_rows(&digits)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r},{c}) out of bounds"
        );
        get_bit(self.row_words(r), c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r},{c}) out of bounds"
        );
        let w = &mut self.data[r * self.stride + c / 64];
        if value {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn toggle(&mut self, r: usize, c: usize) {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r},{c}) out of bounds"
        );
        self.data[r * self.stride + c / 64] ^= 1 << (c % 64);
    }

    pub(crate) fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub(crate) fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    fn mask_tail(&mut self, r: usize) {
        let rem = self.cols % 64;
        if rem != 0 {
            let last = (r + 1) * self.stride - 1;
            self.data[last] &= (1u64 << rem) - 1;
        }
    }

    pub fn row(&self, r: usize) -> LevelVector {
        LevelVector::from_words(self.row_words(r), self.cols)
    }

    /// XORs `block` into this matrix with its top-left corner at `(row, col)`.
    pub fn xor_block(&mut self, row: usize, col: usize, block: &Gf2Matrix) -> Result<()> {
        if row + block.rows > self.rows || col + block.cols > self.cols {
            return Err(invalid(format!(
                "{}x{} block at ({row},{col}) does not fit in {}x{} matrix",
                block.rows, block.cols, self.rows, self.cols
            )));
        }
        for r in 0..block.rows {
            for c in 0..block.cols {
                if block.get(r, c) {
                    self.toggle(row + r, col + c);
                }
            }
        }
        Ok(())
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hconcat(&self, other: &Gf2Matrix) -> Result<Gf2Matrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                context: "horizontal concatenation rows",
                expected: self.rows,
                actual: other.rows,
            });
        }
        let mut out = Gf2Matrix::zeros(self.rows, self.cols + other.cols);
        out.xor_block(0, 0, self)?;
        out.xor_block(0, self.cols, other)?;
        Ok(out)
    }

    /// Block-diagonal composition `diag(self, other)`.
    pub fn block_diag(&self, other: &Gf2Matrix) -> Gf2Matrix {
        let mut out = Gf2Matrix::zeros(self.rows + other.rows, self.cols + other.cols);
        out.xor_block(0, 0, self).expect("fits by construction");
        out.xor_block(self.rows, self.cols, other)
            .expect("fits by construction");
        out
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut t = Gf2Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Rank over GF(2).
    ///
    /// Forward elimination, column by column; the pivot is the lowest-index
    /// remaining row with a 1 in the current column.
    pub fn rank(&self) -> usize {
        let mut data = self.data.clone();
        let stride = self.stride;
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let (w, mask) = (col / 64, 1u64 << (col % 64));
            let Some(pivot) = (rank..self.rows).find(|&r| data[r * stride + w] & mask != 0) else {
                continue;
            };
            if pivot != rank {
                for i in 0..stride {
                    data.swap(pivot * stride + i, rank * stride + i);
                }
            }
            let (head, tail) = data.split_at_mut((rank + 1) * stride);
            let pivot_row = &head[rank * stride + w..];
            for row in tail.chunks_exact_mut(stride) {
                if row[w] & mask != 0 {
                    xor_words(&mut row[w..], pivot_row);
                }
            }
            rank += 1;
        }
        rank
    }

    /// `y = A x` over GF(2).
    pub fn mat_vec_mul(&self, x: &LevelVector) -> Result<LevelVector> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product: vector length vs matrix columns",
                expected: self.cols,
                actual: x.len(),
            });
        }
        let xw = x.to_words();
        Ok(LevelVector::new(
            (0..self.rows)
                .map(|r| dot(self.row_words(r), &xw))
                .collect(),
        ))
    }

    /// Solves `A x = y`. Returns `None` when the system is inconsistent,
    /// otherwise a particular solution (free variables set to 0) together
    /// with the dimension of the solution space.
    pub fn solve(&self, y: &LevelVector) -> Result<Option<Solution>> {
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "linear solve: right-hand side length vs matrix rows",
                expected: self.rows,
                actual: y.len(),
            });
        }
        let mut elim = Eliminator::new(self.cols);
        for r in 0..self.rows {
            if elim.insert(self.row_words(r), y.bits()[r]) == Insertion::Inconsistent {
                return Ok(None);
            }
        }
        Ok(Some(Solution {
            nullity: self.cols - elim.rank(),
            x: elim.particular_solution(),
        }))
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {}", self.row(r))?;
        }
        Ok(())
    }
}

/// Result of [`Gf2Matrix::solve`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub x: LevelVector,
    /// Dimension of the solution space; 0 means the solution is unique.
    pub nullity: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Insertion {
    Independent,
    Redundant,
    Inconsistent,
}

/// Incremental row-echelon basis with a right-hand side bit per row.
///
/// Each stored row's pivot is its lowest set column, so reducing a new row
/// only ever clears bits from left to right.
#[derive(Clone, Debug)]
pub struct Eliminator {
    cols: usize,
    stride: usize,
    rows: Vec<u64>,
    rhs: Vec<bool>,
    pivots: Vec<usize>,
    pivot_row: Vec<Option<usize>>,
    scratch: Vec<u64>,
}

impl Eliminator {
    pub fn new(cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            cols,
            stride,
            rows: Vec::new(),
            rhs: Vec::new(),
            pivots: Vec::new(),
            pivot_row: vec![None; cols],
            scratch: vec![0; stride],
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.cols
    }

    /// Inserts the equation `row · x = rhs`.
    pub fn insert(&mut self, row: &[u64], rhs: bool) -> Insertion {
        debug_assert_eq!(row.len(), self.stride);
        self.scratch.copy_from_slice(row);
        let mut rhs = rhs;
        let mut from_word = 0;
        while let Some(c) = first_set_bit(&self.scratch, from_word) {
            from_word = c / 64;
            match self.pivot_row[c] {
                Some(p) => {
                    let src = &self.rows[p * self.stride + from_word..(p + 1) * self.stride];
                    xor_words(&mut self.scratch[from_word..], src);
                    rhs ^= self.rhs[p];
                }
                None => {
                    self.pivot_row[c] = Some(self.pivots.len());
                    self.pivots.push(c);
                    self.rows.extend_from_slice(&self.scratch);
                    self.rhs.push(rhs);
                    return Insertion::Independent;
                }
            }
        }
        if rhs {
            Insertion::Inconsistent
        } else {
            Insertion::Redundant
        }
    }

    /// Back-substitution with free variables set to 0.
    pub fn particular_solution(&self) -> LevelVector {
        let mut x = vec![0u64; self.stride];
        let mut order: Vec<usize> = (0..self.pivots.len()).collect();
        order.sort_unstable_by_key(|&i| std::cmp::Reverse(self.pivots[i]));
        for i in order {
            let row = &self.rows[i * self.stride..(i + 1) * self.stride];
            // bits left of the pivot are zero in the stored row
            let value = self.rhs[i] ^ dot(row, &x);
            if value {
                let c = self.pivots[i];
                x[c / 64] |= 1 << (c % 64);
            }
        }
        LevelVector::from_words(&x, self.cols)
    }
}

/// The `m_hat × l` block placing a transmitter's top `m` levels into the
/// bottom `m` of `m_hat` receiver rows.
///
/// Receiver row `i` (1-based) reads input level `i - (m_hat - m)`; rows
/// `1..=m_hat - m` are zero.
pub fn shift_truncate_block(l: usize, m: usize, m_hat: usize) -> Result<Gf2Matrix> {
    if m > l {
        return Err(invalid(format!(
            "fading level {m} exceeds input length {l}"
        )));
    }
    if m > m_hat {
        return Err(invalid(format!(
            "fading level {m} exceeds receiver alignment {m_hat}"
        )));
    }
    let mut b = Gf2Matrix::zeros(m_hat, l);
    let shift = m_hat - m;
    for k in 0..m {
        b.set(shift + k, k, true);
    }
    Ok(b)
}
