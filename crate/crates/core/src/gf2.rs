//! Vectors and matrices over GF(2), packed into machine words.
//!
//! Vectors are `u32` bit masks; a [`BitMatrix`] stores its columns, so applying
//! it to a vector is an XOR over the columns selected by the set bits.

use crate::error::{Error, Result};

/// Index of the highest set bit. `v` must be nonzero.
#[inline]
pub(crate) fn top_bit(v: u32) -> u32 {
    31 - v.leading_zeros()
}

/// Reduced row echelon form of a list of vectors.
///
/// Pivots are the highest set bits; rows are sorted by decreasing pivot and each
/// pivot bit is cleared from every other row. Zero rows are dropped, so two lists
/// span the same space iff their `rref` outputs are equal.
pub fn rref(vectors: &[u32]) -> Vec<u32> {
    let mut slots: [u32; 32] = [0; 32];
    for &v in vectors {
        let mut v = v;
        while v != 0 {
            let p = top_bit(v) as usize;
            if slots[p] == 0 {
                slots[p] = v;
                break;
            }
            v ^= slots[p];
        }
    }
    // back-substitute so each pivot column holds a single one
    for p in 0..32 {
        if slots[p] == 0 {
            continue;
        }
        for q in (p + 1)..32 {
            if slots[q] >> p & 1 == 1 {
                slots[q] ^= slots[p];
            }
        }
    }
    slots.iter().rev().copied().filter(|&v| v != 0).collect()
}

/// Dimension of the span of `vectors`.
pub fn rank(vectors: &[u32]) -> usize {
    let mut slots: [u32; 32] = [0; 32];
    let mut r = 0;
    for &v in vectors {
        let mut v = v;
        while v != 0 {
            let p = top_bit(v) as usize;
            if slots[p] == 0 {
                slots[p] = v;
                r += 1;
                break;
            }
            v ^= slots[p];
        }
    }
    r
}

/// Enumerates all `2^k` GF(2) combinations of `basis`, in Gray-code order.
pub fn span(basis: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(1usize << basis.len());
    let mut acc = 0u32;
    out.push(acc);
    for i in 1u64..(1u64 << basis.len()) {
        acc ^= basis[i.trailing_zeros() as usize];
        out.push(acc);
    }
    out
}

/// A matrix over GF(2) with at most 32 rows and 32 columns, stored column-wise.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitMatrix {
    rows: usize,
    cols: Vec<u32>,
}

impl BitMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        assert!(rows <= 32 && cols <= 32);
        BitMatrix { rows, cols: vec![0; cols] }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n <= 32);
        BitMatrix { rows: n, cols: (0..n).map(|j| 1u32 << j).collect() }
    }

    /// Builds a matrix from its columns; bit `i` of `cols[j]` is entry `(i, j)`.
    pub fn from_columns(rows: usize, cols: Vec<u32>) -> Result<Self> {
        if rows > 32 || cols.len() > 32 {
            return Err(Error::Range(format!("matrix {rows}x{} exceeds 32x32", cols.len())));
        }
        let mask = row_mask(rows);
        if cols.iter().any(|&c| c & !mask != 0) {
            return Err(Error::Argument("column has bits beyond the row count".into()));
        }
        Ok(BitMatrix { rows, cols })
    }

    /// Builds a matrix from row masks; bit `j` of `rows[i]` is entry `(i, j)`.
    pub fn from_rows(ncols: usize, rows: &[u32]) -> Result<Self> {
        let mut cols = vec![0u32; ncols];
        for (i, &r) in rows.iter().enumerate() {
            for (j, c) in cols.iter_mut().enumerate() {
                *c |= (r >> j & 1) << i;
            }
        }
        BitMatrix::from_columns(rows.len(), cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn columns(&self) -> &[u32] {
        &self.cols
    }

    pub fn column(&self, j: usize) -> u32 {
        self.cols[j]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cols[j] >> i & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        if bit {
            self.cols[j] |= 1 << i;
        } else {
            self.cols[j] &= !(1 << i);
        }
    }

    /// Row `i` as a mask over the columns.
    pub fn row(&self, i: usize) -> u32 {
        self.cols.iter().enumerate().fold(0, |acc, (j, &c)| acc | (c >> i & 1) << j)
    }

    pub fn row_masks(&self) -> Vec<u32> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    /// Matrix-vector product.
    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        let mut acc = 0;
        let mut x = x;
        while x != 0 {
            let j = x.trailing_zeros() as usize;
            acc ^= self.cols[j];
            x &= x - 1;
        }
        acc
    }

    /// Product `self * other`.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.ncols() != other.rows {
            return Err(Error::Argument(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.ncols(),
                other.rows,
                other.ncols()
            )));
        }
        Ok(BitMatrix { rows: self.rows, cols: other.cols.iter().map(|&c| self.apply(c)).collect() })
    }

    pub fn transpose(&self) -> BitMatrix {
        BitMatrix { rows: self.ncols(), cols: self.row_masks() }
    }

    pub fn rank(&self) -> usize {
        rank(&self.cols)
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.ncols() && self.rank() == self.rows
    }

    /// Inverse of a square matrix, if it exists.
    pub fn inverse(&self) -> Option<BitMatrix> {
        let n = self.rows;
        if n != self.ncols() {
            return None;
        }
        let mut rows = self.row_masks();
        let mut inv: Vec<u32> = (0..n).map(|i| 1u32 << i).collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| rows[r] >> col & 1 == 1)?;
            rows.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..n {
                if r != col && rows[r] >> col & 1 == 1 {
                    rows[r] ^= rows[col];
                    inv[r] ^= inv[col];
                }
            }
        }
        BitMatrix::from_rows(n, &inv).ok()
    }

    /// Basis of the null space `{x : self * x = 0}`.
    pub fn kernel_basis(&self) -> Vec<u32> {
        let mut slots: [(u32, u32); 32] = [(0, 0); 32];
        let mut kernel = Vec::new();
        for (j, &c) in self.cols.iter().enumerate() {
            let mut v = c;
            let mut combo = 1u32 << j;
            loop {
                if v == 0 {
                    kernel.push(combo);
                    break;
                }
                let p = top_bit(v) as usize;
                if slots[p].0 == 0 {
                    slots[p] = (v, combo);
                    break;
                }
                v ^= slots[p].0;
                combo ^= slots[p].1;
            }
        }
        kernel
    }
}

#[inline]
pub(crate) fn row_mask(rows: usize) -> u32 {
    if rows >= 32 {
        u32::MAX
    } else {
        (1u32 << rows) - 1
    }
}
