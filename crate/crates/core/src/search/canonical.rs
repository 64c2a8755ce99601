//! Orbit representatives of pairs `(M1, M2)` under `A·(M1, M2) = (A M1, A M2)`.
//!
//! A pair is stored as the `n x 2n` matrix `[M1 | M2]`, one `u32` per row, with
//! column `c` of `M1` at bit `2n-1-c` and column `c` of `M2` at bit `n-1-c`.
//! Left multiplication by an invertible `A` is a row operation, so an orbit is
//! determined by the row space, and the reduced row echelon form of that row
//! space is the representative.

use crate::error::{Error, Result};
use crate::gf2::{self, BitMatrix};

/// Largest `n` accepted by [`canonical_pairs`].
pub const MAX_CANONICAL_N: u32 = 8;

/// `[M1 | M2]` as row words.
pub fn stack(m1: &BitMatrix, m2: &BitMatrix) -> Vec<u32> {
    let n = m1.rows();
    (0..n)
        .map(|i| {
            let mut w = 0;
            for c in 0..n {
                w |= u32::from(m1.get(i, c)) << (2 * n - 1 - c);
                w |= u32::from(m2.get(i, c)) << (n - 1 - c);
            }
            w
        })
        .collect()
}

/// Splits `n` row words back into `(M1, M2)`; missing rows are zero.
pub fn unstack(n: usize, rows: &[u32]) -> (BitMatrix, BitMatrix) {
    let mut m1 = BitMatrix::zero(n, n);
    let mut m2 = BitMatrix::zero(n, n);
    for (i, &w) in rows.iter().enumerate() {
        for c in 0..n {
            m1.set(i, c, w >> (2 * n - 1 - c) & 1 == 1);
            m2.set(i, c, w >> (n - 1 - c) & 1 == 1);
        }
    }
    (m1, m2)
}

/// Canonical representative of the orbit of `(M1, M2)`.
pub fn canonicalize(m1: &BitMatrix, m2: &BitMatrix) -> (BitMatrix, BitMatrix) {
    unstack(m1.rows(), &gf2::rref(&stack(m1, m2)))
}

/// `|GL_n(GF(2))|`.
pub fn gl_order(n: u32) -> u128 {
    (0..n).map(|i| (1u128 << n) - (1u128 << i)).product()
}

/// Every reduced row echelon `n x 2n` matrix, as `n` row words (zero rows last).
///
/// Ordered by rank, then by pivot mask, then by the free entries; the stream is
/// lazy, so only small `n` can be exhausted in practice.
pub fn canonical_pairs(n: u32) -> Result<impl Iterator<Item = Vec<u32>>> {
    if !(1..=MAX_CANONICAL_N).contains(&n) {
        return Err(Error::Range(format!("canonical pairs need 1 <= n <= {MAX_CANONICAL_N}, got {n}")));
    }
    let width = 2 * n;
    Ok((0..=n).flat_map(move |k| {
        (0u32..1 << width).filter(move |m| m.count_ones() == k).flat_map(move |mask| {
            let layout = Layout::new(mask, width, n);
            let total = layout.free_bits();
            (0u128..1u128 << total).map(move |code| layout.build(code))
        })
    }))
}

/// Pivot positions and, per row, the free bit positions to fill.
struct Layout {
    n: u32,
    pivots: Vec<u32>,
    free: Vec<Vec<u32>>,
}

impl Layout {
    fn new(mask: u32, width: u32, n: u32) -> Self {
        let pivots: Vec<u32> = (0..width).rev().filter(|&p| mask >> p & 1 == 1).collect();
        let free = pivots.iter().map(|&p| (0..p).filter(|&b| mask >> b & 1 == 0).collect()).collect();
        Layout { n, pivots, free }
    }

    fn free_bits(&self) -> u32 {
        self.free.iter().map(|f| f.len() as u32).sum()
    }

    fn build(&self, mut code: u128) -> Vec<u32> {
        let mut rows = vec![0u32; self.n as usize];
        for (t, &p) in self.pivots.iter().enumerate() {
            let mut w = 1 << p;
            for &b in &self.free[t] {
                w |= ((code & 1) as u32) << b;
                code >>= 1;
            }
            rows[t] = w;
        }
        rows
    }
}

/// Gaussian binomial `[m k]_2`, the number of `k`-dimensional subspaces of GF(2)^m.
pub fn gaussian_binomial(m: u32, k: u32) -> u128 {
    if k > m {
        return 0;
    }
    let num: u128 = (0..k).map(|i| (1u128 << (m - i)) - 1).product();
    let den: u128 = (0..k).map(|i| (1u128 << (i + 1)) - 1).product();
    num / den
}

/// Number of canonical representatives, `sum_{k <= n} [2n k]_2`.
pub fn canonical_count(n: u32) -> u128 {
    (0..=n).map(|k| gaussian_binomial(2 * n, k)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_gaussian_binomials() {
        for n in 1..=3 {
            assert_eq!(canonical_pairs(n).unwrap().count() as u128, canonical_count(n));
        }
        assert_eq!(canonical_count(3), 2110);
        assert!(canonical_pairs(9).is_err());
    }

    #[test]
    fn stream_is_in_rref_and_duplicate_free() {
        let n = 3;
        let all: Vec<Vec<u32>> = canonical_pairs(n).unwrap().collect();
        for rows in &all {
            let nonzero: Vec<u32> = rows.iter().copied().filter(|&r| r != 0).collect();
            assert_eq!(gf2::rref(rows), nonzero);
        }
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), all.len());
    }

    #[test]
    fn identity_zero_is_canonical() {
        for n in 2..=5 {
            let id = BitMatrix::identity(n);
            let z = BitMatrix::zero(n, n);
            assert_eq!(canonicalize(&id, &z), (id.clone(), z.clone()));
        }
    }

    #[test]
    fn stack_round_trip() {
        let m1 = BitMatrix::from_columns(4, vec![0b1010, 0b0110, 0b0001, 0b1111]).unwrap();
        let m2 = BitMatrix::from_columns(4, vec![0b0011, 0b0000, 0b1000, 0b0101]).unwrap();
        assert_eq!(unstack(4, &stack(&m1, &m2)), (m1, m2));
    }

    #[test]
    fn gl_orders() {
        assert_eq!(gl_order(2), 6);
        assert_eq!(gl_order(3), 168);
        assert_eq!(gl_order(4), 20160);
    }
}
