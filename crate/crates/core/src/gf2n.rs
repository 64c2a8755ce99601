//! Arithmetic in GF(2^n) for `2 <= n <= 16`.
//!
//! Elements are integers in `[0, 2^n)` read as coordinates in the polynomial
//! basis `1, x, ..., x^(n-1)` of `GF(2)[x] / (modulus)`. Addition is XOR.
//! Multiplication goes through exp/log tables of a primitive element found at
//! construction time; the carry-less reference multiplier [`clmul_mod`] stays
//! available as an independent oracle.
//!
//! Inversion follows the `0^{-1} = 0` convention, so [`FieldContext::inv0`] is a
//! total involution of the field.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// An element of some [`FieldContext`]; valid only for the context it came from.
pub type FieldElement = u32;

pub const MIN_DEGREE: u32 = 2;
pub const MAX_DEGREE: u32 = 16;

/// Lexicographically smallest irreducible polynomial of each degree 2..=16.
pub const DEFAULT_MODULI: [u32; 15] =
    [0x7, 0xb, 0x13, 0x25, 0x43, 0x83, 0x11b, 0x203, 0x409, 0x805, 0x1009, 0x201b, 0x4021, 0x8003, 0x1002b];

/// Degree of a nonzero polynomial bitmask.
#[inline]
fn degree(p: u64) -> u32 {
    63 - p.leading_zeros()
}

/// Remainder of `a` modulo `b` in `GF(2)[x]`.
pub fn poly_mod(mut a: u64, b: u64) -> u64 {
    assert!(b != 0, "division by the zero polynomial");
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

/// Carry-less product of `a` and `b` reduced modulo `modulus`.
pub fn clmul_mod(a: u32, b: u32, modulus: u32) -> u32 {
    let mut prod = 0u64;
    let (a, mut b) = (a as u64, b);
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            prod ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    poly_mod(prod, modulus as u64) as u32
}

/// Irreducibility over GF(2) by trial division with every polynomial of degree
/// `1..=deg/2`.
pub fn is_irreducible(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let n = degree(p as u64);
    if n == 0 {
        return false;
    }
    let limit = 1u64 << (n / 2 + 1);
    (2..limit).all(|d| poly_mod(p as u64, d) != 0)
}

/// All irreducible polynomials of degree `n`, in increasing bitmask order.
pub fn irreducibles(n: u32) -> impl Iterator<Item = u32> {
    ((1u32 << n)..(1u32 << (n + 1))).filter(|&p| is_irreducible(p))
}

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            out.push(p);
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

fn pow_slow(mut a: u32, mut e: u64, modulus: u32) -> u32 {
    let mut r = 1u32;
    while e != 0 {
        if e & 1 == 1 {
            r = clmul_mod(r, a, modulus);
        }
        a = clmul_mod(a, a, modulus);
        e >>= 1;
    }
    r
}

/// A field specification: degree plus an optional explicit modulus.
///
/// Textual form is `"n"` or `"n:0xHEX"`, e.g. `"5:0x25"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    pub n: u32,
    pub modulus: Option<u32>,
}

impl FieldSpec {
    pub fn build(&self) -> Result<FieldContext> {
        FieldContext::new(self.n, self.modulus)
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (deg, modulus) = match s.split_once(':') {
            Some((d, m)) => (d, Some(parse_hex(m)?)),
            None => (s, None),
        };
        let n = deg.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad field degree {deg:?}")))?;
        Ok(FieldSpec { n, modulus })
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.modulus {
            Some(m) => write!(f, "{}:{:#x}", self.n, m),
            None => write!(f, "{}", self.n),
        }
    }
}

/// Parses `0x`-prefixed or bare hexadecimal.
pub fn parse_hex(s: &str) -> Result<u32> {
    let t = s.trim();
    let digits = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")).unwrap_or(t);
    u32::from_str_radix(digits, 16).map_err(|_| Error::Parse(format!("bad hex value {s:?}")))
}

/// Formats an element as lowercase `0x`-prefixed hex.
pub fn hex(a: FieldElement) -> String {
    format!("{a:#x}")
}

/// A concrete model of GF(2^n). Immutable after construction.
#[derive(Clone)]
pub struct FieldContext {
    n: u32,
    modulus: u32,
    generator: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    trace_mask: u32,
    dual_basis: Vec<u32>,
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.n, self.modulus)
    }
}

impl PartialEq for FieldContext {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.modulus == other.modulus
    }
}

impl Eq for FieldContext {}

impl FieldContext {
    /// Builds GF(2^n) with the given modulus, or the default one for `n`.
    pub fn new(n: u32, modulus: Option<u32>) -> Result<Self> {
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&n) {
            return Err(Error::Range(format!("field degree {n} outside {MIN_DEGREE}..={MAX_DEGREE}")));
        }
        let modulus = modulus.unwrap_or(DEFAULT_MODULI[(n - MIN_DEGREE) as usize]);
        if modulus >> n != 1 {
            return Err(Error::Construction(format!("modulus {modulus:#x} does not have degree {n}")));
        }
        if !is_irreducible(modulus) {
            return Err(Error::Construction(format!("modulus {modulus:#x} is reducible")));
        }

        let q = 1u32 << n;
        let group = (q - 1) as u64;
        let factors = prime_factors(group);
        let generator = (2..q)
            .find(|&g| factors.iter().all(|&p| pow_slow(g, group / p, modulus) != 1))
            .expect("a finite field always has a primitive element");

        let mut exp = vec![0u32; 2 * (q as usize - 1)];
        let mut log = vec![0u32; q as usize];
        let mut acc = 1u32;
        for i in 0..(q as usize - 1) {
            exp[i] = acc;
            exp[i + q as usize - 1] = acc;
            log[acc as usize] = i as u32;
            acc = clmul_mod(acc, generator, modulus);
        }

        let mut ctx = FieldContext { n, modulus, generator, exp, log, trace_mask: 0, dual_basis: Vec::new() };
        ctx.trace_mask = (0..n).fold(0, |m, i| m | ctx.trace_direct(1 << i) << i);
        ctx.dual_basis = ctx.compute_dual_basis();
        Ok(ctx)
    }

    pub fn with_default_modulus(n: u32) -> Result<Self> {
        FieldContext::new(n, None)
    }

    /// Basis `θ_j` with `Tr(θ_j · x^i) = [i == j]`.
    fn compute_dual_basis(&self) -> Vec<u32> {
        let n = self.n as usize;
        let rows: Vec<u32> =
            (0..n).map(|i| (0..n).fold(0, |r, j| r | self.trace(self.mul(1 << i, 1 << j)) << j)).collect();
        let gram = BitMatrix::from_rows(n, &rows).expect("n <= 16");
        // the trace form is nondegenerate, so the Gram matrix is invertible
        let inv = gram.inverse().expect("trace form is nondegenerate");
        inv.row_masks()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// The primitive element used for the exp/log tables.
    pub fn generator(&self) -> FieldElement {
        self.generator
    }

    /// Field size `2^n`.
    pub fn order(&self) -> u32 {
        1 << self.n
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec { n: self.n, modulus: Some(self.modulus) }
    }

    /// Spec string `"n:0xHEX"`.
    pub fn spec_string(&self) -> String {
        self.spec().to_string()
    }

    pub fn elements(&self) -> std::ops::Range<FieldElement> {
        0..self.order()
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        a < self.order()
    }

    pub fn check(&self, a: FieldElement) -> Result<FieldElement> {
        if self.contains(a) {
            Ok(a)
        } else {
            Err(Error::Argument(format!("{a:#x} is not an element of GF(2^{})", self.n)))
        }
    }

    /// Bit `i` is `Tr(x^i)`; `Tr(a)` is the parity of `a & trace_mask`.
    pub fn trace_mask(&self) -> u32 {
        self.trace_mask
    }

    pub fn dual_basis(&self) -> &[FieldElement] {
        &self.dual_basis
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
        }
    }

    #[inline]
    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    /// `a^e`, with `0^0 = 1`.
    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        if a == 0 {
            return u32::from(e == 0);
        }
        let group = (self.order() - 1) as u64;
        let l = (self.log[a as usize] as u64 * (e % group)) % group;
        self.exp[l as usize]
    }

    /// `a^(2^n - 2)`: the inverse for `a != 0`, and `0` at zero.
    #[inline]
    pub fn inv0(&self, a: FieldElement) -> FieldElement {
        if a == 0 {
            0
        } else {
            let group = self.order() - 1;
            self.exp[((group - self.log[a as usize]) % group) as usize]
        }
    }

    /// Discrete logarithm base [`generator`](Self::generator); `None` at zero.
    pub fn log(&self, a: FieldElement) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize])
    }

    /// `g^i` for the table generator.
    pub fn exp(&self, i: u64) -> FieldElement {
        self.exp[(i % (self.order() as u64 - 1)) as usize]
    }

    /// Frobenius power `a^(2^k)`; `k` is taken modulo `n`, so `k = n - 1` is the square root.
    #[inline]
    pub fn pow2k(&self, a: FieldElement, k: u32) -> FieldElement {
        if a == 0 {
            return 0;
        }
        let group = (self.order() - 1) as u64;
        let k = k % self.n;
        let l = ((self.log[a as usize] as u64) << k) % group;
        self.exp[l as usize]
    }

    pub fn sqrt(&self, a: FieldElement) -> FieldElement {
        self.pow2k(a, self.n - 1)
    }

    /// Absolute trace, through the precomputed linear mask.
    #[inline]
    pub fn trace(&self, a: FieldElement) -> u32 {
        (a & self.trace_mask).count_ones() & 1
    }

    /// Absolute trace from its definition `a + a^2 + ... + a^(2^(n-1))`.
    pub fn trace_direct(&self, a: FieldElement) -> u32 {
        let mut t = a;
        let mut sum = 0;
        for _ in 0..self.n {
            sum ^= t;
            t = clmul_mod(t, t, self.modulus);
        }
        debug_assert!(sum <= 1, "trace must land in GF(2)");
        sum
    }

    /// Membership test for the hyperplane `H_a = {x : Tr(a x) = 0}`.
    #[inline]
    pub fn in_hyperplane(&self, a: FieldElement, x: FieldElement) -> bool {
        self.trace(self.mul(a, x)) == 0
    }

    /// The hyperplane `H_a` as a sorted list. `a` must be nonzero.
    pub fn hyperplane(&self, a: FieldElement) -> Result<Vec<FieldElement>> {
        self.check(a)?;
        if a == 0 {
            return Err(Error::Argument("hyperplane H_0 is excluded (a must be nonzero)".into()));
        }
        Ok(self.elements().filter(|&x| self.in_hyperplane(a, x)).collect())
    }

    /// Divisors of `n`, ascending.
    pub fn subfield_degrees(&self) -> Vec<u32> {
        (1..=self.n).filter(|k| self.n.is_multiple_of(*k)).collect()
    }

    /// The subfield of order `2^k`, as `{0} ∪ {x : x^(2^k - 1) = 1}`, sorted.
    pub fn subfield_elements(&self, k: u32) -> Result<Vec<FieldElement>> {
        if k == 0 || !self.n.is_multiple_of(k) {
            return Err(Error::Argument(format!("{k} does not divide {}", self.n)));
        }
        let e = (1u64 << k) - 1;
        Ok(self.elements().filter(|&x| x == 0 || self.pow(x, e) == 1).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_moduli_are_smallest_irreducibles() {
        for n in MIN_DEGREE..=MAX_DEGREE {
            let first = irreducibles(n).next().unwrap();
            assert_eq!(DEFAULT_MODULI[(n - 2) as usize], first, "n = {n}");
        }
    }

    #[test]
    fn make_field_examples() {
        assert_eq!(FieldContext::new(3, None).unwrap().modulus(), 0b1011);
        assert!(FieldContext::new(4, Some(0b10011)).is_ok());
        // x^4+x^3+x^2+x+1 is the 5th cyclotomic polynomial; 2 has order 4 mod 5
        assert!(is_irreducible(0b11111));
        assert!(FieldContext::new(4, Some(0b11111)).is_ok());
        // (x^2+x+1)^2
        assert!(matches!(FieldContext::new(4, Some(0b10101)), Err(Error::Construction(_))));
        assert!(matches!(FieldContext::new(1, None), Err(Error::Range(_))));
        assert!(matches!(FieldContext::new(17, None), Err(Error::Range(_))));
        assert!(matches!(FieldContext::new(4, Some(0b1011)), Err(Error::Construction(_))));
    }

    #[test]
    fn table_mul_matches_clmul() {
        for n in 2..=8 {
            let f = FieldContext::new(n, None).unwrap();
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.mul(a, b), clmul_mod(a, b, f.modulus()));
                }
            }
        }
    }

    #[test]
    fn generator_order_in_gf8() {
        let f = FieldContext::new(3, None).unwrap();
        let g = f.generator();
        let powers: Vec<u32> = (0..7).map(|i| pow_slow(g, i, f.modulus())).collect();
        let mut sorted = powers.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 7);
        assert_eq!(f.mul(g, powers[6]), 1);
    }

    #[test]
    fn inverse_convention() {
        let f = FieldContext::new(6, None).unwrap();
        assert_eq!(f.inv0(0), 0);
        assert_eq!(f.inv0(1), 1);
        for a in 1..f.order() {
            assert_eq!(f.mul(a, f.inv0(a)), 1);
            assert_eq!(f.inv0(a), f.pow(a, (f.order() - 2) as u64));
        }
    }

    #[test]
    fn trace_examples() {
        for n in 2..=10 {
            let f = FieldContext::new(n, None).unwrap();
            assert_eq!(f.trace(0), 0);
            assert_eq!(f.trace(1), n % 2);
            let zeros = f.elements().filter(|&a| f.trace(a) == 0).count();
            assert_eq!(zeros, 1 << (n - 1));
        }
    }

    #[test]
    fn frobenius() {
        let f = FieldContext::new(7, None).unwrap();
        for a in f.elements() {
            assert_eq!(f.pow2k(a, 0), a);
            let r = f.pow2k(a, 6);
            assert_eq!(f.mul(r, r), a);
            let mut t = a;
            for _ in 0..7 {
                t = f.pow2k(t, 1);
            }
            assert_eq!(t, a);
        }
    }

    #[test]
    fn hyperplanes() {
        let f = FieldContext::new(5, None).unwrap();
        assert!(matches!(f.hyperplane(0), Err(Error::Argument(_))));
        for a in 1..32 {
            let h = f.hyperplane(a).unwrap();
            assert_eq!(h.len(), 16);
            assert!(h.contains(&0));
            for &x in &h {
                for &y in &h {
                    assert!(f.in_hyperplane(a, x ^ y));
                }
            }
            for b in (a + 1)..32 {
                let both = f.elements().filter(|&x| f.in_hyperplane(a, x) && f.in_hyperplane(b, x));
                assert_eq!(both.count(), 8);
            }
        }
    }

    #[test]
    fn subfields() {
        let f = FieldContext::new(6, None).unwrap();
        assert_eq!(f.subfield_elements(1).unwrap(), vec![0, 1]);
        assert_eq!(f.subfield_elements(6).unwrap().len(), 64);
        let f4 = f.subfield_elements(2).unwrap();
        assert_eq!(f4.len(), 4);
        for &x in &f4[1..] {
            assert_eq!(f.mul(f.mul(x, x), x), 1);
        }
        let f8 = f.subfield_elements(3).unwrap();
        for &x in &f8 {
            for &y in &f8 {
                assert!(f8.contains(&(x ^ y)));
                assert!(f8.contains(&f.mul(x, y)));
            }
        }
        assert!(matches!(f.subfield_elements(4), Err(Error::Argument(_))));
    }

    #[test]
    fn field_spec_text() {
        let s: FieldSpec = "5:0x25".parse().unwrap();
        assert_eq!(s, FieldSpec { n: 5, modulus: Some(0x25) });
        assert_eq!(s.to_string(), "5:0x25");
        let d: FieldSpec = "7".parse().unwrap();
        assert_eq!(d.build().unwrap().spec_string(), "7:0x83");
        assert!("x:0x25".parse::<FieldSpec>().is_err());
        assert!("5:0xzz".parse::<FieldSpec>().is_err());
    }

    #[test]
    fn dual_basis_is_dual() {
        for n in 2..=12 {
            let f = FieldContext::new(n, None).unwrap();
            for (j, &t) in f.dual_basis().iter().enumerate() {
                for i in 0..n as usize {
                    assert_eq!(f.trace(f.mul(t, 1 << i)), u32::from(i == j));
                }
            }
        }
    }
}
