//! Vectorial Boolean functions `F: GF(2^n) -> GF(2^n)` as exhaustive value tables.
//!
//! Provides permutation tests, differential and Walsh spectra, reduced univariate
//! interpolation, and checkers for explicit EA- and CCZ-equivalence witnesses.
//! Nothing here decides equivalence without a witness.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::gf2n::{parse_hex, FieldContext, FieldElement, FieldSpec};
use crate::linmap::{same_field, LinearizedPoly};

/// Multiset of integers, serialized as sorted `[value, count]` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Spectrum(BTreeMap<i64, u64>);

impl Spectrum {
    pub fn new() -> Self {
        Spectrum(BTreeMap::new())
    }

    pub fn add(&mut self, value: i64, count: u64) {
        if count > 0 {
            *self.0.entry(value).or_insert(0) += count;
        }
    }

    pub fn merge(mut self, other: Spectrum) -> Spectrum {
        for (v, c) in other.0 {
            self.add(v, c);
        }
        self
    }

    pub fn pairs(&self) -> Vec<(i64, u64)> {
        self.0.iter().map(|(&v, &c)| (v, c)).collect()
    }

    pub fn count(&self, value: i64) -> u64 {
        self.0.get(&value).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn max_value(&self) -> Option<i64> {
        self.0.keys().next_back().copied()
    }

    pub fn values(&self) -> impl Iterator<Item = i64> + '_ {
        self.0.keys().copied()
    }
}

impl FromIterator<i64> for Spectrum {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        let mut s = Spectrum::new();
        for v in iter {
            s.add(v, 1);
        }
        s
    }
}

impl Serialize for Spectrum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for (v, c) in &self.0 {
            seq.serialize_element(&(v, c))?;
        }
        seq.end()
    }
}

/// The value table of a function on the field.
#[derive(Clone)]
pub struct TruthTable {
    ctx: Arc<FieldContext>,
    values: Vec<FieldElement>,
}

impl PartialEq for TruthTable {
    fn eq(&self, other: &Self) -> bool {
        *self.ctx == *other.ctx && self.values == other.values
    }
}

impl Eq for TruthTable {}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable[{}]{:x?}", self.ctx.spec_string(), self.values)
    }
}

impl TruthTable {
    pub fn new(ctx: Arc<FieldContext>, values: Vec<FieldElement>) -> Result<Self> {
        if values.len() != ctx.order() as usize {
            return Err(Error::Argument(format!("truth table needs {} entries, got {}", ctx.order(), values.len())));
        }
        if let Some(&bad) = values.iter().find(|&&v| !ctx.contains(v)) {
            return Err(Error::Argument(format!("table value {bad:#x} outside the field")));
        }
        Ok(TruthTable { ctx, values })
    }

    pub fn from_fn(ctx: Arc<FieldContext>, f: impl FnMut(FieldElement) -> FieldElement) -> Self {
        let values = ctx.elements().map(f).collect();
        TruthTable { ctx, values }
    }

    pub fn identity(ctx: Arc<FieldContext>) -> Self {
        Self::from_fn(ctx, |x| x)
    }

    /// `x -> x^k`.
    pub fn power(ctx: Arc<FieldContext>, k: u64) -> Self {
        let c = ctx.clone();
        Self::from_fn(ctx, move |x| c.pow(x, k))
    }

    /// `x -> x^-1` with `0 -> 0`.
    pub fn inverse_function(ctx: Arc<FieldContext>) -> Self {
        let c = ctx.clone();
        Self::from_fn(ctx, move |x| c.inv0(x))
    }

    pub fn from_linearized(l: &LinearizedPoly) -> Self {
        Self::from_fn(l.ctx().clone(), |x| l.eval(x))
    }

    /// Evaluates a univariate polynomial `Σ a_j x^j` at every element.
    pub fn from_polynomial(ctx: Arc<FieldContext>, coeffs: &[FieldElement]) -> Self {
        let c = ctx.clone();
        Self::from_fn(ctx, move |x| eval_polynomial(&c, coeffs, x))
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn values(&self) -> &[FieldElement] {
        &self.values
    }

    #[inline]
    pub fn at(&self, x: FieldElement) -> FieldElement {
        self.values[x as usize]
    }

    pub fn is_permutation(&self) -> bool {
        is_permutation_slice(&self.values)
    }

    pub fn compositional_inverse(&self) -> Option<TruthTable> {
        if !self.is_permutation() {
            return None;
        }
        let mut inv = vec![0; self.values.len()];
        for (x, &y) in self.values.iter().enumerate() {
            inv[y as usize] = x as u32;
        }
        Some(TruthTable { ctx: self.ctx.clone(), values: inv })
    }

    /// `x -> self(other(x))`.
    pub fn compose(&self, other: &TruthTable) -> Result<TruthTable> {
        same_field(&self.ctx, &other.ctx)?;
        let values = other.values.iter().map(|&y| self.values[y as usize]).collect();
        Ok(TruthTable { ctx: self.ctx.clone(), values })
    }

    fn ddt_row(&self, a: u32) -> Vec<u32> {
        let mut row = vec![0u32; self.values.len()];
        for (x, &fx) in self.values.iter().enumerate() {
            row[(fx ^ self.values[x ^ a as usize]) as usize] += 1;
        }
        row
    }

    /// `max_{a != 0, b} |{x : F(x) + F(x + a) = b}|`.
    pub fn differential_uniformity(&self) -> u32 {
        (1..self.ctx.order()).into_par_iter().map(|a| self.ddt_row(a).into_iter().max().unwrap_or(0)).max().unwrap_or(0)
    }

    /// Multiset of all difference-distribution counts with `a != 0`, zeros included.
    pub fn differential_spectrum(&self) -> Spectrum {
        (1..self.ctx.order())
            .into_par_iter()
            .map(|a| self.ddt_row(a).into_iter().map(i64::from).collect::<Spectrum>())
            .reduce(Spectrum::new, Spectrum::merge)
    }

    /// `W(a, b) = Σ_x (-1)^Tr(b F(x) + a x)` for fixed `b`, indexed by `a`.
    /// Uses a fast Walsh-Hadamard transform over the coordinate bits.
    pub fn walsh_coefficients(&self, b: FieldElement) -> Vec<i32> {
        let f = &*self.ctx;
        let mut w: Vec<i32> = self.values.iter().map(|&y| if f.trace(f.mul(b, y)) == 0 { 1 } else { -1 }).collect();
        fast_walsh_hadamard(&mut w);
        // Tr(a x) = <u(a), x> with u(a)_i = Tr(a x^i)
        f.elements().map(|a| w[trace_functional(f, a) as usize]).collect()
    }

    /// Walsh coefficient from its defining sum; the oracle for the fast path.
    pub fn walsh_direct(&self, a: FieldElement, b: FieldElement) -> i32 {
        let f = &*self.ctx;
        f.elements()
            .map(|x| {
                let e = f.trace(f.mul(b, self.at(x))) ^ f.trace(f.mul(a, x));
                if e == 0 {
                    1
                } else {
                    -1
                }
            })
            .sum()
    }

    /// Multiset of `|W(a, b)|` over all `a` and `b != 0`, by direct summation.
    pub fn walsh_spectrum_direct(&self) -> Spectrum {
        (1..self.ctx.order())
            .into_par_iter()
            .map(|b| self.ctx.elements().map(|a| i64::from(self.walsh_direct(a, b).abs())).collect::<Spectrum>())
            .reduce(Spectrum::new, Spectrum::merge)
    }

    /// Same multiset as [`walsh_spectrum_direct`](Self::walsh_spectrum_direct),
    /// one fast transform per `b`.
    pub fn walsh_spectrum_fast(&self) -> Spectrum {
        let f = &*self.ctx;
        (1..f.order())
            .into_par_iter()
            .map(|b| {
                let mut w: Vec<i32> =
                    self.values.iter().map(|&y| if f.trace(f.mul(b, y)) == 0 { 1 } else { -1 }).collect();
                fast_walsh_hadamard(&mut w);
                w.into_iter().map(|v| i64::from(v.abs())).collect::<Spectrum>()
            })
            .reduce(Spectrum::new, Spectrum::merge)
    }

    /// Extended Walsh spectrum (absolute values), a CCZ invariant.
    pub fn walsh_spectrum(&self) -> Spectrum {
        if self.ctx.n() <= 8 {
            self.walsh_spectrum_direct()
        } else {
            self.walsh_spectrum_fast()
        }
    }

    /// Coefficients `a_0..a_{2^n - 1}` of the unique polynomial of degree `< 2^n`
    /// agreeing with the table.
    pub fn interpolate(&self) -> Vec<FieldElement> {
        let q = self.ctx.order();
        (0..q).into_par_iter().map(|j| self.interpolate_coefficient(j)).collect()
    }

    /// One interpolation coefficient: `a_0 = F(0)`, `a_{2^n-1} = Σ_x F(x)`, and
    /// `a_j = Σ_{x != 0} F(x) x^-j` otherwise.
    pub fn interpolate_coefficient(&self, j: u32) -> FieldElement {
        let f = &*self.ctx;
        let q = f.order();
        let group = (q - 1) as u64;
        if j == 0 {
            return self.values[0];
        }
        if j == q - 1 {
            return self.values.iter().fold(0, |acc, &v| acc ^ v);
        }
        let shift = group - j as u64;
        let mut acc = 0;
        for x in 1..q {
            let fx = self.values[x as usize];
            if fx == 0 {
                continue;
            }
            let t = f.log(x).expect("nonzero") as u64;
            acc ^= f.mul(fx, f.exp(t * shift));
        }
        acc
    }

    /// Text form: header `n:0xHEX` then one hex value per line.
    pub fn to_text(&self) -> String {
        let mut s = self.ctx.spec_string();
        s.push('\n');
        for v in &self.values {
            s.push_str(&format!("{v:#x}\n"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<TruthTable> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty truth table".into()))?;
        let spec: FieldSpec = header.parse()?;
        let ctx = Arc::new(spec.build()?);
        let values = lines.map(parse_hex).collect::<Result<Vec<_>>>()?;
        TruthTable::new(ctx, values).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Occupancy scan over `[0, len)`.
pub fn is_permutation_slice(values: &[FieldElement]) -> bool {
    let mut seen = vec![0u64; values.len().div_ceil(64)];
    for &v in values {
        let (w, b) = ((v / 64) as usize, v % 64);
        if w >= seen.len() || seen[w] >> b & 1 == 1 {
            return false;
        }
        seen[w] |= 1 << b;
    }
    true
}

/// Horner evaluation of `Σ a_j x^j`.
pub fn eval_polynomial(ctx: &FieldContext, coeffs: &[FieldElement], x: FieldElement) -> FieldElement {
    coeffs.iter().rev().fold(0, |acc, &c| ctx.mul(acc, x) ^ c)
}

/// In-place unnormalized Walsh-Hadamard transform; length must be a power of two.
pub fn fast_walsh_hadamard(w: &mut [i32]) {
    let len = w.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for i in (0..len).step_by(2 * h) {
            for j in i..i + h {
                let (u, v) = (w[j], w[j + h]);
                w[j] = u + v;
                w[j + h] = u - v;
            }
        }
        h *= 2;
    }
}

/// Coordinates of the linear form `x -> Tr(a x)`: bit `i` is `Tr(a x^i)`.
pub fn trace_functional(ctx: &FieldContext, a: FieldElement) -> u32 {
    (0..ctx.n()).fold(0, |u, i| u | ctx.trace(ctx.mul(a, 1 << i)) << i)
}

/// An affine map `x -> M x + t` of the field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub matrix: BitMatrix,
    pub translation: FieldElement,
}

impl AffineMap {
    pub fn identity(n: u32) -> Self {
        AffineMap { matrix: BitMatrix::identity(n as usize), translation: 0 }
    }

    pub fn zero(n: u32) -> Self {
        AffineMap { matrix: BitMatrix::zero(n as usize, n as usize), translation: 0 }
    }

    pub fn from_linear(l: &LinearizedPoly) -> Self {
        AffineMap { matrix: l.matrix(), translation: 0 }
    }

    #[inline]
    pub fn apply(&self, x: FieldElement) -> FieldElement {
        self.matrix.apply(x) ^ self.translation
    }

    pub fn is_invertible(&self) -> bool {
        self.matrix.is_invertible()
    }

    pub fn inverse(&self) -> Option<AffineMap> {
        let inv = self.matrix.inverse()?;
        let translation = inv.apply(self.translation);
        Some(AffineMap { matrix: inv, translation })
    }

    pub fn random<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Self {
        let mask = (1u32 << n) - 1;
        let cols = (0..n).map(|_| rng.gen::<u32>() & mask).collect();
        AffineMap {
            matrix: BitMatrix::from_columns(n as usize, cols).expect("n <= 16"),
            translation: rng.gen::<u32>() & mask,
        }
    }

    pub fn random_permutation<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Self {
        loop {
            let a = Self::random(n, rng);
            if a.is_invertible() {
                return a;
            }
        }
    }
}

/// An affine map of `GF(2^n) × GF(2^n)`, acting on the packed word `x | y << n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMapProduct {
    n: u32,
    matrix: BitMatrix,
    translation: u32,
}

impl AffineMapProduct {
    pub fn new(n: u32, matrix: BitMatrix, translation: u32) -> Result<Self> {
        let d = 2 * n as usize;
        if matrix.rows() != d || matrix.ncols() != d {
            return Err(Error::Argument(format!("expected a {d}x{d} matrix")));
        }
        if d < 32 && translation >> d != 0 {
            return Err(Error::Argument("translation wider than 2n bits".into()));
        }
        Ok(AffineMapProduct { n, matrix, translation })
    }

    pub fn identity(n: u32) -> Self {
        AffineMapProduct { n, matrix: BitMatrix::identity(2 * n as usize), translation: 0 }
    }

    /// `(x, y) -> (y, x)`.
    pub fn swap(n: u32) -> Self {
        Self::from_affine_fn(n, |x, y| (y, x))
    }

    /// Samples an affine function at `0` and the unit vectors.
    pub fn from_affine_fn(n: u32, f: impl Fn(u32, u32) -> (u32, u32)) -> Self {
        let pack = |(x, y): (u32, u32)| x | y << n;
        let mask = (1u32 << n) - 1;
        let t = pack(f(0, 0));
        let cols = (0..2 * n)
            .map(|j| {
                let v = 1u32 << j;
                pack(f(v & mask, v >> n)) ^ t
            })
            .collect();
        let matrix = BitMatrix::from_columns(2 * n as usize, cols).expect("2n <= 32");
        AffineMapProduct { n, matrix, translation: t }
    }

    /// The graph map induced by an EA witness `G = A1 ∘ F ∘ A2 + A3`:
    /// `(u, v) -> (A2^-1(u), A1(v) + A3(A2^-1(u)))`.
    pub fn from_ea(n: u32, a1: &AffineMap, a2: &AffineMap, a3: &AffineMap) -> Result<Self> {
        let a2inv = a2.inverse().ok_or_else(|| Error::Argument("A2 is not invertible".into()))?;
        Ok(Self::from_affine_fn(n, |u, v| {
            let x = a2inv.apply(u);
            (x, a1.apply(v) ^ a3.apply(x))
        }))
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn translation(&self) -> u32 {
        self.translation
    }

    pub fn apply(&self, x: u32, y: u32) -> (u32, u32) {
        let v = self.matrix.apply(x | y << self.n) ^ self.translation;
        let mask = (1u32 << self.n) - 1;
        (v & mask, v >> self.n)
    }

    pub fn is_invertible(&self) -> bool {
        self.matrix.is_invertible()
    }
}

fn graph_keys(t: &TruthTable) -> Vec<u32> {
    let n = t.ctx.n();
    t.values.iter().enumerate().map(|(x, &y)| x as u32 | y << n).collect()
}

/// Whether `A` maps the graph of `F` onto the graph of `G`.
pub fn check_ccz_witness(f: &TruthTable, g: &TruthTable, a: &AffineMapProduct) -> Result<bool> {
    same_field(&f.ctx, &g.ctx)?;
    if a.n != f.ctx.n() {
        return Err(Error::Argument("witness dimension does not match the field".into()));
    }
    if !a.is_invertible() {
        return Err(Error::Argument("CCZ witness is not invertible".into()));
    }
    let n = a.n;
    let mut mapped: Vec<u32> = f
        .values
        .iter()
        .enumerate()
        .map(|(x, &y)| {
            let (u, v) = a.apply(x as u32, y);
            u | v << n
        })
        .collect();
    mapped.sort_unstable();
    let mut target = graph_keys(g);
    target.sort_unstable();
    Ok(mapped == target)
}

/// Whether `A1(F(A2(x))) + A3(x) = G(x)` for every `x`.
pub fn check_ea_witness(
    f: &TruthTable,
    g: &TruthTable,
    a1: &AffineMap,
    a2: &AffineMap,
    a3: &AffineMap,
) -> Result<bool> {
    same_field(&f.ctx, &g.ctx)?;
    if !a1.is_invertible() || !a2.is_invertible() {
        return Err(Error::Argument("A1 and A2 must be affine permutations".into()));
    }
    Ok(f.ctx.elements().all(|x| a1.apply(f.at(a2.apply(x))) ^ a3.apply(x) == g.at(x)))
}

/// Applies an EA transformation: `x -> A1(F(A2(x))) + A3(x)`.
pub fn apply_ea(f: &TruthTable, a1: &AffineMap, a2: &AffineMap, a3: &AffineMap) -> TruthTable {
    TruthTable::from_fn(f.ctx.clone(), |x| a1.apply(f.at(a2.apply(x))) ^ a3.apply(x))
}

/// CCZ-equivalence of power maps `x^k` and `x^l`: some `i` has
/// `k = 2^i l` or `k l = 2^i` modulo `2^n - 1`.
pub fn power_ccz_equivalent(k: u64, l: u64, n: u32) -> bool {
    let m = (1u64 << n) - 1;
    let (k, l) = (k % m, l % m);
    (0..n).any(|i| {
        let p = (1u64 << i) % m;
        k == (p * l) % m || (k * l) % m == p
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn field(n: u32) -> Arc<FieldContext> {
        Arc::new(FieldContext::new(n, None).unwrap())
    }

    #[test]
    fn permutation_examples() {
        let f = field(5);
        assert!(TruthTable::identity(f.clone()).is_permutation());
        assert!(!TruthTable::from_fn(f.clone(), |_| 0).is_permutation());
        assert!(TruthTable::inverse_function(f).is_permutation());
    }

    #[test]
    fn table_i_values() {
        assert_eq!(TruthTable::power(field(5), 3).differential_uniformity(), 2);
        assert_eq!(TruthTable::inverse_function(field(5)).differential_uniformity(), 2);
        assert_eq!(TruthTable::inverse_function(field(4)).differential_uniformity(), 4);
    }

    #[test]
    fn differential_spectrum_totals() {
        let f = field(4);
        let s = TruthTable::inverse_function(f).differential_spectrum();
        assert_eq!(s.total(), 15 * 16);
        assert_eq!(s.max_value(), Some(4));
        // each row sums to 2^n
        let sum: i64 = s.pairs().iter().map(|&(v, c)| v * c as i64).sum();
        assert_eq!(sum, 15 * 16);
        assert!(s.values().all(|v| v % 2 == 0));
    }

    #[test]
    fn walsh_constant_zero() {
        let f = field(4);
        let t = TruthTable::from_fn(f, |_| 0);
        let s = t.walsh_spectrum();
        assert_eq!(s.pairs(), vec![(0, 15 * 15), (16, 15)]);
    }

    #[test]
    fn walsh_parseval_and_paths_agree() {
        for n in 3..=7 {
            let f = field(n);
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            let t = TruthTable::from_fn(f.clone(), |_| rng.gen_range(0..f.order()));
            for b in 1..f.order() {
                let w = t.walsh_coefficients(b);
                let parseval: i64 = w.iter().map(|&v| (v as i64) * (v as i64)).sum();
                assert_eq!(parseval, 1i64 << (2 * n));
                if b < 4 {
                    for a in f.elements() {
                        assert_eq!(w[a as usize], t.walsh_direct(a, b));
                    }
                }
            }
            assert_eq!(t.walsh_spectrum_direct(), t.walsh_spectrum_fast());
        }
    }

    #[test]
    fn interpolation_examples() {
        let f = field(4);
        let id = TruthTable::identity(f.clone()).interpolate();
        assert_eq!(id[1], 1);
        assert!(id.iter().enumerate().all(|(j, &c)| j == 1 || c == 0));
        let k = TruthTable::from_fn(f.clone(), |_| 7).interpolate();
        assert_eq!(k[0], 7);
        assert!(k[1..].iter().all(|&c| c == 0));

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let l = LinearizedPoly::random(f.clone(), &mut rng);
        let coeffs = TruthTable::from_linearized(&l).interpolate();
        for (j, &c) in coeffs.iter().enumerate() {
            match (0..4).find(|&i| 1usize << i == j) {
                Some(i) => assert_eq!(c, l.coeffs()[i]),
                None => assert_eq!(c, 0, "coefficient {j}"),
            }
        }
    }

    #[test]
    fn interpolation_round_trip() {
        for n in 2..=7 {
            let f = field(n);
            let mut rng = ChaCha8Rng::seed_from_u64(100 + n as u64);
            let t = TruthTable::from_fn(f.clone(), |_| rng.gen_range(0..f.order()));
            let back = TruthTable::from_polynomial(f.clone(), &t.interpolate());
            assert_eq!(back, t);
        }
    }

    #[test]
    fn ccz_witness_examples() {
        let f = field(5);
        let id = AffineMapProduct::identity(5);
        let inv = TruthTable::inverse_function(f.clone());
        assert!(check_ccz_witness(&inv, &inv, &id).unwrap());
        assert!(check_ccz_witness(&inv, &inv, &AffineMapProduct::swap(5)).unwrap());
        let cube = TruthTable::power(f.clone(), 3);
        let cube_inv = cube.compositional_inverse().unwrap();
        assert!(check_ccz_witness(&cube, &cube_inv, &AffineMapProduct::swap(5)).unwrap());
        assert!(!check_ccz_witness(&cube, &cube, &AffineMapProduct::swap(5)).unwrap());
        let singular = AffineMapProduct::new(5, BitMatrix::zero(10, 10), 0).unwrap();
        assert!(matches!(check_ccz_witness(&cube, &cube, &singular), Err(Error::Argument(_))));
    }

    #[test]
    fn ea_witness_examples() {
        let f = field(5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cube = TruthTable::power(f.clone(), 3);
        let id = AffineMap::identity(5);
        let zero = AffineMap::zero(5);
        assert!(check_ea_witness(&cube, &cube, &id, &id, &zero).unwrap());
        let l = LinearizedPoly::random(f.clone(), &mut rng);
        let g = TruthTable::from_fn(f.clone(), |x| cube.at(x) ^ l.eval(x));
        assert!(check_ea_witness(&cube, &g, &id, &id, &AffineMap::from_linear(&l)).unwrap());
        assert!(matches!(check_ea_witness(&cube, &g, &zero, &id, &zero), Err(Error::Argument(_))));

        for _ in 0..10 {
            let a1 = AffineMap::random_permutation(5, &mut rng);
            let a2 = AffineMap::random_permutation(5, &mut rng);
            let a3 = AffineMap::random(5, &mut rng);
            let g = apply_ea(&cube, &a1, &a2, &a3);
            assert!(check_ea_witness(&cube, &g, &a1, &a2, &a3).unwrap());
            let w = AffineMapProduct::from_ea(5, &a1, &a2, &a3).unwrap();
            assert!(check_ccz_witness(&cube, &g, &w).unwrap());
        }
    }

    #[test]
    fn power_equivalence() {
        for n in 3..=8u32 {
            let m = (1u64 << n) - 1;
            for k in 1..m {
                assert!(power_ccz_equivalent(k, k, n));
                assert!(power_ccz_equivalent((2 * k) % m, k, n));
            }
        }
        // oracle: scan all i for both congruences
        let m = 31u64;
        let direct = (0..5).any(|i| (3 % m) == ((1u64 << i) * 30) % m || (3 * 30) % m == (1u64 << i) % m);
        assert!(!direct);
        assert!(!power_ccz_equivalent(3, 30, 5));
    }

    #[test]
    fn truth_table_text() {
        let f = field(3);
        let t = TruthTable::inverse_function(f);
        let text = t.to_text();
        assert!(text.starts_with("3:0xb\n"));
        assert_eq!(TruthTable::parse(&text).unwrap(), t);
        assert!(TruthTable::parse("3:0xb\n0x1\n").is_err());
        assert!(TruthTable::parse("").is_err());
    }
}
