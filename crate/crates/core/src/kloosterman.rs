//! Kloosterman sums over GF(2^n), the quadratic form `Q`, its polar form `B`,
//! and the census of Kloosterman zeros.
//!
//! `K_n(a) = Σ_x (-1)^Tr(x^-1 + a x)` with `0^-1 = 0`. Sums are exact `i32`
//! values; at `n = 16` their magnitude stays below `2^9`.
//!
//! `Q(x) = Σ_{0 <= i < j < n} x^(2^i + 2^j)` and `B(x, y) = Tr(xy) + Tr(x) Tr(y)`.
//! For `n >= 4`, `16 | K_n(a)` exactly when `Tr(a) = Q(a) = 0`.
//!
//! [`within_weil_bound`] checks the classical Weil estimate, used here only as a
//! sanity invariant. The estimate bounds the sum over nonzero `x`, which is
//! `K_n(a) - 1` in this normalization: `|K_n(a)| <= 2^(n/2 + 1)` itself fails at
//! `n = 5`, where `K_5(a) = 12` occurs.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2n::{hex, FieldContext, FieldElement};
use crate::vbf::{fast_walsh_hadamard, trace_functional, Spectrum};

/// `K_n(a)` by direct summation over the field.
pub fn kloosterman_sum(ctx: &FieldContext, a: FieldElement) -> i32 {
    ctx.elements().map(|x| if ctx.trace(ctx.inv0(x)) ^ ctx.trace(ctx.mul(a, x)) == 0 { 1 } else { -1 }).sum()
}

/// `K_n(a)` for every `a`, indexed by `a`, from one Walsh-Hadamard transform of
/// `x -> (-1)^Tr(1/x)`.
pub fn kloosterman_sums(ctx: &FieldContext) -> Vec<i32> {
    let mut w: Vec<i32> = ctx.elements().map(|x| if ctx.trace(ctx.inv0(x)) == 0 { 1 } else { -1 }).collect();
    fast_walsh_hadamard(&mut w);
    ctx.elements().map(|a| w[trace_functional(ctx, a) as usize]).collect()
}

/// `|K - 1| <= 2^(n/2 + 1)`, checked as `(K - 1)^2 <= 2^(n+2)`. Meaningful for `a != 0`.
pub fn within_weil_bound(n: u32, k: i32) -> bool {
    let shifted = k as i64 - 1;
    shifted * shifted <= 1i64 << (n + 2)
}

/// `Q(x)` from the defining double sum.
pub fn qform(ctx: &FieldContext, x: FieldElement) -> u32 {
    let n = ctx.n();
    let powers: Vec<u32> = (0..n).map(|i| ctx.pow2k(x, i)).collect();
    let mut s = 0;
    for i in 0..n as usize {
        for j in (i + 1)..n as usize {
            s ^= ctx.mul(powers[i], powers[j]);
        }
    }
    debug_assert!(s <= 1, "Q must land in GF(2)");
    s
}

/// `Q(x)` rebuilt from its values on the polynomial basis and the polar form:
/// `Q(Σ x_k e_k) = Σ x_k Q(e_k) + Σ_{k<l} x_k x_l B(e_k, e_l)`.
pub fn qform_via_polarization(ctx: &FieldContext, x: FieldElement) -> u32 {
    let n = ctx.n();
    let bits: Vec<u32> = (0..n).filter(|&k| x >> k & 1 == 1).collect();
    let mut s = 0;
    for (idx, &k) in bits.iter().enumerate() {
        s ^= qform(ctx, 1 << k);
        for &l in &bits[idx + 1..] {
            s ^= bform(ctx, 1 << k, 1 << l);
        }
    }
    s
}

/// `B(x, y) = Tr(xy) + Tr(x) Tr(y)`.
pub fn bform(ctx: &FieldContext, x: FieldElement, y: FieldElement) -> u32 {
    ctx.trace(ctx.mul(x, y)) ^ (ctx.trace(x) & ctx.trace(y))
}

/// `B(x, y)` as the polarization `Q(x) + Q(y) + Q(x + y)`.
pub fn bform_polarized(ctx: &FieldContext, x: FieldElement, y: FieldElement) -> u32 {
    qform(ctx, x) ^ qform(ctx, y) ^ qform(ctx, x ^ y)
}

/// Precomputed `Tr` and `Q` bits for every element.
#[derive(Clone, Debug)]
pub struct TraceQTable {
    bits: Vec<u8>,
}

impl TraceQTable {
    const TR: u8 = 1;
    const Q: u8 = 2;

    pub fn new(ctx: &FieldContext) -> Self {
        let n = ctx.n();
        let bits = ctx
            .elements()
            .into_par_iter()
            .map(|x| {
                // Σ_{i<j} p_i p_j regrouped as Σ_i p_i (p_{i+1} + ... + p_{n-1})
                let powers: Vec<u32> = (0..n).map(|i| ctx.pow2k(x, i)).collect();
                let mut suffix = 0;
                let mut q = 0;
                for p in powers.iter().rev() {
                    q ^= ctx.mul(*p, suffix);
                    suffix ^= p;
                }
                debug_assert!(q <= 1);
                ((ctx.trace(x) as u8) * Self::TR) | ((q as u8) * Self::Q)
            })
            .collect();
        TraceQTable { bits }
    }

    #[inline]
    pub fn trace(&self, x: FieldElement) -> u32 {
        u32::from(self.bits[x as usize] & Self::TR)
    }

    #[inline]
    pub fn q(&self, x: FieldElement) -> u32 {
        u32::from(self.bits[x as usize] >> 1 & 1)
    }

    /// `Tr(x) = 0` and `Q(x) = 0`.
    #[inline]
    pub fn both_zero(&self, x: FieldElement) -> bool {
        self.bits[x as usize] == 0
    }
}

/// Predicts `16 | K_n(a)` as `Tr(a) = 0 ∧ Q(a) = 0`. Requires `n >= 4`.
pub fn divisible_by_16(ctx: &FieldContext, a: FieldElement) -> Result<bool> {
    if ctx.n() < 4 {
        return Err(Error::Range(format!("mod-16 characterization needs n >= 4, field has n = {}", ctx.n())));
    }
    Ok(ctx.trace(a) == 0 && qform(ctx, a) == 0)
}

/// Bitset of the nonzero Kloosterman zeros, for constant-time lookups.
#[derive(Clone, Debug)]
pub struct ZeroSet {
    words: Vec<u64>,
}

impl ZeroSet {
    pub fn from_zeros(order: u32, zeros: &[FieldElement]) -> Self {
        let mut words = vec![0u64; (order as usize).div_ceil(64)];
        for &z in zeros {
            words[(z / 64) as usize] |= 1 << (z % 64);
        }
        ZeroSet { words }
    }

    /// `K_n(a) = 0`, counting `a = 0` (where the sum also vanishes).
    #[inline]
    pub fn sum_vanishes(&self, a: FieldElement) -> bool {
        a == 0 || self.words[(a / 64) as usize] >> (a % 64) & 1 == 1
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SumRecord {
    pub a: String,
    pub k: i32,
    pub tr: u32,
    pub q: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubfieldHits {
    pub degree: u32,
    pub zeros_inside: usize,
}

/// All nonzero `a` with `K_n(a) = 0`, plus supporting data.
#[derive(Clone, Debug, Serialize)]
pub struct KloostermanCensus {
    pub field: String,
    pub n: u32,
    /// Nonzero zeros, ascending.
    #[serde(serialize_with = "serialize_hex_list")]
    pub zeros: Vec<FieldElement>,
    pub zero_count: usize,
    /// `K_n(0)`, always 0; reported apart from the zero set.
    pub sum_at_zero: i32,
    /// Nonzero elements passing the `Tr = Q = 0` filter (`None` for `n < 4`).
    pub mod16_candidates: Option<usize>,
    /// Zeros found inside each proper subfield.
    pub proper_subfield_hits: Vec<SubfieldHits>,
    /// Multiset of all `K_n(a)`.
    pub value_distribution: Spectrum,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sums: Option<Vec<SumRecord>>,
}

fn serialize_hex_list<S: serde::Serializer>(v: &[FieldElement], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|&x| hex(x)))
}

impl KloostermanCensus {
    pub fn zero_set(&self, ctx: &FieldContext) -> ZeroSet {
        ZeroSet::from_zeros(ctx.order(), &self.zeros)
    }

    pub fn any_zero_in_proper_subfield(&self) -> bool {
        self.proper_subfield_hits.iter().any(|h| h.zeros_inside > 0)
    }
}

/// Zero census. Candidates are filtered by the mod-16 test when `n >= 4`; every
/// reported zero is re-confirmed by direct summation.
pub fn kloosterman_zeros(ctx: &FieldContext, dump_sums: bool) -> KloostermanCensus {
    let sums = kloosterman_sums(ctx);
    let table = TraceQTable::new(ctx);
    let filtered = ctx.n() >= 4;
    let candidates: Vec<FieldElement> = (1..ctx.order()).filter(|&a| !filtered || table.both_zero(a)).collect();
    let zeros: Vec<FieldElement> = candidates.par_iter().copied().filter(|&a| sums[a as usize] == 0).collect();
    for &z in &zeros {
        assert_eq!(kloosterman_sum(ctx, z), 0, "transform and direct sum disagree at {z:#x}");
    }
    let proper_subfield_hits = ctx
        .subfield_degrees()
        .into_iter()
        .filter(|&k| k < ctx.n())
        .map(|k| {
            let sub = ctx.subfield_elements(k).expect("k divides n");
            SubfieldHits { degree: k, zeros_inside: zeros.iter().filter(|z| sub.binary_search(z).is_ok()).count() }
        })
        .collect();
    let value_distribution = sums.iter().map(|&k| i64::from(k)).collect();
    let records = dump_sums.then(|| {
        ctx.elements()
            .map(|a| SumRecord { a: hex(a), k: sums[a as usize], tr: table.trace(a), q: table.q(a) })
            .collect()
    });
    KloostermanCensus {
        field: ctx.spec_string(),
        n: ctx.n(),
        zero_count: zeros.len(),
        zeros,
        sum_at_zero: sums[0],
        mod16_candidates: filtered.then_some(candidates.len()),
        proper_subfield_hits,
        value_distribution,
        sums: records,
    }
}

/// CSV rows `a_hex,K,tr,Q` for every element.
pub fn census_csv(ctx: &FieldContext) -> String {
    let sums = kloosterman_sums(ctx);
    let table = TraceQTable::new(ctx);
    let mut out = String::from("a_hex,K,tr,Q\n");
    for a in ctx.elements() {
        out.push_str(&format!("{},{},{},{}\n", hex(a), sums[a as usize], table.trace(a), table.q(a)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(n: u32) -> FieldContext {
        FieldContext::new(n, None).unwrap()
    }

    #[test]
    fn sum_at_zero_vanishes() {
        for n in 2..=10 {
            assert_eq!(kloosterman_sum(&field(n), 0), 0);
        }
    }

    #[test]
    fn gf8_at_one_matches_hand_sum() {
        let f = field(3);
        // literal 8-term sum with the reference multiplier
        let mut total = 0;
        for x in 0..8u32 {
            let inv = (0..8u32).find(|&y| crate::gf2n::clmul_mod(x, y, 0b1011) == 1).unwrap_or(0);
            let e = f.trace_direct(inv) ^ f.trace_direct(x);
            total += if e == 0 { 1 } else { -1 };
        }
        assert_eq!(kloosterman_sum(&f, 1), total);
        assert_eq!(total, -4);
    }

    #[test]
    fn fast_sums_match_direct() {
        for n in 2..=9 {
            let f = field(n);
            let fast = kloosterman_sums(&f);
            for a in f.elements() {
                let k = kloosterman_sum(&f, a);
                assert_eq!(fast[a as usize], k);
                assert!(a == 0 || within_weil_bound(n, k));
                assert_eq!(k % 4, 0);
            }
        }
    }

    #[test]
    fn unshifted_bound_fails_at_n5() {
        let f = field(5);
        let max = f.elements().map(|a| kloosterman_sum(&f, a).abs()).max().unwrap();
        assert_eq!(max, 12);
        assert!((max as i64) * (max as i64) > 1 << 7);
    }

    #[test]
    fn qform_examples() {
        for n in 2..=9 {
            let f = field(n);
            assert_eq!(qform(&f, 0), 0);
            assert_eq!(qform(&f, 1), (n * (n - 1) / 2) % 2);
            let t = TraceQTable::new(&f);
            for x in f.elements() {
                assert_eq!(qform(&f, f.square(x)), qform(&f, x));
                assert_eq!(t.q(x), qform(&f, x));
                assert_eq!(qform_via_polarization(&f, x), qform(&f, x));
            }
        }
    }

    #[test]
    fn bform_agrees_with_polarization() {
        for n in 5..=6 {
            let f = field(n);
            for x in f.elements() {
                assert_eq!(bform(&f, x, x), 0);
                assert_eq!(bform(&f, x, 0), 0);
                for y in f.elements() {
                    assert_eq!(bform(&f, x, y), bform_polarized(&f, x, y));
                }
            }
        }
    }

    #[test]
    fn mod16_examples() {
        let f = field(6);
        assert!(divisible_by_16(&f, 0).unwrap());
        for a in f.elements().filter(|&a| f.trace(a) == 1) {
            assert!(!divisible_by_16(&f, a).unwrap());
        }
        assert!(matches!(divisible_by_16(&field(3), 1), Err(Error::Range(_))));
    }

    #[test]
    fn census_small() {
        let f = field(3);
        let c = kloosterman_zeros(&f, true);
        assert!(c.zero_count >= 1);
        assert_eq!(c.sum_at_zero, 0);
        assert!(!c.zeros.contains(&0));
        assert!(c.mod16_candidates.is_none());
        assert_eq!(c.sums.as_ref().unwrap().len(), 8);
        let c = kloosterman_zeros(&field(6), false);
        assert!(!c.any_zero_in_proper_subfield());
        let set = c.zero_set(&field(6));
        assert!(set.sum_vanishes(0));
        for &z in &c.zeros {
            assert!(set.sum_vanishes(z));
        }
        assert!(census_csv(&field(4)).starts_with("a_hex,K,tr,Q\n0x0,0,0,0\n"));
    }
}
