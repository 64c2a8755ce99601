//! Criteria and structure checks for `F(x) = L1(x^-1) + L2(x)`.
//!
//! With `R(b) = L1*(b) L2*(b)`:
//!
//! * `F` permutes the field iff `K_n(R(b)) = 0` for every `b` and
//!   `ker L1* ∩ ker L2* = {0}` ([`PairOracle::perm_criterion`]);
//! * for `n >= 4` a permutation forces `Tr(R(b)) = Q(R(b)) = 0` everywhere
//!   ([`PairOracle::necessary_mod16`]), a necessary condition only.
//!
//! The second half of the module mechanizes the coefficient argument that rules
//! out `L1*(x) = x^2 + x`, `L2*(1) = 1` for `n >= 5`: [`recurrence_coeffs`] builds
//! the only coefficient pattern compatible with the trace conditions,
//! [`verify_conditions`] evaluates the three conditions pointwise, and
//! [`x8_coefficient_parity`] recomputes the `x^8` coefficient that breaks the
//! quadratic condition.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2::{self, BitMatrix};
use crate::gf2n::{hex, FieldContext, FieldElement};
use crate::kloosterman::{kloosterman_sums, qform, TraceQTable, ZeroSet};
use crate::linmap::{same_field, LinearizedPoly, Subspace};
use crate::vbf::TruthTable;

/// The table of `x -> L1(x^-1) + L2(x)`.
pub fn build_f(l1: &LinearizedPoly, l2: &LinearizedPoly) -> Result<TruthTable> {
    same_field(l1.ctx(), l2.ctx())?;
    let ctx = l1.ctx().clone();
    let (m1, m2) = (l1.matrix(), l2.matrix());
    let c = ctx.clone();
    Ok(TruthTable::from_fn(ctx, move |x| m1.apply(c.inv0(x)) ^ m2.apply(x)))
}

/// Precomputed Kloosterman sums, zero set, `Tr`/`Q` bits and inverse table for
/// one field; the shared back end of every pair criterion.
#[derive(Clone)]
pub struct PairOracle {
    ctx: Arc<FieldContext>,
    sums: Vec<i32>,
    zeros: ZeroSet,
    tq: TraceQTable,
    inv: Vec<FieldElement>,
}

impl PairOracle {
    pub fn new(ctx: Arc<FieldContext>) -> Self {
        let sums = kloosterman_sums(&ctx);
        Self::with_sums(ctx, sums)
    }

    /// Builds the oracle from caller-supplied sums. Used to inject faults when
    /// testing that violations are reported.
    pub fn with_sums(ctx: Arc<FieldContext>, sums: Vec<i32>) -> Self {
        assert_eq!(sums.len(), ctx.order() as usize);
        let zero_list: Vec<FieldElement> = (1..ctx.order()).filter(|&a| sums[a as usize] == 0).collect();
        let zeros = ZeroSet::from_zeros(ctx.order(), &zero_list);
        let tq = TraceQTable::new(&ctx);
        let inv = ctx.elements().map(|x| ctx.inv0(x)).collect();
        PairOracle { ctx, sums, zeros, tq, inv }
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn kloosterman(&self, a: FieldElement) -> i32 {
        self.sums[a as usize]
    }

    pub fn zeros(&self) -> &ZeroSet {
        &self.zeros
    }

    pub fn trace_q(&self) -> &TraceQTable {
        &self.tq
    }

    #[inline]
    pub fn inv(&self, x: FieldElement) -> FieldElement {
        self.inv[x as usize]
    }

    /// Bijectivity of `x -> M1 x^-1 + M2 x` by occupancy scan.
    pub fn is_permutation_m(&self, m1: &BitMatrix, m2: &BitMatrix) -> bool {
        let q = self.ctx.order() as usize;
        let mut seen = vec![0u64; q.div_ceil(64)];
        for x in 0..q as u32 {
            let y = m1.apply(self.inv[x as usize]) ^ m2.apply(x);
            let (w, b) = ((y / 64) as usize, y % 64);
            if seen[w] >> b & 1 == 1 {
                return false;
            }
            seen[w] |= 1 << b;
        }
        true
    }

    /// Kernel clause on adjoint matrices: `ker M1* ∩ ker M2* = {0}`.
    pub fn adjoint_kernels_meet_trivially(&self, m1s: &BitMatrix, m2s: &BitMatrix) -> bool {
        let n = self.ctx.n();
        let stacked: Vec<u32> = m1s.columns().iter().zip(m2s.columns()).map(|(&a, &b)| a | b << n).collect();
        gf2::rank(&stacked) == n as usize
    }

    /// Kloosterman criterion on adjoint matrices.
    pub fn kloosterman_criterion_m(&self, m1s: &BitMatrix, m2s: &BitMatrix) -> bool {
        self.adjoint_kernels_meet_trivially(m1s, m2s)
            && self.ctx.elements().all(|b| {
                let r = self.ctx.mul(m1s.apply(b), m2s.apply(b));
                self.zeros.sum_vanishes(r)
            })
    }

    /// Mod-16 condition on adjoint matrices. Requires `n >= 4`.
    pub fn mod16_m(&self, m1s: &BitMatrix, m2s: &BitMatrix) -> Result<bool> {
        require_n4(&self.ctx)?;
        Ok(self.adjoint_kernels_meet_trivially(m1s, m2s)
            && self.ctx.elements().all(|b| {
                let r = self.ctx.mul(m1s.apply(b), m2s.apply(b));
                self.tq.both_zero(r)
            }))
    }

    /// `K_n(L1*(b) L2*(b)) = 0` for all `b`, and `ker L1* ∩ ker L2* = {0}`.
    pub fn perm_criterion(&self, l1: &LinearizedPoly, l2: &LinearizedPoly) -> Result<bool> {
        self.check_pair(l1, l2)?;
        Ok(self.kloosterman_criterion_m(&l1.adjoint().matrix(), &l2.adjoint().matrix()))
    }

    /// `Tr(R(a)) = Q(R(a)) = 0` for all `a`, and the kernel clause. Requires `n >= 4`.
    pub fn necessary_mod16(&self, l1: &LinearizedPoly, l2: &LinearizedPoly) -> Result<bool> {
        self.check_pair(l1, l2)?;
        self.mod16_m(&l1.adjoint().matrix(), &l2.adjoint().matrix())
    }

    fn check_pair(&self, l1: &LinearizedPoly, l2: &LinearizedPoly) -> Result<()> {
        same_field(&self.ctx, l1.ctx())?;
        same_field(&self.ctx, l2.ctx())
    }
}

fn require_n4(ctx: &FieldContext) -> Result<()> {
    if ctx.n() < 4 {
        return Err(Error::Range(format!("mod-16 condition needs n >= 4, got n = {}", ctx.n())));
    }
    Ok(())
}

/// Kloosterman permutation criterion, building a fresh oracle.
pub fn perm_criterion_kloosterman(l1: &LinearizedPoly, l2: &LinearizedPoly) -> Result<bool> {
    PairOracle::new(l1.ctx().clone()).perm_criterion(l1, l2)
}

/// Mod-16 necessary condition, building a fresh oracle.
pub fn necessary_mod16(l1: &LinearizedPoly, l2: &LinearizedPoly) -> Result<bool> {
    require_n4(l1.ctx())?;
    PairOracle::new(l1.ctx().clone()).necessary_mod16(l1, l2)
}

/// `M_a = {x^-1 + (x + a)^-1 : x in the field}`, sorted. `a` must be nonzero.
pub fn image_set_ma(ctx: &FieldContext, a: FieldElement) -> Result<Vec<FieldElement>> {
    ctx.check(a)?;
    if a == 0 {
        return Err(Error::Argument("M_a needs a != 0".into()));
    }
    let mut out: Vec<FieldElement> = ctx.elements().map(|x| ctx.inv0(x) ^ ctx.inv0(x ^ a)).collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `1/H_{1/a} ∪ {1/a}`, sorted; the closed form of [`image_set_ma`].
pub fn image_set_ma_formula(ctx: &FieldContext, a: FieldElement) -> Result<Vec<FieldElement>> {
    ctx.check(a)?;
    if a == 0 {
        return Err(Error::Argument("M_a needs a != 0".into()));
    }
    let ia = ctx.inv0(a);
    let mut out: Vec<FieldElement> =
        ctx.elements().filter(|&x| x != 0 && ctx.in_hyperplane(ia, x)).map(|x| ctx.inv0(x)).collect();
    out.push(ia);
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Whether `a x^2 + b x + c = 0` has a root, decided as `Tr(a c / b^2) = 0`.
pub fn quad_solvable(ctx: &FieldContext, a: FieldElement, b: FieldElement, c: FieldElement) -> Result<bool> {
    for v in [a, b, c] {
        ctx.check(v)?;
    }
    if b == 0 {
        return Err(Error::Argument("quadratic criterion needs b != 0".into()));
    }
    Ok(ctx.trace(ctx.mul(ctx.mul(a, c), ctx.inv0(ctx.square(b)))) == 0)
}

/// Brute-force root search for `a x^2 + b x + c = 0`.
pub fn quad_has_root(ctx: &FieldContext, a: FieldElement, b: FieldElement, c: FieldElement) -> bool {
    ctx.elements().any(|x| ctx.mul(a, ctx.square(x)) ^ ctx.mul(b, x) ^ c == 0)
}

fn distinct_nonzero(ctx: &FieldContext, v: [FieldElement; 3]) -> Result<()> {
    for &x in &v {
        ctx.check(x)?;
        if x == 0 {
            return Err(Error::Argument("hyperplane parameters must be nonzero".into()));
        }
    }
    if v[0] == v[1] || v[0] == v[2] || v[1] == v[2] {
        return Err(Error::Argument("hyperplane parameters must be distinct".into()));
    }
    Ok(())
}

/// `|H_a ∪ H_b ∪ H_c|` by exhaustive scan.
pub fn hyperplane_union_size(ctx: &FieldContext, a: FieldElement, b: FieldElement, c: FieldElement) -> Result<usize> {
    distinct_nonzero(ctx, [a, b, c])?;
    Ok(ctx
        .elements()
        .filter(|&x| ctx.in_hyperplane(a, x) || ctx.in_hyperplane(b, x) || ctx.in_hyperplane(c, x))
        .count())
}

/// Whether `H_a ∪ H_b ∪ H_c` is the whole field (for distinct nonzero `a, b, c`,
/// this happens exactly when `a + b = c`).
pub fn hyperplane_cover(ctx: &FieldContext, a: FieldElement, b: FieldElement, c: FieldElement) -> Result<bool> {
    Ok(hyperplane_union_size(ctx, a, b, c)? == ctx.order() as usize)
}

/// For `M = r · GF(2^k)` with `k > 1`: three elements `a = r s1`, `b = r s2`,
/// `c = r s` of `M` with `1/a + 1/b = 1/c`, so `H_{1/a} ∪ H_{1/b} ∪ H_{1/c}`
/// covers the field.
pub fn covering_triple(
    ctx: &FieldContext,
    r: FieldElement,
    k: u32,
) -> Result<(FieldElement, FieldElement, FieldElement)> {
    ctx.check(r)?;
    if r == 0 || k < 2 {
        return Err(Error::Argument("need r != 0 and k > 1".into()));
    }
    let sub = ctx.subfield_elements(k)?;
    let (s1, s2) = (sub[1], sub[2]);
    let s = ctx.inv0(ctx.inv0(s1) ^ ctx.inv0(s2));
    Ok((ctx.mul(r, s1), ctx.mul(r, s2), ctx.mul(r, s)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Translate {
    #[serde(serialize_with = "ser_hex")]
    pub scale: FieldElement,
    pub degree: u32,
}

fn ser_hex<S: serde::Serializer>(v: &FieldElement, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&hex(*v))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelSizes {
    pub l1: usize,
    pub l2: usize,
    pub l1_adjoint: usize,
    pub l2_adjoint: usize,
}

/// Everything computable about one pair `(L1, L2)`.
#[derive(Clone, Debug, Serialize)]
pub struct PairReport {
    pub field: String,
    pub l1: String,
    pub l2: String,
    pub is_permutation: bool,
    pub kloosterman_criterion: bool,
    /// `None` when `n < 4`.
    pub mod16_condition: Option<bool>,
    pub kernel_intersection_trivial: bool,
    pub kernel_sizes: KernelSizes,
    pub l1_kernel_translate: Option<Translate>,
    pub l2_kernel_translate: Option<Translate>,
    /// `ker L1 = L2*(ker L1*)`.
    pub l1_kernel_transport: bool,
    /// `ker L2 = L1*(ker L2*)`.
    pub l2_kernel_transport: bool,
    pub l1_bijective: bool,
    pub l2_bijective: bool,
    /// `n >= 5`, both maps nonzero, one of them bijective: cannot permute.
    pub bijective_component_rule_applies: bool,
    /// Number of `x` with `F(x) = 0`.
    pub zeros_of_f: usize,
    /// Contradictions with results proved for this family.
    pub violations: Vec<String>,
    /// Structure properties that fail for a permutation where no theorem
    /// requires them (`n < 5`).
    pub flags: Vec<String>,
}

/// Computes a [`PairReport`]. For `n >= 5` a permutation would have to satisfy
/// the kernel structure results; any failure lands in `violations`.
pub fn kernel_structure_check(oracle: &PairOracle, l1: &LinearizedPoly, l2: &LinearizedPoly) -> Result<PairReport> {
    oracle.check_pair(l1, l2)?;
    let ctx = oracle.ctx().clone();
    let n = ctx.n();
    let (l1s, l2s) = (l1.adjoint(), l2.adjoint());
    let (m1, m2, m1s, m2s) = (l1.matrix(), l2.matrix(), l1s.matrix(), l2s.matrix());

    let f = build_f(l1, l2)?;
    let is_permutation = f.is_permutation();
    let kloosterman_criterion = oracle.kloosterman_criterion_m(&m1s, &m2s);
    let mod16_condition = (n >= 4).then(|| oracle.mod16_m(&m1s, &m2s).expect("n >= 4"));
    let kernel_intersection_trivial = oracle.adjoint_kernels_meet_trivially(&m1s, &m2s);

    let (k1, k2, k1s, k2s) = (l1.kernel(), l2.kernel(), l1s.kernel(), l2s.kernel());
    let l1_kernel_transport = l2s.apply_to_subspace(&k1s)? == k1;
    let l2_kernel_transport = l1s.apply_to_subspace(&k2s)? == k2;
    let translate = |s: &Subspace| s.is_subfield_translate().map(|(scale, degree)| Translate { scale, degree });
    let l1_kernel_translate = translate(&k1);
    let l2_kernel_translate = translate(&k2);
    let (l1_bijective, l2_bijective) = (m1.is_invertible(), m2.is_invertible());
    let bijective_component_rule_applies = n >= 5 && !l1.is_zero() && !l2.is_zero() && (l1_bijective || l2_bijective);

    let mut violations = Vec::new();
    let mut flags = Vec::new();
    if is_permutation != kloosterman_criterion {
        violations
            .push(format!("Kloosterman criterion says {kloosterman_criterion} but bijectivity says {is_permutation}"));
    }
    if is_permutation && mod16_condition == Some(false) {
        violations.push("permutation fails the mod-16 necessary condition".into());
    }
    if is_permutation && !l1.is_zero() && !l2.is_zero() {
        let mut structure = Vec::new();
        if k1.dim() > 0 && l1_kernel_translate.is_none() {
            structure.push("ker L1 is not a subfield translate".to_string());
        }
        if k2.dim() > 0 && l2_kernel_translate.is_none() {
            structure.push("ker L2 is not a subfield translate".to_string());
        }
        if !l1_kernel_transport {
            structure.push("ker L1 != L2*(ker L1*)".to_string());
        }
        if !l2_kernel_transport {
            structure.push("ker L2 != L1*(ker L2*)".to_string());
        }
        if k1.size() != 2 || k2.size() != 2 {
            structure.push(format!("kernel sizes are {} and {}, not 2", k1.size(), k2.size()));
        }
        if n >= 5 {
            violations.push(format!("permutation found for n = {n}"));
            violations.extend(structure);
        } else {
            flags.extend(structure);
        }
    }

    Ok(PairReport {
        field: ctx.spec_string(),
        l1: l1.to_string(),
        l2: l2.to_string(),
        is_permutation,
        kloosterman_criterion,
        mod16_condition,
        kernel_intersection_trivial,
        kernel_sizes: KernelSizes { l1: k1.size(), l2: k2.size(), l1_adjoint: k1s.size(), l2_adjoint: k2s.size() },
        l1_kernel_translate,
        l2_kernel_translate,
        l1_kernel_transport,
        l2_kernel_transport,
        l1_bijective,
        l2_bijective,
        bijective_component_rule_applies,
        zeros_of_f: f.values().iter().filter(|&&v| v == 0).count(),
        violations,
        flags,
    })
}

/// Rewrites a pair with `|ker L1| = 2` into the form `L1(x) = x^(2^(n-1)) + x`
/// without changing whether `F` is a permutation. Returns `None` when the
/// kernel of `L1` does not have two elements.
///
/// With `ker L1 = {0, k}`: write `L1 = A ∘ (x^2 + k x)` for bijective `A`, strip
/// `A`, rescale by `k^-2` and substitute `x -> x/k`, then precompose with the
/// square root.
pub fn normalize_pair(l1: &LinearizedPoly, l2: &LinearizedPoly) -> Result<Option<(LinearizedPoly, LinearizedPoly)>> {
    same_field(l1.ctx(), l2.ctx())?;
    let ctx = l1.ctx().clone();
    let n = ctx.n();
    let kernel = l1.kernel();
    if kernel.dim() != 1 {
        return Ok(None);
    }
    let k = kernel.basis()[0];
    let mut base = vec![0; n as usize];
    base[0] = k;
    base[1] = 1;
    let base = LinearizedPoly::new(ctx.clone(), base)?;
    let a = base.factor_through(l1)?.expect("equal kernels");
    let a_inv = LinearizedPoly::from_matrix(ctx.clone(), &a.matrix().inverse().expect("bijective"))?;
    let stripped = a_inv.compose(l2)?;

    let ki = ctx.inv0(k);
    let ki2 = ctx.square(ki);
    // k^-2 · stripped(x / k)
    let scaled: Vec<FieldElement> =
        stripped.coeffs().iter().enumerate().map(|(i, &c)| ctx.mul(ki2, ctx.mul(c, ctx.pow2k(ki, i as u32)))).collect();
    let scaled = LinearizedPoly::new(ctx.clone(), scaled)?;
    let root = LinearizedPoly::monomial(ctx.clone(), n - 1, 1);
    let l2n = scaled.compose(&root)?;
    let mut l1n = vec![0; n as usize];
    l1n[0] = 1;
    l1n[(n - 1) as usize] = 1;
    Ok(Some((LinearizedPoly::new(ctx, l1n)?, l2n)))
}

/// Result of running the coefficient recurrence for `L2*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RecurrenceOutcome {
    /// The recurrence and the closing relation for `c_{n-1}` agree.
    Consistent(LinearizedPoly),
    /// The two values of `c_{n-1}` differ (they differ by exactly 1).
    Inconsistent { from_recurrence: FieldElement, from_closure: FieldElement },
}

/// Builds `L2* = Σ c_i x^(2^i)` from `c_0` with
/// `c_1 = c_0^2`, `c_2 = c_1^2 + 1`, `c_3 = c_0^8` and
/// `c_{k+1} = c_k^2 + c_{k-1}^2 + c_{k-2}^4` for `k >= 3`, then compares
/// `c_{n-1}` with the closing relation `c_{n-1}^2 = c_0 + c_2^(1/2) + c_1`.
pub fn recurrence_coeffs(ctx: &Arc<FieldContext>, c0: FieldElement) -> Result<RecurrenceOutcome> {
    let n = ctx.n();
    if n < 5 {
        return Err(Error::Range(format!("recurrence needs n >= 5, got n = {n}")));
    }
    ctx.check(c0)?;
    let f = &**ctx;
    let mut c = vec![0; n as usize];
    c[0] = c0;
    c[1] = f.square(c0);
    c[2] = f.square(c[1]) ^ 1;
    c[3] = f.pow2k(c0, 3);
    for k in 3..(n as usize - 1) {
        c[k + 1] = f.square(c[k]) ^ f.square(c[k - 1]) ^ f.pow2k(c[k - 2], 2);
    }
    let from_recurrence = c[n as usize - 1];
    let from_closure = f.sqrt(c[0] ^ f.sqrt(c[2]) ^ c[1]);
    if from_recurrence != from_closure {
        return Ok(RecurrenceOutcome::Inconsistent { from_recurrence, from_closure });
    }
    Ok(RecurrenceOutcome::Consistent(LinearizedPoly::new(ctx.clone(), c)?))
}

/// Closed form of the recurrence: `c_i = c_0^(2^i)` for odd `i`, `c_0^(2^i) + 1`
/// for even `i >= 2`.
pub fn closed_form_coeffs(ctx: &FieldContext, c0: FieldElement) -> Vec<FieldElement> {
    (0..ctx.n()).map(|i| ctx.pow2k(c0, i) ^ u32::from(i >= 2 && i % 2 == 0)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionOutcome {
    /// 0 if the condition holds at every point, 1 otherwise.
    pub bit: u32,
    /// First `x` where it fails.
    #[serde(serialize_with = "ser_opt_hex")]
    pub witness: Option<FieldElement>,
}

fn ser_opt_hex<S: serde::Serializer>(v: &Option<FieldElement>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_some(&hex(*x)),
        None => s.serialize_none(),
    }
}

impl ConditionOutcome {
    pub fn holds(&self) -> bool {
        self.bit == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    /// `Tr((x^2 + x) L2*(x)) = 0`.
    pub a1: ConditionOutcome,
    /// `Q((x^2 + x) L2*(x)) = 0`.
    pub a2: ConditionOutcome,
    /// `Q(x^2 + x) + Tr((x^4 + x^2) L2*(x)) = 0`.
    pub a3: ConditionOutcome,
}

fn outcome(first_failure: Option<FieldElement>) -> ConditionOutcome {
    ConditionOutcome { bit: u32::from(first_failure.is_some()), witness: first_failure }
}

/// Evaluates the three conditions at every `x`.
pub fn verify_conditions(l2star: &LinearizedPoly) -> ConditionReport {
    let ctx = l2star.ctx();
    let tq = TraceQTable::new(ctx);
    verify_conditions_with(l2star, &tq)
}

pub fn verify_conditions_with(l2star: &LinearizedPoly, tq: &TraceQTable) -> ConditionReport {
    let f = &**l2star.ctx();
    let m = l2star.matrix();
    let (mut a1, mut a2, mut a3) = (None, None, None);
    for x in f.elements() {
        let x2 = f.square(x);
        let lx = m.apply(x);
        let y = f.mul(x2 ^ x, lx);
        if a1.is_none() && tq.trace(y) != 0 {
            a1 = Some(x);
        }
        if a2.is_none() && tq.q(y) != 0 {
            a2 = Some(x);
        }
        if a3.is_none() && tq.q(x2 ^ x) ^ tq.trace(f.mul(f.square(x2) ^ x2, lx)) != 0 {
            a3 = Some(x);
        }
    }
    ConditionReport { a1: outcome(a1), a2: outcome(a2), a3: outcome(a3) }
}

/// The function `x -> Q((x^2 + x) L2*(x))` as a table with values in `{0, 1}`.
pub fn quadratic_condition_table(l2star: &LinearizedPoly) -> TruthTable {
    let ctx = l2star.ctx().clone();
    let c = ctx.clone();
    TruthTable::from_fn(ctx, move |x| qform(&c, c.mul(c.square(x) ^ x, l2star.eval(x))))
}

/// [`quadratic_condition_table`] with `Q` read from a precomputed table.
pub fn quadratic_condition_table_with(l2star: &LinearizedPoly, tq: &TraceQTable) -> TruthTable {
    let ctx = l2star.ctx().clone();
    let c = ctx.clone();
    let m = l2star.matrix();
    TruthTable::from_fn(ctx, move |x| tq.q(c.mul(c.square(x) ^ x, m.apply(x))))
}

/// Index tuple `(i, j, r, s)` contributing `x^(2^i + 2^j + 2^r + 2^s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ExpTuple {
    pub i: u32,
    pub j: u32,
    pub r: u32,
    pub s: u32,
}

/// Reduces a positive exponent into `[1, 2^n - 1]`.
pub fn reduce_exponent(e: u64, n: u32) -> u64 {
    let m = (1u64 << n) - 1;
    (e - 1) % m + 1
}

/// All `(i, j, r, s)` with `0 <= r < s <= n-1`, `0 <= i, j <= n-1` whose
/// exponent reduces to 8.
pub fn x8_tuples(n: u32) -> Vec<ExpTuple> {
    let mut out = Vec::new();
    for r in 0..n {
        for s in (r + 1)..n {
            for i in 0..n {
                for j in 0..n {
                    let e = (1u64 << i) + (1u64 << j) + (1u64 << r) + (1u64 << s);
                    if reduce_exponent(e, n) == 8 {
                        out.push(ExpTuple { i, j, r, s });
                    }
                }
            }
        }
    }
    out
}

/// `d_{i,j,r,s}` under the recurrence pattern: 0 if `i = r` or `j = s`, else 1.
pub fn d_pattern(t: ExpTuple) -> u32 {
    u32::from(t.i != t.r && t.j != t.s)
}

/// `d_{i,j,r,s} = (c_{i-r+1}^(2^(r-1)) + c_{i-r}^(2^r)) (c_{j-s+1}^(2^(s-1)) + c_{j-s}^(2^s))`
/// evaluated in the field, coefficient indices and Frobenius exponents mod `n`.
pub fn d_coefficient(ctx: &FieldContext, c: &[FieldElement], t: ExpTuple) -> FieldElement {
    let n = ctx.n() as i64;
    let idx = |k: i64| c[k.rem_euclid(n) as usize];
    let frob = |a: FieldElement, k: i64| ctx.pow2k(a, k.rem_euclid(n) as u32);
    let factor = |i: u32, r: u32| {
        let (i, r) = (i as i64, r as i64);
        frob(idx(i - r + 1), r - 1) ^ frob(idx(i - r), r)
    };
    ctx.mul(factor(t.i, t.r), factor(t.j, t.s))
}

/// GF(2) sum of `d_{i,j,r,s}` over the tuples reaching `x^8`. Requires `n >= 5`.
pub fn x8_coefficient_parity(n: u32) -> Result<u32> {
    if n < 5 {
        return Err(Error::Range(format!("x^8 coefficient argument needs n >= 5, got {n}")));
    }
    Ok(x8_tuples(n).into_iter().map(d_pattern).fold(0, |a, d| a ^ d))
}
