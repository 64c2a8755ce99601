//! The filter pipeline shared by every search mode.
//!
//! Stages, cheapest first: trivial intersection of the adjoint kernels (rank),
//! the `Tr`/`Q` scan of `R(b) = L1*(b) L2*(b)` (only for `n >= 4`), Kloosterman
//! zero membership of every `R(b)`, and finally the occupancy scan of `F`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gf2::BitMatrix;
use crate::gf2n::FieldElement;
use crate::inverse_perm::PairOracle;
use crate::linmap::adjoint_matrix;

/// One in this many rejected candidates is re-checked for bijectivity.
pub const AUDIT_DENOMINATOR: u64 = 100;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub examined: u64,
    pub kernel: u64,
    pub trace_q: u64,
    pub kloosterman: u64,
    pub bijective: u64,
    /// Passed every criterion but `F` is not bijective.
    pub mismatches: u64,
    pub audit_sampled: u64,
    pub audit_violations: u64,
    /// `(M1, M2)` column words of `L1`, `L2`.
    pub witnesses: Vec<(Vec<u32>, Vec<u32>)>,
}

impl Tally {
    pub fn merge(&mut self, other: Tally) {
        self.examined += other.examined;
        self.kernel += other.kernel;
        self.trace_q += other.trace_q;
        self.kloosterman += other.kloosterman;
        self.bijective += other.bijective;
        self.mismatches += other.mismatches;
        self.audit_sampled += other.audit_sampled;
        self.audit_violations += other.audit_violations;
        self.witnesses.extend(other.witnesses);
    }

    /// `count` candidates rejected by the `Tr`/`Q` scan whose kernel clause is
    /// known to hold.
    fn reject_trace_q(&mut self, count: u64) {
        self.examined += count;
        self.kernel += count;
    }
}

/// 64-bit mixing function used to derive deterministic audit decisions.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub struct Pipeline<'a> {
    pub oracle: &'a PairOracle,
    pub use_trace_q: bool,
    pub seed: u64,
}

impl<'a> Pipeline<'a> {
    pub fn new(oracle: &'a PairOracle, seed: u64) -> Self {
        Pipeline { oracle, use_trace_q: oracle.ctx().n() >= 4, seed }
    }

    fn audit_hit(&self, key: u64) -> bool {
        mix(self.seed ^ mix(key)).is_multiple_of(AUDIT_DENOMINATOR)
    }

    fn audit(&self, key: u64, tally: &mut Tally, primal: impl FnOnce() -> (BitMatrix, BitMatrix)) {
        if self.audit_hit(key) {
            tally.audit_sampled += 1;
            let (m1, m2) = primal();
            if self.oracle.is_permutation_m(&m1, &m2) {
                tally.audit_violations += 1;
            }
        }
    }

    /// Runs one candidate given the adjoint matrices and `L1*` as a full table.
    /// `primal` yields `(M1, M2)` when bijectivity has to be checked.
    pub fn screen(
        &self,
        l1s: &[FieldElement],
        m1s: &BitMatrix,
        m2s: &BitMatrix,
        key: u64,
        tally: &mut Tally,
        primal: impl FnOnce() -> (BitMatrix, BitMatrix),
    ) {
        let ctx = self.oracle.ctx();
        tally.examined += 1;
        if !self.oracle.adjoint_kernels_meet_trivially(m1s, m2s) {
            return self.audit(key, tally, primal);
        }
        tally.kernel += 1;
        let q = ctx.order();
        if self.use_trace_q {
            let tq = self.oracle.trace_q();
            if !(1..q).all(|b| tq.both_zero(ctx.mul(l1s[b as usize], m2s.apply(b)))) {
                return self.audit(key, tally, primal);
            }
        }
        tally.trace_q += 1;
        let zeros = self.oracle.zeros();
        if !(1..q).all(|b| zeros.sum_vanishes(ctx.mul(l1s[b as usize], m2s.apply(b)))) {
            return self.audit(key, tally, primal);
        }
        tally.kloosterman += 1;
        let (m1, m2) = primal();
        if self.oracle.is_permutation_m(&m1, &m2) {
            tally.bijective += 1;
            tally.witnesses.push((m1.columns().to_vec(), m2.columns().to_vec()));
        } else {
            tally.mismatches += 1;
        }
    }
}

/// Matrix with `n` columns packed `n` bits each into `code`.
pub fn matrix_from_code(n: u32, code: u64) -> BitMatrix {
    let mask = (1u64 << n) - 1;
    let cols = (0..n).map(|j| (code >> (j * n) & mask) as u32).collect();
    BitMatrix::from_columns(n as usize, cols).expect("n <= 16")
}

pub fn table_of(m: &BitMatrix, q: u32) -> Vec<FieldElement> {
    (0..q).map(|b| m.apply(b)).collect()
}

/// Depth-first enumeration of `L2*` column by column for a fixed `L1*`.
///
/// Column `j` is `L2*(x^j)`; once it is set, `L2*` is known on every `b` whose
/// top bit is `j`, and the `Tr`/`Q` scan runs on those points. A failing prefix
/// discards the whole subtree, which is counted exactly.
pub struct AdjointDfs<'a> {
    pub pipeline: &'a Pipeline<'a>,
    pub l1s: Vec<FieldElement>,
    pub m1s: BitMatrix,
    pub m1: BitMatrix,
    /// Value of column 0 when it is fixed.
    pub fixed_first: Option<FieldElement>,
    /// Skip the all-zero `L2*`.
    pub skip_zero: bool,
    /// Prune on the `Tr`/`Q` scan.
    pub prune: bool,
}

impl<'a> AdjointDfs<'a> {
    /// Index of the column whose value selects the partition.
    pub fn partition_column(&self) -> u32 {
        u32::from(self.fixed_first.is_some())
    }

    pub fn partitions(&self) -> u64 {
        self.pipeline.oracle.ctx().order() as u64
    }

    fn primal(&self, cols: &[u32]) -> (BitMatrix, BitMatrix) {
        let ctx = self.pipeline.oracle.ctx();
        let m2s = BitMatrix::from_columns(ctx.n() as usize, cols.to_vec()).expect("n <= 16");
        (self.m1.clone(), adjoint_matrix(ctx, &m2s))
    }

    /// Runs every candidate whose partition column equals `value`.
    pub fn run_partition(&self, value: FieldElement) -> Tally {
        let ctx = self.pipeline.oracle.ctx();
        let n = ctx.n() as usize;
        let mut cols = vec![0u32; n];
        let mut vals = vec![0u32; ctx.order() as usize];
        let mut tally = Tally::default();
        let start = self.partition_column() as usize;
        if let Some(c0) = self.fixed_first {
            cols[0] = c0;
            vals[1] = c0;
            if self.prune && !self.points_pass(&vals, 0) {
                cols[1] = value;
                self.pruned(&cols, 2, (n - 2) as u32, &mut tally);
                return tally;
            }
        }
        self.assign(start, value, &mut cols, &mut vals, &mut tally);
        tally
    }

    /// `Tr`/`Q` scan on the points with top bit `j`.
    fn points_pass(&self, vals: &[u32], j: usize) -> bool {
        let ctx = self.pipeline.oracle.ctx();
        let tq = self.pipeline.oracle.trace_q();
        (1u32 << j..1u32 << (j + 1)).all(|b| tq.both_zero(ctx.mul(self.l1s[b as usize], vals[b as usize])))
    }

    fn assign(&self, j: usize, v: u32, cols: &mut [u32], vals: &mut [u32], tally: &mut Tally) {
        let n = cols.len();
        cols[j] = v;
        let base = 1usize << j;
        for b in base..2 * base {
            vals[b] = vals[b - base] ^ v;
        }
        if self.prune && !self.points_pass(vals, j) {
            let rest = (n - 1 - j) as u32;
            self.pruned(cols, j + 1, rest, tally);
            return;
        }
        if j + 1 == n {
            self.leaf(cols, tally);
            return;
        }
        let q = self.pipeline.oracle.ctx().order();
        for w in 0..q {
            self.assign(j + 1, w, cols, vals, tally);
        }
    }

    fn leaf(&self, cols: &[u32], tally: &mut Tally) {
        if self.skip_zero && cols.iter().all(|&c| c == 0) {
            return;
        }
        let ctx = self.pipeline.oracle.ctx();
        let m2s = BitMatrix::from_columns(ctx.n() as usize, cols.to_vec()).expect("n <= 16");
        let key = cols.iter().fold(0u64, |k, &c| mix(k ^ u64::from(c)));
        self.pipeline.screen(&self.l1s, &self.m1s, &m2s, key, tally, || self.primal(cols));
    }

    /// Accounts for the `q^rest` leaves under a failing prefix of `filled`
    /// columns, auditing a random completion of a sample of them.
    fn pruned(&self, cols: &[u32], filled: usize, rest: u32, tally: &mut Tally) {
        let ctx = self.pipeline.oracle.ctx();
        let q = ctx.order() as u64;
        let count = q.pow(rest);
        tally.reject_trace_q(count);
        let key = cols[..filled].iter().fold(filled as u64, |k, &c| mix(k ^ u64::from(c)));
        let samples = (count / AUDIT_DENOMINATOR).max(u64::from(self.pipeline.audit_hit(key)));
        let mut rng = ChaCha8Rng::seed_from_u64(mix(self.pipeline.seed ^ key));
        for _ in 0..samples.min(64) {
            let mut full = cols.to_vec();
            for c in full.iter_mut().skip(filled) {
                *c = rng.gen_range(0..q as u32);
            }
            tally.audit_sampled += 1;
            let (m1, m2) = self.primal(&full);
            if self.pipeline.oracle.is_permutation_m(&m1, &m2) {
                tally.audit_violations += 1;
            }
        }
    }
}
