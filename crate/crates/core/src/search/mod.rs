//! Exhaustive and pruned searches for permutations `L1(x^-1) + L2(x)`.
//!
//! * [`full_search`]: every pair of nonzero maps for `n <= 3`, every orbit
//!   representative under invertible left composition for `n = 4`.
//! * [`normalized_search`]: `L1(x) = x^(2^(n-1)) + x` and `L2*(1) = 1`, `5 <= n <= 8`.
//! * [`identity_l1_search`]: `L1(x) = x` and every nonzero `L2`, `n <= 6`.
//!
//! The last two enumerate `L2*` instead of `L2` (the adjoint is a bijection on
//! linear maps) so that the `Tr`/`Q` scan can prune column by column.
//! Partitions are processed in parallel and merged in index order; witnesses
//! are sorted, so reports do not depend on the worker count.

pub mod canonical;
mod engine;

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::gf2n::{hex, FieldContext, FieldElement};
use crate::inverse_perm::PairOracle;
use crate::linmap::{adjoint_matrix, LinearizedPoly};

pub use canonical::{canonical_count, canonical_pairs, canonicalize, gl_order, stack, unstack};
pub use engine::AUDIT_DENOMINATOR;
use engine::{matrix_from_code, mix, table_of, AdjointDfs, Pipeline, Tally};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Full,
    Canonical,
    Normalized,
    IdentityL1,
}

/// How the adjoint-enumerating modes walk their space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Pruned when the `Tr`/`Q` scan applies (`n >= 4`), flat otherwise.
    #[default]
    Auto,
    /// Every candidate runs the whole pipeline.
    Flat,
    /// Depth-first over the columns of `L2*` with prefix pruning.
    Pruned,
}

/// Emitted once per finished partition.
#[derive(Clone, Debug, Serialize)]
pub struct PartitionRecord {
    pub partition: u64,
    pub partitions: u64,
    pub examined: u64,
    pub survivors: u64,
    pub witnesses: u64,
}

pub type ProgressFn = Arc<dyn Fn(&PartitionRecord) + Send + Sync>;

#[derive(Clone, Default)]
pub struct SearchOptions {
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    pub strategy: Strategy,
    /// Seed for audit sampling.
    pub seed: u64,
    pub progress: Option<ProgressFn>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Witness {
    pub l1: Vec<String>,
    pub l2: Vec<String>,
}

impl Witness {
    pub fn from_coeffs(l1: &[FieldElement], l2: &[FieldElement]) -> Self {
        Witness { l1: l1.iter().map(|&c| hex(c)).collect(), l2: l2.iter().map(|&c| hex(c)).collect() }
    }

    pub fn maps(&self, ctx: &Arc<FieldContext>) -> Result<(LinearizedPoly, LinearizedPoly)> {
        let parse = |v: &[String]| LinearizedPoly::parse(ctx.clone(), &v.join(","));
        Ok((parse(&self.l1)?, parse(&self.l2)?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageCount {
    pub stage: String,
    pub applied: bool,
    pub survivors: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditRecord {
    /// Rejected candidates are sampled at roughly one in this many.
    pub rate_denominator: u64,
    pub sampled: u64,
    /// Sampled rejections that turned out to be permutations.
    pub violations: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionInfo {
    pub partitions: u64,
    pub workers: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub field: String,
    pub mode: SearchMode,
    pub strategy: Strategy,
    /// `L1` when the mode fixes it.
    pub fixed_l1: Option<Vec<String>>,
    pub candidates: u64,
    pub attrition: Vec<StageCount>,
    pub witness_count: u64,
    pub witnesses: Vec<Witness>,
    /// Canonical mode: witnesses in the full pair space (each witness orbit is free).
    pub full_space_witness_count: Option<u128>,
    /// Candidates passing the Kloosterman criterion whose `F` is not bijective.
    pub criterion_mismatches: u64,
    pub audit: AuditRecord,
    pub partition: PartitionInfo,
    pub wall_time_ms: u64,
}

impl SearchReport {
    /// Witness `L1, L2` pairs as linearized polynomials.
    pub fn witness_maps(&self, ctx: &Arc<FieldContext>) -> Result<Vec<(LinearizedPoly, LinearizedPoly)>> {
        self.witnesses.iter().map(|w| w.maps(ctx)).collect()
    }

    /// Witnesses as `l1;l2` lines of comma-separated hex coefficients.
    pub fn witnesses_csv(&self) -> String {
        let mut out = String::from("l1,l2\n");
        for w in &self.witnesses {
            out.push_str(&format!("\"{}\",\"{}\"\n", w.l1.join(","), w.l2.join(",")));
        }
        out
    }
}

fn field(n: u32) -> Result<Arc<FieldContext>> {
    Ok(Arc::new(FieldContext::new(n, None)?))
}

struct Run<'a> {
    ctx: &'a Arc<FieldContext>,
    opts: &'a SearchOptions,
    mode: SearchMode,
    strategy: Strategy,
    fixed_l1: Option<&'a LinearizedPoly>,
    use_trace_q: bool,
    started: Instant,
}

impl Run<'_> {
    fn partitions(&self, count: u64, work: impl Fn(u64) -> Tally + Sync) -> Result<(Tally, usize)> {
        let body = || {
            let tallies: Vec<Tally> = (0..count)
                .into_par_iter()
                .map(|p| {
                    let t = work(p);
                    if let Some(progress) = &self.opts.progress {
                        progress(&PartitionRecord {
                            partition: p,
                            partitions: count,
                            examined: t.examined,
                            survivors: t.kloosterman,
                            witnesses: t.bijective,
                        });
                    }
                    t
                })
                .collect();
            let mut total = Tally::default();
            for t in tallies {
                total.merge(t);
            }
            (total, rayon::current_num_threads())
        };
        match self.opts.workers {
            Some(w) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(w.max(1))
                    .build()
                    .map_err(|e| Error::Argument(format!("thread pool: {e}")))?;
                Ok(pool.install(body))
            }
            None => Ok(body()),
        }
    }

    fn report(&self, tally: Tally, partitions: u64, workers: usize) -> Result<SearchReport> {
        let ctx = self.ctx;
        let mut pairs = tally
            .witnesses
            .iter()
            .map(|(c1, c2)| {
                let n = ctx.n() as usize;
                let l1 = LinearizedPoly::from_matrix(ctx.clone(), &BitMatrix::from_columns(n, c1.clone())?)?;
                let l2 = LinearizedPoly::from_matrix(ctx.clone(), &BitMatrix::from_columns(n, c2.clone())?)?;
                Ok((l1.coeffs().to_vec(), l2.coeffs().to_vec()))
            })
            .collect::<Result<Vec<_>>>()?;
        pairs.sort();
        let witnesses: Vec<Witness> = pairs.iter().map(|(a, b)| Witness::from_coeffs(a, b)).collect();
        let stage = |name: &str, applied: bool, survivors: u64| StageCount { stage: name.into(), applied, survivors };
        Ok(SearchReport {
            field: ctx.spec_string(),
            mode: self.mode,
            strategy: self.strategy,
            fixed_l1: self.fixed_l1.map(|l| l.coeffs().iter().map(|&c| hex(c)).collect()),
            candidates: tally.examined,
            attrition: vec![
                stage("candidates", true, tally.examined),
                stage("kernel_intersection", true, tally.kernel),
                stage("trace_q", self.use_trace_q, tally.trace_q),
                stage("kloosterman_zero", true, tally.kloosterman),
                stage("bijectivity", true, tally.bijective),
            ],
            witness_count: tally.bijective,
            full_space_witness_count: (self.mode == SearchMode::Canonical)
                .then(|| u128::from(tally.bijective) * gl_order(ctx.n())),
            witnesses,
            criterion_mismatches: tally.mismatches,
            audit: AuditRecord {
                rate_denominator: AUDIT_DENOMINATOR,
                sampled: tally.audit_sampled,
                violations: tally.audit_violations,
            },
            partition: PartitionInfo { partitions, workers, seed: self.opts.seed },
            wall_time_ms: self.started.elapsed().as_millis() as u64,
        })
    }
}

/// Every pair of nonzero maps for `n <= 3`; every canonical pair for `n = 4`.
pub fn full_search(n: u32) -> Result<SearchReport> {
    full_search_in(&field(n)?, &SearchOptions::default())
}

pub fn full_search_in(ctx: &Arc<FieldContext>, opts: &SearchOptions) -> Result<SearchReport> {
    match ctx.n() {
        n if n > 4 => Err(Error::Range(format!(
            "full search is limited to n <= 4 (got {n}); use the normalized or identity-L1 searches"
        ))),
        4 => canonical_search_in(ctx, opts),
        _ => raw_search(ctx, opts),
    }
}

fn raw_search(ctx: &Arc<FieldContext>, opts: &SearchOptions) -> Result<SearchReport> {
    let started = Instant::now();
    let n = ctx.n();
    let oracle = PairOracle::new(ctx.clone());
    let pipeline = Pipeline::new(&oracle, opts.seed);
    let q = ctx.order();
    let maps = 1u64 << (n * n);
    // index code - 1 for every nonzero code
    let tables: Vec<(BitMatrix, BitMatrix, Vec<FieldElement>)> = (1..maps)
        .map(|code| {
            let m = matrix_from_code(n, code);
            let ms = adjoint_matrix(ctx, &m);
            let t = table_of(&ms, q);
            (m, ms, t)
        })
        .collect();
    let run = Run {
        ctx,
        opts,
        mode: SearchMode::Full,
        strategy: Strategy::Flat,
        fixed_l1: None,
        use_trace_q: pipeline.use_trace_q,
        started,
    };
    let (tally, workers) = run.partitions(maps - 1, |p| {
        let (m1, m1s, l1s) = &tables[p as usize];
        let mut tally = Tally::default();
        for (i, (m2, m2s, _)) in tables.iter().enumerate() {
            let key = p << 32 | i as u64;
            pipeline.screen(l1s, m1s, m2s, key, &mut tally, || (m1.clone(), m2.clone()));
        }
        tally
    })?;
    run.report(tally, maps - 1, workers)
}

const CANONICAL_CHUNK: usize = 4096;

/// One representative per orbit of pairs of nonzero maps under
/// `(L1, L2) -> (A∘L1, A∘L2)`, `A` invertible. Requires `n <= 4`.
pub fn canonical_search(n: u32) -> Result<SearchReport> {
    canonical_search_in(&field(n)?, &SearchOptions::default())
}

pub fn canonical_search_in(ctx: &Arc<FieldContext>, opts: &SearchOptions) -> Result<SearchReport> {
    let started = Instant::now();
    let n = ctx.n();
    if n > 4 {
        return Err(Error::Range(format!("canonical search is limited to n <= 4, got {n}")));
    }
    let oracle = PairOracle::new(ctx.clone());
    let pipeline = Pipeline::new(&oracle, opts.seed);
    let reps: Vec<Vec<u32>> = canonical_pairs(n)?
        .filter(|rows| {
            let (m1, m2) = unstack(n as usize, rows);
            m1.columns().iter().any(|&c| c != 0) && m2.columns().iter().any(|&c| c != 0)
        })
        .collect();
    let chunks = reps.len().div_ceil(CANONICAL_CHUNK) as u64;
    let run = Run {
        ctx,
        opts,
        mode: SearchMode::Canonical,
        strategy: Strategy::Flat,
        fixed_l1: None,
        use_trace_q: pipeline.use_trace_q,
        started,
    };
    let (tally, workers) = run.partitions(chunks, |p| {
        let mut tally = Tally::default();
        let lo = p as usize * CANONICAL_CHUNK;
        let hi = (lo + CANONICAL_CHUNK).min(reps.len());
        for (i, rows) in reps[lo..hi].iter().enumerate() {
            let (m1, m2) = unstack(n as usize, rows);
            let (m1s, m2s) = (adjoint_matrix(ctx, &m1), adjoint_matrix(ctx, &m2));
            let l1s = table_of(&m1s, ctx.order());
            pipeline.screen(&l1s, &m1s, &m2s, (lo + i) as u64, &mut tally, || (m1, m2));
        }
        tally
    })?;
    run.report(tally, chunks, workers)
}

/// `L1(x) = x^(2^(n-1)) + x` and every `L2` with `L2*(1) = 1`. Requires `5 <= n <= 8`.
pub fn normalized_search(n: u32) -> Result<SearchReport> {
    normalized_search_in(&field(n)?, &SearchOptions::default())
}

pub fn normalized_search_in(ctx: &Arc<FieldContext>, opts: &SearchOptions) -> Result<SearchReport> {
    let n = ctx.n();
    if !(5..=8).contains(&n) {
        return Err(Error::Range(format!("normalized search needs 5 <= n <= 8, got {n}")));
    }
    let mut c = vec![0; n as usize];
    c[0] = 1;
    c[n as usize - 1] = 1;
    let l1 = LinearizedPoly::new(ctx.clone(), c)?;
    adjoint_search(ctx, opts, SearchMode::Normalized, &l1, Some(1))
}

/// `L1(x) = x` and every nonzero `L2`. Requires `n <= 6`.
pub fn identity_l1_search(n: u32) -> Result<SearchReport> {
    identity_l1_search_in(&field(n)?, &SearchOptions::default())
}

pub fn identity_l1_search_in(ctx: &Arc<FieldContext>, opts: &SearchOptions) -> Result<SearchReport> {
    let n = ctx.n();
    if n > 6 {
        return Err(Error::Range(format!("identity-L1 search needs n <= 6, got {n}")));
    }
    let l1 = LinearizedPoly::identity(ctx.clone());
    adjoint_search(ctx, opts, SearchMode::IdentityL1, &l1, None)
}

const FLAT_BLOCK: u64 = 1 << 14;

fn adjoint_search(
    ctx: &Arc<FieldContext>,
    opts: &SearchOptions,
    mode: SearchMode,
    l1: &LinearizedPoly,
    fixed_first: Option<FieldElement>,
) -> Result<SearchReport> {
    let started = Instant::now();
    let n = ctx.n();
    let q = ctx.order();
    let oracle = PairOracle::new(ctx.clone());
    let pipeline = Pipeline::new(&oracle, opts.seed);
    let m1 = l1.matrix();
    let m1s = adjoint_matrix(ctx, &m1);
    let l1s = table_of(&m1s, q);
    let strategy = match opts.strategy {
        Strategy::Auto if pipeline.use_trace_q => Strategy::Pruned,
        Strategy::Auto => Strategy::Flat,
        s => s,
    };
    let run = Run { ctx, opts, mode, strategy, fixed_l1: Some(l1), use_trace_q: pipeline.use_trace_q, started };
    let (tally, workers, partitions) = if strategy == Strategy::Pruned {
        let dfs = AdjointDfs {
            pipeline: &pipeline,
            l1s,
            m1s,
            m1: m1.clone(),
            fixed_first,
            skip_zero: fixed_first.is_none(),
            prune: pipeline.use_trace_q,
        };
        let parts = dfs.partitions();
        let (t, w) = run.partitions(parts, |p| dfs.run_partition(p as FieldElement))?;
        (t, w, parts)
    } else {
        // codes over the free columns; the fixed column, if any, is column 0
        let free_cols = n - u32::from(fixed_first.is_some());
        let space = 1u64 << (n * free_cols);
        let parts = space.div_ceil(FLAT_BLOCK);
        let (t, w) = run.partitions(parts, |p| {
            let mut tally = Tally::default();
            let lo = p * FLAT_BLOCK;
            let hi = (lo + FLAT_BLOCK).min(space);
            for code in lo..hi {
                let m2s = match fixed_first {
                    Some(c0) => {
                        let mut cols = vec![c0];
                        cols.extend(matrix_from_code_cols(n, free_cols, code));
                        BitMatrix::from_columns(n as usize, cols).expect("n <= 16")
                    }
                    None if code == 0 => continue,
                    None => matrix_from_code(n, code),
                };
                pipeline.screen(&l1s, &m1s, &m2s, mix(code), &mut tally, || (m1.clone(), adjoint_matrix(ctx, &m2s)));
            }
            tally
        })?;
        (t, w, parts)
    };
    run.report(tally, partitions, workers)
}

fn matrix_from_code_cols(n: u32, count: u32, code: u64) -> impl Iterator<Item = u32> {
    let mask = (1u64 << n) - 1;
    (0..count).map(move |j| (code >> (j * n) & mask) as u32)
}

/// Permutation pairs of nonzero maps found by evaluating `F` on coefficient
/// vectors directly, `L2` in the outer loop. No filters; `n <= 3`.
pub fn brute_force_witnesses(n: u32) -> Result<Vec<Witness>> {
    if n > 3 {
        return Err(Error::Range(format!("brute force is limited to n <= 3, got {n}")));
    }
    let ctx = field(n)?;
    let q = ctx.order();
    let vectors: Vec<Vec<FieldElement>> =
        (1..1u64 << (n * n)).map(|code| matrix_from_code_cols(n, n, code).collect()).collect();
    let tables: Vec<Vec<FieldElement>> = vectors
        .iter()
        .map(|c| {
            let l = LinearizedPoly::new(ctx.clone(), c.clone()).expect("valid coefficients");
            ctx.elements().map(|x| l.eval(x)).collect()
        })
        .collect();
    let inv: Vec<FieldElement> = ctx.elements().map(|x| ctx.inv0(x)).collect();
    let mut out: Vec<(Vec<FieldElement>, Vec<FieldElement>)> = (0..vectors.len())
        .into_par_iter()
        .flat_map_iter(|j| {
            let (tables, inv, vectors) = (&tables, &inv, &vectors);
            (0..vectors.len()).filter_map(move |i| {
                let mut seen = vec![false; q as usize];
                for x in 0..q as usize {
                    let y = (tables[i][inv[x] as usize] ^ tables[j][x]) as usize;
                    if seen[y] {
                        return None;
                    }
                    seen[y] = true;
                }
                Some((vectors[i].clone(), vectors[j].clone()))
            })
        })
        .collect();
    out.sort();
    Ok(out.iter().map(|(a, b)| Witness::from_coeffs(a, b)).collect())
}
