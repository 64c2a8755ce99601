//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line; the
//! test fails if any criterion does.

use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use linv_core::gf2n::{hex, irreducibles};
use linv_core::inverse_perm::{build_f, x8_coefficient_parity, PairOracle};
use linv_core::kloosterman::{kloosterman_sum, kloosterman_sums, kloosterman_zeros, TraceQTable};
use linv_core::search::{self, canonical_count, SearchReport};
use linv_core::suites::{self, Verdict};
use linv_core::vbf::{apply_ea, check_ccz_witness, check_ea_witness, AffineMap, AffineMapProduct, TruthTable};
use linv_core::FieldContext;

type Failures = Vec<String>;
type Criterion = (&'static str, fn() -> Failures);

fn field(n: u32) -> Arc<FieldContext> {
    Arc::new(FieldContext::new(n, None).unwrap())
}

fn expect(fails: &mut Failures, ok: bool, what: impl FnOnce() -> String) {
    if !ok {
        fails.push(what());
    }
}

fn verdict(fails: &mut Failures, v: &Verdict, min_cases: u64) {
    expect(fails, v.holds(), || format!("{} on {}: {:?}", v.claim, v.field, v.violations));
    expect(fails, v.cases_checked >= min_cases, || {
        format!("{} on {}: {} cases, expected at least {min_cases}", v.claim, v.field, v.cases_checked)
    });
}

fn witnesses_permute(fails: &mut Failures, n: u32, r: &SearchReport) {
    let ctx = field(n);
    for (l1, l2) in r.witness_maps(&ctx).unwrap() {
        expect(fails, build_f(&l1, &l2).unwrap().is_permutation(), || {
            format!("n = {n}: witness {l1:?}, {l2:?} is not a permutation")
        });
    }
    expect(fails, r.criterion_mismatches == 0, || format!("n = {n}: {} criterion mismatches", r.criterion_mismatches));
    expect(fails, r.audit.violations == 0, || format!("n = {n}: {} audit violations", r.audit.violations));
}

fn mod16_characterization() -> Failures {
    let mut fails = vec![];
    for n in 4..=12 {
        let ctx = field(n);
        let sums = kloosterman_sums(&ctx);
        let tq = TraceQTable::new(&ctx);
        for a in ctx.elements() {
            let k = sums[a as usize];
            if n <= 10 || a % 61 == 0 {
                expect(&mut fails, k == kloosterman_sum(&ctx, a), || {
                    format!("n = {n}, a = {}: fast sum differs", hex(a))
                });
            }
            expect(&mut fails, (k % 16 == 0) == tq.both_zero(a), || {
                format!("n = {n}, a = {}: K = {k}, Tr = {}, Q = {}", hex(a), tq.trace(a), tq.q(a))
            });
        }
        verdict(&mut fails, &suites::theorem3(&ctx, &sums).unwrap(), ctx.order() as u64);
    }
    fails
}

fn criterion_agrees_with_bijectivity() -> Failures {
    let mut fails = vec![];
    let v = suites::proposition2(&PairOracle::new(field(3)), 0, 0);
    verdict(&mut fails, &v, 511 * 511);
    expect(&mut fails, v.cases_checked == 261_121, || format!("n = 3: {} pairs", v.cases_checked));
    let v = suites::proposition2(&PairOracle::new(field(4)), 0, 0);
    verdict(&mut fails, &v, canonical_count(4) as u64);
    for n in 5..=8 {
        verdict(&mut fails, &suites::proposition2(&PairOracle::new(field(n)), 100_000, 0x5eed ^ n as u64), 100_000);
    }
    fails
}

fn dichotomy() -> Failures {
    let mut fails = vec![];
    for n in [3, 4] {
        let r = search::full_search(n).unwrap();
        expect(&mut fails, r.witness_count > 0, || format!("full search at n = {n} found no witness"));
        witnesses_permute(&mut fails, n, &r);
    }
    let r = search::canonical_search(4).unwrap();
    expect(&mut fails, r.witness_count > 0, || "canonical search at n = 4 found no witness".into());
    let t = Instant::now();
    for (n, r) in [
        (5, search::normalized_search(5).unwrap()),
        (6, search::normalized_search(6).unwrap()),
        (5, search::identity_l1_search(5).unwrap()),
    ] {
        expect(&mut fails, r.witness_count == 0, || {
            format!("{:?} search at n = {n}: {} witnesses", r.mode, r.witness_count)
        });
        witnesses_permute(&mut fails, n, &r);
    }
    expect(&mut fails, t.elapsed().as_secs() < 600, || format!("n >= 5 searches took {:?}", t.elapsed()));
    fails
}

fn identity_boundary() -> Failures {
    let mut fails = vec![];
    for n in 3..=6 {
        let r = search::identity_l1_search(n).unwrap();
        let ok = if n <= 4 { r.witness_count > 0 } else { r.witness_count == 0 };
        expect(&mut fails, ok, || format!("identity L1 at n = {n}: {} witnesses", r.witness_count));
        if n == 6 {
            let trace_q = &r.attrition[2];
            expect(&mut fails, trace_q.applied, || "n = 6 ran without the Tr/Q filter".into());
            expect(&mut fails, r.attrition[4].survivors == r.witness_count, || "bijectivity count mismatch".into());
        }
        witnesses_permute(&mut fails, n, &r);
    }
    fails
}

fn recurrence_engine() -> Failures {
    let mut fails = vec![];
    for n in [5, 7, 9, 11] {
        let parity = x8_coefficient_parity(n).unwrap();
        expect(&mut fails, parity == 1, || format!("n = {n}: x^8 tuple parity {parity}"));
        verdict(&mut fails, &suites::theorem8(&field(n)).unwrap(), 1 << n);
    }
    for n in [6, 8, 10] {
        verdict(&mut fails, &suites::theorem8(&field(n)).unwrap(), 1 << n);
    }
    fails
}

fn property_suites() -> Failures {
    let mut fails = vec![];
    for n in 2..=6 {
        let ctx = field(n);
        let q = ctx.order() as u64;
        verdict(&mut fails, &suites::lemma2(&ctx, 0, 0), q * q * (q - 1));
        verdict(&mut fails, &suites::lemma4(&ctx, 0, 0), (q - 1) * (q - 2) * (q - 3) / 6);
    }
    for n in 2..=10 {
        let ctx = field(n);
        verdict(&mut fails, &suites::prop3(&ctx), ctx.order() as u64 - 1);
    }
    fails
}

fn census() -> Failures {
    let mut fails = vec![];
    for n in 3..=12 {
        let moduli: Vec<u32> = irreducibles(n).take(2).collect();
        let mut distributions = vec![];
        for &m in &moduli {
            let ctx = FieldContext::new(n, Some(m)).unwrap();
            let c = kloosterman_zeros(&ctx, false);
            expect(&mut fails, c.zero_count >= 1, || format!("{}: no zero", c.field));
            expect(&mut fails, c.zero_count == c.zeros.len(), || format!("{}: zero count mismatch", c.field));
            if n >= 5 {
                expect(&mut fails, !c.any_zero_in_proper_subfield(), || {
                    format!("{}: zero in a proper subfield", c.field)
                });
            }
            distributions.push(c.value_distribution.pairs());
        }
        expect(&mut fails, moduli.len() == 2 && moduli[0] != moduli[1], || format!("n = {n}: need two moduli"));
        expect(&mut fails, distributions.windows(2).all(|w| w[0] == w[1]), || {
            format!("n = {n}: census depends on the modulus")
        });
    }
    fails
}

fn differential_uniformity() -> Failures {
    let mut fails = vec![];
    let mut check = |n: u32, k: u64, want: u32| {
        let du = TruthTable::power(field(n), k).differential_uniformity();
        expect(&mut fails, du == want, || format!("x^{k} on n = {n}: uniformity {du}, expected {want}"));
    };
    for n in [3, 5, 7] {
        check(n, 3, 2);
    }
    for n in [3, 5, 7, 9] {
        check(n, (1 << n) - 2, 2);
    }
    for n in [4, 6, 8, 10] {
        check(n, (1 << n) - 2, 4);
    }
    fails
}

fn equivalence_witnesses() -> Failures {
    let mut fails = vec![];
    for n in 5..=8 {
        let f = TruthTable::inverse_function(field(n));
        expect(&mut fails, check_ccz_witness(&f, &f, &AffineMapProduct::swap(n)).unwrap(), || {
            format!("n = {n}: swap does not map the graph of x^-1 to itself")
        });
        let (ds, ws) = (f.differential_spectrum(), f.walsh_spectrum());
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        for i in 0..100 {
            let a1 = AffineMap::random_permutation(n, &mut rng);
            let a2 = AffineMap::random_permutation(n, &mut rng);
            let a3 = AffineMap::random(n, &mut rng);
            let g = apply_ea(&f, &a1, &a2, &a3);
            expect(&mut fails, check_ea_witness(&f, &g, &a1, &a2, &a3).unwrap(), || {
                format!("n = {n}, #{i}: EA witness rejected")
            });
            let graph = AffineMapProduct::from_ea(n, &a1, &a2, &a3).unwrap();
            expect(&mut fails, check_ccz_witness(&f, &g, &graph).unwrap(), || {
                format!("n = {n}, #{i}: graph witness rejected")
            });
            expect(&mut fails, g.differential_spectrum() == ds, || {
                format!("n = {n}, #{i}: differential spectrum changed")
            });
            expect(&mut fails, g.walsh_spectrum() == ws, || format!("n = {n}, #{i}: Walsh spectrum changed"));
        }
    }
    fails
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("1 mod-16 characterization of Kloosterman sums, n = 4..12", mod16_characterization),
        ("2 Kloosterman criterion equals bijectivity", criterion_agrees_with_bijectivity),
        ("3 witnesses at n <= 4, none in the normalized and identity searches at n >= 5", dichotomy),
        ("4 identity L1 boundary, n = 3..6", identity_boundary),
        ("5 coefficient recurrence and x^8 parity", recurrence_engine),
        ("6 quadratic, hyperplane and image-set suites", property_suites),
        ("7 Kloosterman zero census, n = 3..12", census),
        ("8 differential uniformity of x^3 and x^-1", differential_uniformity),
        ("9 CCZ and EA witnesses for x^-1, n = 5..8", equivalence_witnesses),
    ];
    let mut failed = vec![];
    for (name, run) in criteria {
        let t = Instant::now();
        let fails = run();
        let status = if fails.is_empty() { "PASS" } else { "FAIL" };
        println!("{status} criterion {name} ({:.1?})", t.elapsed());
        for f in fails.iter().take(10) {
            println!("    {f}");
        }
        if !fails.is_empty() {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
