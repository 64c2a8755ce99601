use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use linv_core::inverse_perm::{build_f, normalize_pair, quad_has_root, quad_solvable, PairOracle};
use linv_core::kloosterman::{qform, qform_via_polarization};
use linv_core::search::canonicalize;
use linv_core::vbf::TruthTable;
use linv_core::{FieldContext, LinearizedPoly};

fn field(n: u32) -> Arc<FieldContext> {
    Arc::new(FieldContext::new(n, None).unwrap())
}

fn elem(n: u32) -> impl Strategy<Value = u32> {
    0..1u32 << n
}

fn field_and_three() -> impl Strategy<Value = (u32, u32, u32, u32)> {
    (2u32..=16).prop_flat_map(|n| (Just(n), elem(n), elem(n), elem(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn field_axioms((n, a, b, c) in field_and_three()) {
        let f = field(n);
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv0(a)), 1);
        }
        prop_assert_eq!(f.pow(a, 1u64 << n), a);
        prop_assert_eq!(f.square(f.sqrt(a)), a);
    }

    #[test]
    fn trace_is_linear_and_frobenius_invariant((n, a, b, _c) in field_and_three()) {
        let f = field(n);
        prop_assert_eq!(f.trace(a ^ b), f.trace(a) ^ f.trace(b));
        prop_assert_eq!(f.trace(f.square(a)), f.trace(a));
        prop_assert_eq!(f.trace(a), f.trace_direct(a));
    }

    #[test]
    fn quadratic_form_polarizes((n, a, _b, _c) in field_and_three()) {
        let f = field(n);
        prop_assert_eq!(qform(&f, a), qform_via_polarization(&f, a));
    }

    #[test]
    fn quadratic_root_criterion((n, a, b, c) in field_and_three()) {
        prop_assume!(n <= 12 && b != 0);
        let f = field(n);
        prop_assert_eq!(quad_solvable(&f, a, b, c).unwrap(), quad_has_root(&f, a, b, c));
    }

    #[test]
    fn adjoint_duality(n in 2u32..=10, seed: u64) {
        let f = field(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = LinearizedPoly::random(f.clone(), &mut rng);
        let ls = l.adjoint();
        prop_assert_eq!(&ls.adjoint(), &l);
        for x in [1u32, 2, 3, (1 << n) - 1] {
            for y in [1u32, (1 << n) - 2, 5 % (1 << n)] {
                prop_assert_eq!(f.trace(f.mul(l.eval(x), y)), f.trace(f.mul(x, ls.eval(y))));
            }
        }
        prop_assert_eq!(l.rank(), ls.rank());
        prop_assert_eq!(l.kernel().dim() + l.image().dim(), n as usize);
    }

    #[test]
    fn composition_is_matrix_product(n in 2u32..=10, seed: u64) {
        let f = field(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (LinearizedPoly::random(f.clone(), &mut rng), LinearizedPoly::random(f.clone(), &mut rng));
        let ab = a.compose(&b).unwrap();
        prop_assert_eq!(ab.matrix(), a.matrix().mul(&b.matrix()).unwrap());
        prop_assert_eq!(LinearizedPoly::from_matrix(f.clone(), &ab.matrix()).unwrap(), ab);
    }

    #[test]
    fn pair_criterion_matches_evaluation(n in 2u32..=7, seed: u64) {
        let f = field(n);
        let oracle = PairOracle::new(f.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (l1, l2) = (LinearizedPoly::random(f.clone(), &mut rng), LinearizedPoly::random(f.clone(), &mut rng));
        let direct = build_f(&l1, &l2).unwrap().is_permutation();
        prop_assert_eq!(oracle.perm_criterion(&l1, &l2).unwrap(), direct);
        prop_assert_eq!(oracle.is_permutation_m(&l1.matrix(), &l2.matrix()), direct);
    }

    #[test]
    fn normalization_preserves_bijectivity(n in 3u32..=8, seed: u64) {
        let f = field(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // x^2 + k x composed with a random bijection has a kernel of size 2.
        let k = 1 + (seed as u32) % ((1 << n) - 1);
        let base = LinearizedPoly::new(f.clone(), [vec![k, 1], vec![0; n as usize - 2]].concat()).unwrap();
        let a = loop {
            let a = LinearizedPoly::random(f.clone(), &mut rng);
            if a.is_bijective() { break a; }
        };
        let l1 = a.compose(&base).unwrap();
        let l2 = LinearizedPoly::random(f.clone(), &mut rng);
        let (m1, m2) = normalize_pair(&l1, &l2).unwrap().expect("kernel of size 2");
        let x = LinearizedPoly::monomial(f.clone(), n - 1, 1).add(&LinearizedPoly::identity(f.clone())).unwrap();
        prop_assert_eq!(&m1, &x);
        prop_assert_eq!(
            build_f(&m1, &m2).unwrap().is_permutation(),
            build_f(&l1, &l2).unwrap().is_permutation()
        );
    }

    #[test]
    fn canonical_form_depends_only_on_the_row_space(n in 2usize..=6, seed: u64) {
        let f = field(n as u32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (l1, l2) = (LinearizedPoly::random(f.clone(), &mut rng), LinearizedPoly::random(f.clone(), &mut rng));
        let a = loop {
            let a = LinearizedPoly::random(f.clone(), &mut rng);
            if a.is_bijective() { break a; }
        };
        let (m1, m2) = (l1.matrix(), l2.matrix());
        let base = canonicalize(&m1, &m2);
        prop_assert_eq!(canonicalize(&a.matrix().mul(&m1).unwrap(), &a.matrix().mul(&m2).unwrap()), base);
    }

    #[test]
    fn walsh_fast_matches_direct(n in 2u32..=6, seed: u64) {
        let f = field(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..1u32 << n).map(|_| rand::Rng::gen_range(&mut rng, 0..1u32 << n)).collect();
        let t = TruthTable::new(f, values).unwrap();
        prop_assert_eq!(t.walsh_spectrum_fast(), t.walsh_spectrum_direct());
    }

    #[test]
    fn truth_table_text_round_trip(n in 2u32..=8, seed: u64) {
        let f = field(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = LinearizedPoly::random(f, &mut rng);
        let t = TruthTable::from_linearized(&l);
        prop_assert_eq!(TruthTable::parse(&t.to_text()).unwrap(), t);
    }
}
