//! Randomized algebraic laws. Lattices and modules are built from a
//! proptest-chosen seed so that shrinking stays meaningful on the parameters.

use super::common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Integer, Rational};
use stark_index::abelian::{enumerate_characters, quotient_and_projection, FiniteAbelianGroup, Subgroup};
use stark_index::arithmetic::PlaceData;
use stark_index::cyclotomic::CyclotomicField;
use stark_index::group_ring::{euler_factor, idempotent, QElem};
use stark_index::lattice::{rubin_vs_wedge_index, semisimplify, sinnott_index, IndexMode, RationalLattice};
use stark_index::linalg;
use stark_index::numeric::{rationalize, PrecisionContext};

const FACTOR_LISTS: &[&[u64]] = &[&[2], &[3], &[4], &[5], &[6], &[2, 2], &[2, 4], &[3, 3], &[2, 6], &[8], &[2, 2, 2]];

fn group() -> impl Strategy<Value = FiniteAbelianGroup> {
    prop::sample::select(FACTOR_LISTS).prop_map(|f| FiniteAbelianGroup::new(f).unwrap())
}

fn small_group() -> impl Strategy<Value = FiniteAbelianGroup> {
    prop::sample::select(&FACTOR_LISTS[..6]).prop_map(|f| FiniteAbelianGroup::new(f).unwrap())
}

fn random_qelem(rng: &mut impl Rng, g: &FiniteAbelianGroup) -> QElem {
    QElem::from_vector(g, (0..g.order()).map(|_| Rational::from((rng.gen_range(-5i64..=5), rng.gen_range(1u32..=3)))).collect())
}

fn random_subgroup(rng: &mut impl Rng, g: &FiniteAbelianGroup) -> Subgroup {
    let x = g.element(rng.gen_range(0..g.order()));
    Subgroup::generated_by(g, &[x]).unwrap()
}

fn random_unimodular(rng: &mut impl Rng, n: usize) -> Vec<Vec<Integer>> {
    let mut u = linalg::identity_z(n);
    for _ in 0..3 * n {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            let k = rng.gen_range(-2i64..=2);
            let row = u[j].clone();
            for (a, b) in u[i].iter_mut().zip(row) {
                *a += b * k;
            }
        }
    }
    u
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn group_laws(g in group(), a in 0usize..64, b in 0usize..64, c in 0usize..64) {
        let n = g.order();
        let (a, b, c) = (g.element(a % n), g.element(b % n), g.element(c % n));
        prop_assert_eq!(g.add(&g.add(&a, &b), &c), g.add(&a, &g.add(&b, &c)));
        prop_assert_eq!(g.add(&a, &b), g.add(&b, &a));
        prop_assert_eq!(g.add(&a, &g.identity()), a.clone());
        prop_assert_eq!(g.add(&a, &g.neg(&a)), g.identity());
        prop_assert_eq!(g.element(g.index_of(&a)), a.clone());
        prop_assert_eq!(g.mul_int(&a, g.element_order(&a) as i64), g.identity());
    }

    #[test]
    fn characters_are_homomorphisms(g in group(), a in 0usize..64, b in 0usize..64, k in 0usize..64) {
        let n = g.order();
        let (a, b) = (g.element(a % n), g.element(b % n));
        let chars = enumerate_characters(&g);
        prop_assert_eq!(chars.len(), n);
        let chi = &chars[k % n];
        let m = g.exponent();
        prop_assert_eq!(chi.value_power(&g.add(&a, &b)), (chi.value_power(&a) + chi.value_power(&b)) % m);
        let psi = &chars[(k + 1) % n];
        prop_assert_eq!(chi.mul(psi).value_power(&a), (chi.value_power(&a) + psi.value_power(&a)) % m);
        prop_assert!(chi.mul(&chi.inverse()).is_trivial());
    }

    #[test]
    fn idempotents_are_orthogonal(g in small_group(), i in 0usize..16, j in 0usize..16) {
        let chars = enumerate_characters(&g);
        let (chi, psi) = (&chars[i % chars.len()], &chars[j % chars.len()]);
        let (e, f) = (idempotent(chi), idempotent(psi));
        let prod = e.mul(&f);
        if chi == psi {
            prop_assert_eq!(prod, e);
        } else {
            prop_assert!(prod.is_zero());
        }
    }

    #[test]
    fn group_ring_is_a_commutative_ring(g in group(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (random_qelem(&mut rng, &g), random_qelem(&mut rng, &g), random_qelem(&mut rng, &g));
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
        prop_assert_eq!(x.mul(&QElem::rational_one(&g)), x.clone());
        prop_assert_eq!(x.involution().involution(), x.clone());
        prop_assert_eq!(x.mul(&y).augmentation(), x.augmentation() * y.augmentation());
    }

    #[test]
    fn projection_is_a_ring_map(g in group(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_subgroup(&mut rng, &g);
        let quo = quotient_and_projection(&g, &h).unwrap();
        let (x, y) = (random_qelem(&mut rng, &g), random_qelem(&mut rng, &g));
        prop_assert_eq!(x.mul(&y).project(&quo), x.project(&quo).mul(&y.project(&quo)));
        prop_assert_eq!(x.add(&y).project(&quo), x.project(&quo).add(&y.project(&quo)));
        prop_assert_eq!(QElem::rational_one(&g).project(&quo), QElem::rational_one(&quo.target));
        prop_assert_eq!(quo.target.order() * h.order(), g.order());
    }

    #[test]
    fn euler_factor_values(g in small_group(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inertia = random_subgroup(&mut rng, &g);
        let frob = g.element(rng.gen_range(0..g.order()));
        let f = euler_factor(&frob, &inertia);
        let field = CyclotomicField::new(g.exponent());
        let one = QElem::rational_one(&g);
        for chi in enumerate_characters(&g) {
            let v = f.character_value(&chi, &field);
            // χ(1 − σ⁻¹e_I) is 1 − χ(σ)⁻¹ when χ is trivial on I and 1 otherwise
            let want = if chi.is_trivial_on(&inertia) {
                one.sub(&QElem::sigma(&g, &g.neg(&frob))).character_value(&chi, &field)
            } else {
                one.character_value(&chi, &field)
            };
            prop_assert_eq!(v, want);
        }
    }

    #[test]
    fn delta_augmentation(n1 in 2u64..40, n2 in 2u64..40, f1 in 0u64..2, f2 in 0u64..2) {
        let g = FiniteAbelianGroup::new(&[2]).unwrap();
        let place = |l: &str, n: u64, f: u64| PlaceData::unramified(l, Some(Integer::from(n)), vec![f], &g).unwrap();
        let ext = stark_index::arithmetic::ExtensionData {
            group: g.clone(),
            r: 1,
            ramified: vec![],
            s_prime: vec![],
            t_places: vec![place("a", n1, f1), place("b", n2, f2)],
            roots_of_unity: 2,
        };
        let d = stark_index::group_ring::delta_t(&ext).unwrap();
        prop_assert_eq!(d.augmentation(), Rational::from((1 - n1 as i64) * (1 - n2 as i64)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn sinnott_index_is_multiplicative(n in 1usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (random_lattice(&mut rng, n), random_lattice(&mut rng, n), random_lattice(&mut rng, n));
        let ab = sinnott_index(&a, &b, IndexMode::Rational).unwrap();
        let bc = sinnott_index(&b, &c, IndexMode::Rational).unwrap();
        let ac = sinnott_index(&a, &c, IndexMode::Rational).unwrap();
        prop_assert_eq!(Rational::from(&ab * &bc), ac);
        prop_assert_eq!(sinnott_index(&b, &a, IndexMode::Rational).unwrap(), ab.recip());
        for p in [2u64, 3] {
            let pa = sinnott_index(&a, &b, IndexMode::PAdic(p)).unwrap();
            let pb = sinnott_index(&b, &c, IndexMode::PAdic(p)).unwrap();
            prop_assert_eq!(Rational::from(&pa * &pb), sinnott_index(&a, &c, IndexMode::PAdic(p)).unwrap());
        }
    }

    #[test]
    fn index_of_image_is_determinant(n in 1usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_lattice(&mut rng, n);
        let gamma: Vec<Vec<Rational>> = (0..n).map(|_| (0..n).map(|_| q(rng.gen_range(-4i64..=4))).collect()).collect();
        let det = linalg::det_q(&gamma);
        prop_assume!(det != 0);
        let image = m.image(&gamma, n);
        prop_assert_eq!(sinnott_index(&m, &image, IndexMode::Rational).unwrap(), det.abs());
    }

    #[test]
    fn hnf_is_basis_invariant(n in 1usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<Integer>> = (0..n).map(|_| (0..n).map(|_| Integer::from(rng.gen_range(-9i64..=9))).collect()).collect();
        let u = random_unimodular(&mut rng, n);
        let moved = linalg::mat_mul_z(&u, &rows, n);
        prop_assert_eq!(linalg::hnf(&moved), linalg::hnf(&rows));
        prop_assert_eq!(RationalLattice::from_integer_rows(n, &moved), RationalLattice::from_integer_rows(n, &rows));
    }

    #[test]
    fn rationalize_recovers_small_fractions(p in -10_000i64..10_000, d in 1u32..1000) {
        let ctx = PrecisionContext::new(50).unwrap();
        let x = Rational::from((p, d));
        let got = rationalize(&ctx.from_rational(&x), 1_000_000, &ctx.tau());
        prop_assert_eq!(got, Some(x));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn rubin_index_matches_brute_force(shape in 0usize..4, semisimple in any::<bool>(), seed in any::<u64>()) {
        let (f, b, r): (&[u64], usize, usize) = [(&[2u64][..], 1, 1), (&[3], 1, 1), (&[2], 2, 2), (&[3], 2, 2)][shape];
        let g = FiniteAbelianGroup::new(f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_full_g_lattice(&mut rng, &g, b, 3);
        let m = if semisimple { semisimplify(&m).unwrap().0 } else { m };
        let idx = rubin_vs_wedge_index(&m, r, &QElem::rational_one(&g)).unwrap();
        let oracle = rubin_index_brute_force(&m, r).unwrap();
        prop_assert_eq!(idx, Rational::from(oracle));
    }
}
