use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use selmer_core::arith::{is_prime, is_squarefree};
use selmer_core::dlog::{discrete_log, primitive_root, GroupOps, PrimeField};
use selmer_core::groups::{dihedral_group, GRelation};
use selmer_core::legendre::{reduction_type, split_oracle, LegendreCurve};
use selmer_core::quadfield::{
    class_group, count_reduced_definite, BinaryForm, ClassGroupBounds, PrimeSet, QuadraticField, ResidueUnitGroup,
};
use selmer_core::regconst::{invariant_pairing, lattice_library, random_unimodular, regulator_constant};

fn odd_lambda() -> impl Strategy<Value = i64> {
    (1i64..500_000_000).prop_flat_map(|k| prop_oneof![Just(2 * k + 1), Just(-(2 * k + 1))])
}

fn squarefree(range: std::ops::RangeInclusive<i64>) -> impl Strategy<Value = i64> {
    range.prop_filter("squarefree, not 1", |&d| d != 0 && d != 1 && is_squarefree(d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduction_type_matches_oracle(l in odd_lambda()) {
        let lambda = BigInt::from(l);
        let curve = LegendreCurve::new(lambda.clone()).unwrap();
        for q in curve.bad_primes().unwrap().into_iter().filter(|&q| q != 2 && q < 100_000) {
            prop_assert_eq!(reduction_type(&lambda, q).unwrap().kind, split_oracle(&lambda, q).unwrap());
        }
        prop_assert!(curve.invariants().is_consistent());
    }

    #[test]
    fn residue_logs_invert_exponentiation(
        d in squarefree(-300..=300),
        p in prop::sample::select(vec![3u64, 5, 7, 11]),
        start in 0u64..2_000,
        seed in any::<u64>(),
        raw in prop::collection::vec(any::<u64>(), 2),
    ) {
        let k = QuadraticField::new(d).unwrap();
        let q = (start..start + 100_000)
            .find(|&q| is_prime(q) && k.disc() % q as i64 != 0 && PrimeSet::S2.contains(&k, p, q));
        // S2 is empty when d = p ≡ 1 mod 4
        prop_assume!(q.is_some());
        let q = q.unwrap();
        let grp = ResidueUnitGroup::new(&k, q, seed).unwrap();
        let exps: Vec<u64> = raw.iter().zip(&grp.orders).map(|(r, o)| r % o).collect();
        let x = grp.element(&exps);
        prop_assert_eq!(grp.log(&x).unwrap(), exps);
        prop_assert_eq!(grp.tau(&grp.tau(&x)), x);
        prop_assert_eq!(grp.mul(&x, &grp.inverse(&x)), grp.one());
    }

    #[test]
    fn regulator_constants_ignore_the_basis(p in prop::sample::select(vec![3u64, 5, 7]), seed in any::<u64>()) {
        let g = dihedral_group(p).unwrap();
        let theta = GRelation::dihedral(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (label, lattice) in lattice_library(&g) {
            let base = regulator_constant(&g, &theta, &lattice, &invariant_pairing(&lattice, &g).unwrap()).unwrap();
            let (u, u_inv) = random_unimodular(lattice.rank(), 3 * lattice.rank(), &mut rng);
            let moved = lattice.change_basis(&u, &u_inv).unwrap();
            let v = regulator_constant(&g, &theta, &moved, &invariant_pairing(&moved, &g).unwrap()).unwrap();
            prop_assert_eq!(v, base, "{}", label);
        }
    }

    #[test]
    fn form_class_numbers_agree(d in squarefree(-20_000..=-1)) {
        let k = QuadraticField::new(d).unwrap();
        let data = class_group(&k, ClassGroupBounds::default()).unwrap();
        prop_assert_eq!(data.h, count_reduced_definite(k.disc()));
        prop_assert_eq!(data.structure.iter().product::<u64>(), data.h);
        for gen in &data.generators {
            let f = gen.form(k.disc());
            prop_assert_eq!(f.pow(data.h).reduce(), BinaryForm::identity(k.disc()).reduce());
        }
    }

    #[test]
    fn prime_field_logs(q in (3u64..1_000_000).prop_filter("prime", |&q| is_prime(q)), e in any::<u64>()) {
        let f = PrimeField(q);
        let g = primitive_root(q, 0);
        let e = e % (q - 1);
        let h = f.pow(&g, e);
        prop_assert_eq!(discrete_log(&f, &g, &h, q - 1), Some(e));
    }
}
