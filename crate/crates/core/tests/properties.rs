use num_traits::{Signed, Zero};
use proptest::collection::{btree_map, btree_set};
use proptest::prelude::*;
use tsirelson::families::{family_member, FamilySpec, FiniteSet};
use tsirelson::norm::norm_value;
use tsirelson::parameters::SpaceSpec;
use tsirelson::rational::q;
use tsirelson::vectors::{repeated_average, FinVector, IncreasingSeq};
use tsirelson::Q;

fn vector(max_len: usize) -> impl Strategy<Value = FinVector> {
    btree_map(1u64..=14, (-6i64..=6, 1i64..=4), 1..=max_len)
        .prop_map(|m| FinVector::from_pairs(m.into_iter().map(|(i, (p, d))| (i, q(p, d)))))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn vectors_round_trip_through_json(x in vector(8)) {
        let text = serde_json::to_string(&x).unwrap();
        prop_assert_eq!(serde_json::from_str::<FinVector>(&text).unwrap(), x);
    }

    #[test]
    fn schreier_families_agree_with_the_modified_ones(set in btree_set(1u64..=12, 0..=8), n in 1u64..=2) {
        let f = FiniteSet::new(set.into_iter().collect()).unwrap();
        prop_assert_eq!(family_member(&f, &FamilySpec::s(n)), family_member(&f, &FamilySpec::sm(n)));
    }

    #[test]
    fn norm_sits_between_sup_and_sum(x in vector(6)) {
        let v = norm_value(&x, &SpaceSpec::tsirelson_toy()).unwrap();
        prop_assert!(x.linf() <= v && v <= x.l1());
    }

    #[test]
    fn norm_ignores_signs_and_scales(x in vector(5), p in 1i64..=5, d in 1i64..=3) {
        let spec = SpaceSpec::a3_a9_toy();
        let v = norm_value(&x, &spec).unwrap();
        prop_assert_eq!(norm_value(&x.abs(), &spec).unwrap(), v.clone());
        let c = q(-p, d);
        prop_assert_eq!(norm_value(&x.scale(&c), &spec).unwrap(), c.abs() * v);
    }

    #[test]
    fn repeated_averages_are_probability_vectors(start in 1u64..=40, n in 0u64..=2) {
        let start = if n == 2 { 1 + start % 5 } else { start };
        let x = repeated_average(&IncreasingSeq::from(start), n).unwrap();
        prop_assert_eq!(x.sum(), q(1, 1));
        prop_assert!(x.iter().all(|(_, a)| a > &Q::zero()));
    }

    #[test]
    fn averages_from_a_power_of_two_are_dyadic(e in 0u32..=5, n in 0u64..=2) {
        let e = if n == 2 { e % 3 } else { e };
        let x = repeated_average(&IncreasingSeq::from(1 << e), n).unwrap();
        for (_, a) in x.iter() {
            prop_assert_eq!(a.denom().magnitude().count_ones(), 1);
        }
    }
}
