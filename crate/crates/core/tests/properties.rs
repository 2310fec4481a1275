use collatz_conjugate::collatz::{bernoulli_f, step_t, QMap};
use collatz_conjugate::conjugate::{bernoulli_b, g, g2_symbolic};
use collatz_conjugate::intervals::{image_intervals, IntervalId};
use collatz_conjugate::{decode_h, encode_h, Dyadic};
use num_bigint::BigUint;
use proptest::prelude::*;

fn big() -> impl Strategy<Value = BigUint> {
    prop::collection::vec(any::<u32>(), 0..12).prop_map(BigUint::new)
}

fn qmap() -> impl Strategy<Value = QMap> {
    prop_oneof![Just(3u32), Just(5), Just(7), Just(9), Just(11)].prop_map(|q| QMap::new(q).unwrap())
}

proptest! {
    #[test]
    fn coding_round_trip(m in big()) {
        let x = encode_h(&m);
        prop_assert!(x.is_canonical());
        prop_assert!(x < Dyadic::one());
        prop_assert_eq!(decode_h(&x).unwrap(), m);
    }

    #[test]
    fn coding_reverses_digits(m in big()) {
        let x = encode_h(&m);
        let reversed: String = m.to_str_radix(2).chars().rev().collect();
        let expected = if m == BigUint::default() { "0".to_string() } else { format!("0.{reversed}") };
        prop_assert_eq!(x.to_binary_string(), expected);
    }

    #[test]
    fn conjugacy(m in big(), q in qmap()) {
        prop_assert_eq!(g(&encode_h(&m), q).unwrap(), encode_h(&step_t(&m, q)));
    }

    #[test]
    fn digit_formula(m in big()) {
        let odd = (m << 1u32) + 1u32;
        let x = encode_h(&odd);
        prop_assert_eq!(g2_symbolic(&x).unwrap(), g(&x, QMap::COLLATZ).unwrap());
    }

    #[test]
    fn shift_conjugacy(m in big()) {
        prop_assert_eq!(bernoulli_b(&encode_h(&m)).unwrap(), encode_h(&bernoulli_f(&m)));
    }

    #[test]
    fn images_land_in_predicted_cells(m in big(), depth in 1u32..40, q in qmap()) {
        let here = IntervalId::containing(&encode_h(&m), depth).unwrap();
        let there = IntervalId::containing(&encode_h(&step_t(&m, q)), depth).unwrap();
        prop_assert!(image_intervals(here, q).contains(&there));
    }

    #[test]
    fn literal_round_trip(num in any::<u64>(), depth in 64u32..90) {
        let x = Dyadic::new(num, depth).unwrap();
        let parsed: Dyadic = x.to_string().parse().unwrap();
        prop_assert_eq!(&parsed, &x);
        let binary: Dyadic = format!("{}b", x.to_binary_string()).parse().unwrap();
        prop_assert_eq!(binary, x);
    }
}
