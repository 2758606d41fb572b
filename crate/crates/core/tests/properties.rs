use ffgalois::ec_finite::{point_count_bsgs, point_count_naive, Curve};
use ffgalois::gl2::Mat2;
use ffgalois::make_field;
use proptest::prelude::*;

fn field_params() -> impl Strategy<Value = (u64, u32)> {
    prop_oneof![Just((5, 1)), Just((7, 2)), Just((11, 3)), Just((13, 1)), Just((5, 4))]
}

proptest! {
    #[test]
    fn field_axioms((p, k) in field_params(), x in any::<u64>(), y in any::<u64>(), z in any::<u64>()) {
        let f = make_field(p, k).unwrap();
        let n = f.order();
        let (a, b, c) = (f.from_index(x % n).unwrap(), f.from_index(y % n).unwrap(), f.from_index(z % n).unwrap());
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), f.zero());
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            prop_assert_eq!(f.pow(a, (n - 1) as u128), f.one());
        }
        prop_assert_eq!(f.frobenius(f.mul(a, b)), f.mul(f.frobenius(a), f.frobenius(b)));
        if f.is_square(a) {
            let r = f.sqrt(a).unwrap();
            prop_assert_eq!(f.square(r), a);
        }
    }

    #[test]
    fn bsgs_matches_naive_count((p, k) in field_params(), x in any::<u64>(), y in any::<u64>(), seed in any::<u64>()) {
        let f = make_field(p, k).unwrap();
        let n = f.order();
        if let Ok(c) = Curve::new(f.clone(), f.from_index(x % n).unwrap(), f.from_index(y % n).unwrap()) {
            let naive = point_count_naive(&c);
            prop_assert_eq!(point_count_bsgs(&c, seed).unwrap(), naive);
            prop_assert!(naive.trace * naive.trace <= 4 * n as i64);
        }
    }

    #[test]
    fn det_and_trace_are_class_functions(ell in prop::sample::select(vec![2u32, 3, 5, 7]), i in any::<usize>(), j in any::<usize>()) {
        let n = (ell as usize).pow(4);
        let (m, g) = (Mat2::from_index(i % n, ell), Mat2::from_index(j % n, ell));
        prop_assert_eq!(m.mul(&g, ell).det(ell), m.det(ell) * g.det(ell) % ell);
        if let Some(gi) = g.inv(ell) {
            let conj = gi.mul(&m, ell).mul(&g, ell);
            prop_assert_eq!(conj.trace(ell), m.trace(ell));
            prop_assert_eq!(conj.det(ell), m.det(ell));
        }
    }
}
