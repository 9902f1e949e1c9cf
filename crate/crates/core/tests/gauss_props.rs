use proptest::prelude::*;
use qselberg::gauss::{
    build_A_factors, build_K_factors, build_R_factors, build_R_inverse, compare, det_formula,
    max_scale, term_scale, CMatrix, DdMatrix, DetKind, Order,
};
use qselberg::qcore::sample_params;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn both_orders_give_one_matrix(seed in 0u64..1_000_000, n in 1usize..=6) {
        let p = sample_params(seed, n).unwrap();
        for build in [build_R_factors, build_A_factors] {
            let f = build(&p, Order::Ldu).unwrap();
            let g = build(&p, Order::Udl).unwrap();
            prop_assert!(f.is_well_formed() && g.is_well_formed());
            let r = compare(&f.product(), &g.product(), &max_scale(&f.term_scale(), &g.term_scale()));
            prop_assert!(r.max_rel < 1e-10, "{:?}", r);
        }
    }

    #[test]
    fn inverse_of_transition(seed in 0u64..1_000_000, n in 1usize..=6) {
        let p = sample_params(seed, n).unwrap();
        let f = build_R_factors(&p, Order::Ldu).unwrap();
        let g = build_R_inverse(&p, Order::Udl).unwrap();
        let mut factors: Vec<&CMatrix> = f.factors().to_vec();
        factors.extend(g.factors());
        let prod = factors[1..].iter().fold(factors[0].clone(), |acc, m| &acc * *m);
        let r = compare(&prod, &CMatrix::identity(n + 1), &term_scale(&factors));
        prop_assert!(r.max_rel < 1e-10, "{:?}", r);
    }

    #[test]
    fn determinants_by_elimination(seed in 0u64..1_000_000, n in 1usize..=6) {
        let p = sample_params(seed, n).unwrap();
        for (k, kind) in [(1, DetKind::K1), (2, DetKind::K2)] {
            let factors = build_K_factors(&p, k).unwrap();
            let d = DdMatrix::product(&factors.iter().collect::<Vec<_>>()).det_elimination();
            let f = det_formula(&p, kind).unwrap();
            prop_assert!((d - f).norm() <= 1e-9 * f.norm(), "K{} {} {}", k, d, f);
        }
    }
}
