use proptest::prelude::*;
use slowclt::harness::{theorem1_rhs_with, theorem2_rhs_with, BoundWeights};
use slowclt::metrics::{kolmogorov_laws, scale_cdf, sup_distance, Law, SumLaw};
use slowclt::ScalingRule;

fn law() -> impl Strategy<Value = Law> {
    (-2.0..2.0f64, 0.2..3.0f64, any::<bool>()).prop_map(|(m, s, g)| {
        if g {
            Law::Gaussian { mean: m, sd: s }
        } else {
            Law::Cauchy { location: m, scale: s }
        }
    })
}

fn d(p: Law, q: Law) -> f64 {
    kolmogorov_laws(&SumLaw::of(&[p]), &SumLaw::of(&[q])).value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kolmogorov_is_a_metric(p in law(), q in law(), r in law()) {
        prop_assert!(d(p, p) == 0.0);
        prop_assert!((d(p, q) - d(q, p)).abs() < 1e-9);
        prop_assert!(d(p, r) <= d(p, q) + d(q, r) + 1e-6);
    }

    #[test]
    fn kolmogorov_ignores_common_scaling(p in law(), q in law(), a in 0.1..10.0f64) {
        let f = |x: f64| p.cdf(x);
        let g = |x: f64| q.cdf(x);
        let base = sup_distance(f, g, -200.0, 200.0, 40_001, &[]).value;
        let scaled = sup_distance(scale_cdf(f, a).unwrap(), scale_cdf(g, a).unwrap(), -200.0 * a, 200.0 * a, 40_001, &[]).value;
        prop_assert!((base - scaled).abs() < 1e-9, "{} vs {}", base, scaled);
    }

    #[test]
    fn bound_rhs_linear_in_c(c in 0.01..0.99f64, w in 0.01..1.0f64, r in 0.1..3.0f64, e in 3.0..200.0f64) {
        let weights = BoundWeights { first: w, first_z: 1.0, second: 2.0 * w, second_z: 0.0 };
        let rule = ScalingRule::power_log(2.0, r).unwrap();
        let n = 10f64.powf(e);
        let gap = rule.gap(n).unwrap();
        let (a, _) = theorem1_rhs_with(&weights, &rule, n, c).unwrap();
        let (b, _) = theorem2_rhs_with(&weights, &rule, n, c).unwrap();
        prop_assert_eq!(a, c * w * gap);
        prop_assert_eq!(b, c * 2.0 * w * gap);
    }
}
