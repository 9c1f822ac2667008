use proptest::prelude::*;
use seqdisc::numerics::{tau_pow, C64};
use seqdisc::optimality::global_optimum;
use seqdisc::states::amplitudes_from_overlap;
use seqdisc::{canonicalize, check_global_optimality, Overlap};

fn admissible() -> impl Strategy<Value = C64> {
    (0.02f64..0.95, 0.0f64..std::f64::consts::TAU)
        .prop_map(|(r, phi)| C64::from_polar(r, phi))
        .prop_filter("rank three", |k| amplitudes_from_overlap(*k).is_ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn joint_optimum_matches_product_overlap(ka in admissible(), kb in admissible()) {
        let pair = canonicalize(Overlap::new(ka).unwrap(), Overlap::new(kb).unwrap()).unwrap();
        let k = ka * kb;
        let oracle = (0..3).map(|n| 1.0 + 2.0 * (tau_pow(n) * k).re).fold(f64::INFINITY, f64::min);
        prop_assert!((global_optimum(&pair) - oracle).abs() < 1e-12);
    }

    #[test]
    fn verdict_is_relabeling_invariant(ka in admissible(), kb in admissible(), sa in 0i64..3, sb in 0i64..3, conj: bool) {
        let base = check_global_optimality(Overlap::new(ka).unwrap(), Overlap::new(kb).unwrap()).unwrap();
        let t = |k: C64, s| if conj { tau_pow(s) * k.conj() } else { tau_pow(s) * k };
        let image = check_global_optimality(Overlap::new(t(ka, sa)).unwrap(), Overlap::new(t(kb, sb)).unwrap()).unwrap();
        prop_assume!(base.condition_values.map_or(true, |c| c[0].abs() > 1e-9 && c[1].abs() > 1e-9));
        prop_assert_eq!(base.verdict, image.verdict);
        prop_assert!((base.p_global - image.p_global).abs() < 1e-12);
    }
}
