use mcc_infer::mcc::{fisher_f, fisher_f_inv, g_half, g_half_inv};
use mcc_infer::sim::{run_coverage, tally_trials, SimConfig};
use mcc_infer::{
    ci_paired, ci_single, paired_scenario, single_scenario, CountsTable4, CountsTable8, Method,
    NaReason, Scenario,
};
use proptest::prelude::*;

const CASES: u32 = 10_000;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: CASES,
        ..ProptestConfig::default()
    }
}

fn counts4() -> impl Strategy<Value = CountsTable4> {
    prop_oneof![
        prop::array::uniform4(0u64..6),
        prop::array::uniform4(0u64..300),
        prop::array::uniform4(0u64..100_000),
    ]
    .prop_filter("nonempty", |c| c.iter().sum::<u64>() > 0)
    .prop_map(CountsTable4::from_array)
}

fn counts8() -> impl Strategy<Value = CountsTable8> {
    prop_oneof![
        prop::array::uniform8(0u64..4),
        prop::array::uniform8(0u64..200),
        prop::array::uniform8(0u64..50_000),
    ]
    .prop_filter("nonempty", |c| c.iter().sum::<u64>() > 0)
    .prop_map(CountsTable8)
}

fn level() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.95), Just(0.9), Just(0.99), 0.5f64..0.999]
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn single_intervals_are_ordered(c in counts4(), level in level()) {
        for m in Method::SINGLE {
            if m == Method::FisherZNaive && c.total() <= 3 {
                continue;
            }
            let ci = ci_single(&c, level, m).unwrap();
            if !ci.is_na() {
                prop_assert!(ci.lower <= ci.estimate && ci.estimate <= ci.upper, "{ci:?}");
            }
        }
    }

    #[test]
    fn fisher_intervals_stay_in_range(c in counts4(), level in level()) {
        for m in [Method::FisherZ, Method::FisherZNaive] {
            if m == Method::FisherZNaive && c.total() <= 3 {
                continue;
            }
            let ci = ci_single(&c, level, m).unwrap();
            if !ci.is_na() {
                prop_assert!(-1.0 <= ci.lower && ci.upper <= 1.0, "{ci:?}");
            }
        }
    }

    #[test]
    fn paired_intervals_are_ordered(c in counts8(), level in level()) {
        for m in Method::PAIRED {
            let ci = ci_paired(&c, level, m).unwrap();
            if !ci.is_na() {
                prop_assert!(ci.lower <= ci.estimate && ci.estimate <= ci.upper, "{ci:?}");
            }
        }
    }

    #[test]
    fn mt_intervals_stay_in_range(c in counts8(), level in level()) {
        let ci = ci_paired(&c, level, Method::Mt).unwrap();
        if !ci.is_na() {
            prop_assert!(-2.0 <= ci.lower && ci.upper <= 2.0, "{ci:?}");
        }
    }

    #[test]
    fn fisher_round_trip(x in -0.999_999f64..0.999_999) {
        prop_assert!((fisher_f_inv(fisher_f(x).unwrap()) - x).abs() <= 1e-12);
    }

    #[test]
    fn mt_transform_round_trip(x in -1.999_999f64..1.999_999) {
        prop_assert!((g_half_inv(g_half(x).unwrap()) - x).abs() <= 1e-12);
    }

    #[test]
    fn swapping_classifiers_negates_intervals(c in counts8(), level in level()) {
        let s = c.swap_classifiers();
        for m in Method::PAIRED {
            let a = ci_paired(&c, level, m).unwrap();
            let b = ci_paired(&s, level, m).unwrap();
            prop_assert_eq!(a.na, b.na);
            if a.estimate.is_finite() {
                prop_assert!((a.estimate + b.estimate).abs() <= 1e-12);
            }
            if !a.is_na() {
                prop_assert!((a.lower + b.upper).abs() <= 1e-12, "{a:?} {b:?}");
                prop_assert!((a.upper + b.lower).abs() <= 1e-12, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn paired_na_nesting(c in counts8()) {
        let simple = ci_paired(&c, 0.95, Method::SimplePaired).unwrap();
        let mt = ci_paired(&c, 0.95, Method::Mt).unwrap();
        let zou = ci_paired(&c, 0.95, Method::Zou).unwrap();
        if simple.is_na() {
            prop_assert_eq!(simple.na, Some(NaReason::UndefinedMcc));
            prop_assert!(mt.is_na() && zou.is_na());
        }
        // |psi| = 2 needs one perfect and one perfectly inverted classifier.
        let p = c.to_probs().unwrap().0;
        let extreme = p.get(1, 0, 1) + p.get(0, 1, 0) == 1.0 || p.get(0, 1, 1) + p.get(1, 0, 0) == 1.0;
        if !extreme {
            prop_assert_eq!(simple.is_na(), mt.is_na());
        }
    }

    #[test]
    fn simulation_split_invariance(
        seed in any::<u64>(),
        m in 1u64..120,
        cut in 0.0f64..1.0,
        paired in any::<bool>(),
        n in 2u64..60,
    ) {
        let scenario = if paired {
            Scenario::Paired(paired_scenario(0.1, 0.6, 0.8).unwrap())
        } else {
            Scenario::Single(single_scenario(0.1, 0.6).unwrap())
        };
        let mut cfg = SimConfig::new(scenario, n, m, seed);
        cfg.methods.retain(|&x| x != Method::FisherZNaive || n > 3);
        let k = ((m as f64) * cut) as u64;
        let whole = tally_trials(&cfg, 0..m).unwrap();
        let split = tally_trials(&cfg, k..m)
            .unwrap()
            .merge(&tally_trials(&cfg, 0..k).unwrap());
        prop_assert_eq!(whole, split);
    }
}

#[test]
fn simulation_independent_of_worker_count() {
    let configs = [
        Scenario::Single(single_scenario(0.1, 0.4).unwrap()),
        Scenario::Paired(paired_scenario(0.5, 0.8, 0.6).unwrap()),
    ];
    for scenario in configs {
        let mut cfg = SimConfig::new(scenario, 50, 20_000, 0xDEC0DE);
        let mut reports = Vec::new();
        for workers in [1, 2, 3, 8] {
            cfg.workers = workers;
            reports.push(run_coverage(&cfg).unwrap());
        }
        for r in &reports[1..] {
            assert_eq!(r, &reports[0]);
        }
        for c in &reports[0].methods {
            assert_eq!(c.tally.evaluated + c.tally.na_total(), cfg.m);
        }
    }
}
