mod common;

use num::ToPrimitive;
use proptest::prelude::*;
use zc_core::analysis::{
    build_chain, exact, exact_expected_time, expected_cycles, reservation_pmf,
    reservation_probability, reservation_probability_inclusion_exclusion, upper_bound_time,
    DEFAULT_EPSILON,
};
use zc_core::TimingParameters;

#[test]
fn pmf_matches_brute_force_up_to_five_slots() {
    for n in 1..=5 {
        for m in 1..=n {
            let counts = common::singleton_counts(n, m);
            let total = (n as f64).powi(m as i32);
            let pmf = reservation_pmf(n, m).unwrap();
            for k in 0..=m {
                let want = counts[k] as f64 / total;
                assert!((pmf[k] - want).abs() < 1e-12, "N={n} M={m} k={k}");
            }
        }
    }
}

#[test]
fn library_enumeration_agrees_with_test_enumeration() {
    for (n, m) in [(4, 3), (5, 5), (6, 2)] {
        assert_eq!(
            exact::enumerate_singleton_counts(n, m),
            common::singleton_counts(n, m)
        );
    }
}

#[test]
fn rational_route_agrees_at_large_sizes() {
    for (n, m) in [(128, 128), (64, 40), (100, 7), (32, 32)] {
        for k in [0, 1, m / 3, m / 2, m - 1, m] {
            let want = exact::reservation_probability(n, m, k).to_f64().unwrap();
            let got = reservation_probability(n, m, k).unwrap();
            let scale = want.abs().max(1e-300);
            assert!(
                (got - want).abs() <= 1e-9 * scale || (got - want).abs() < 1e-280,
                "N={n} M={m} k={k}: {got:e} vs {want:e}"
            );
        }
    }
}

#[test]
fn two_by_two_needs_two_cycles() {
    let chain = build_chain(2, 2).unwrap();
    assert!((expected_cycles(&chain).unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn expected_cycles_non_decreasing_in_m() {
    for n in [8, 16, 32] {
        let values: Vec<f64> = (1..=n)
            .map(|m| expected_cycles(&build_chain(n, m).unwrap()).unwrap())
            .collect();
        for w in values.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "N={n}: {values:?}");
        }
    }
}

#[test]
fn cycle_count_matches_monte_carlo() {
    let timing = TimingParameters::ieee80211b_reference();
    for (n, m) in [(8, 8), (8, 3), (16, 12)] {
        let (cycles, _) = common::cycle_process(n, m, &timing, 40_000, 7 + n as u64);
        let e = expected_cycles(&build_chain(n, m).unwrap()).unwrap();
        assert!(cycles.contains_99(e), "N={n} M={m}: {e} vs {cycles:?}");
    }
}

#[test]
fn exact_time_of_single_station_is_one_round() {
    let t = TimingParameters::ieee80211b_reference();
    let chain = build_chain(16, 1).unwrap();
    let e = exact_expected_time(&chain, &t, DEFAULT_EPSILON).unwrap();
    let round = (t.t_g + 15.0 * t.t_v) * 1e-6;
    assert!((e - round).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chain_rows_are_stochastic_and_monotone(n in 1usize..48, frac in 0.0f64..=1.0) {
        let m = ((n as f64 * frac).round() as usize).max(1);
        let chain = build_chain(n, m).unwrap();
        for i in 0..=m {
            let row = chain.row(i);
            let sum: f64 = row.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-10, "row {} sums to {}", i, sum);
            prop_assert!(row[..i].iter().all(|&p| p == 0.0));
            prop_assert!(row.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
        prop_assert_eq!(chain.probability(m, m), 1.0);
    }

    #[test]
    fn both_float_routes_agree(n in 1usize..=14, m in 1usize..=14, k in 0usize..=14) {
        prop_assume!(k <= m);
        let a = reservation_probability(n, m, k).unwrap();
        let b = reservation_probability_inclusion_exclusion(n, m, k).unwrap();
        prop_assert!((a - b).abs() < 1e-11);
    }

    #[test]
    fn exact_time_within_bound(
        n in 2usize..64,
        frac in 0.05f64..=1.0,
        t_g in 500.0f64..3000.0,
        t_b in 500.0f64..3000.0,
        t_v in 5.0f64..50.0,
        t_s in 0.0f64..5.0,
    ) {
        let m = ((n as f64 * frac).round() as usize).clamp(1, n);
        let timing = TimingParameters::new(t_g, t_b, t_v, t_s).unwrap();
        let chain = build_chain(n, m).unwrap();
        let exact = exact_expected_time(&chain, &timing, DEFAULT_EPSILON).unwrap();
        let bound = upper_bound_time(&chain, &timing).unwrap();
        prop_assert!(exact > 0.0);
        prop_assert!(exact <= bound * (1.0 + 1e-9), "exact {} > bound {}", exact, bound);
    }
}
