mod common;

use itertools::Itertools;
use noma_aoi::combinatorics::{beta_any, beta_u1, brute_force_success_dist, gamma_max, sic_decode};
use noma_aoi::math::elementary_symmetric;
use proptest::prelude::*;

fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 7 => 0.001f64..1.0], k).prop_filter_map(
        "all-zero weights",
        |w| {
            let total: f64 = w.iter().sum();
            (total > 0.0).then(|| w.iter().map(|x| x / total).collect())
        },
    )
}

fn levels_and_q(max_k: usize) -> impl Strategy<Value = Vec<f64>> {
    (1..=max_k).prop_flat_map(simplex)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn anonymous_distribution_is_normalized(q in levels_and_q(5), i in 1usize..=10) {
        let k = q.len();
        let total: f64 = (0..=gamma_max(i, k)).map(|x| beta_any(i, x, &q).unwrap()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-10, "sum = {total}");
    }

    #[test]
    fn tracked_user_is_a_random_member(q in levels_and_q(5), i in 1usize..=10) {
        for x in 1..=gamma_max(i, q.len()) {
            let lhs = beta_u1(i, x, &q).unwrap();
            let rhs = x as f64 / i as f64 * beta_any(i, x, &q).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn all_but_one_decoded_is_impossible(q in levels_and_q(5), x in 1usize..=4) {
        prop_assume!(x < q.len());
        prop_assert_eq!(beta_u1(x + 1, x, &q).unwrap(), 0.0);
        prop_assert_eq!(beta_any(x + 1, x, &q).unwrap(), 0.0);
    }

    #[test]
    fn closed_forms_match_enumeration(q in levels_and_q(4), i in 1usize..=6) {
        let anon = brute_force_success_dist(i, &q, false).unwrap();
        let tracked = brute_force_success_dist(i, &q, true).unwrap();
        for x in 0..=gamma_max(i, q.len()) {
            prop_assert!((anon.get(x) - beta_any(i, x, &q).unwrap()).abs() <= 1e-12);
            if x > 0 {
                prop_assert!((tracked.get(x) - beta_u1(i, x, &q).unwrap()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn elementary_symmetric_matches_subset_sum(
        values in prop::collection::vec(0.0f64..1.0, 0..8),
        r in 0usize..9,
    ) {
        let direct: f64 = values
            .iter()
            .combinations(r)
            .map(|c| c.into_iter().product::<f64>())
            .sum();
        prop_assert!((elementary_symmetric(&values, r) - direct).abs() <= 1e-12);
    }

    #[test]
    fn decoding_agrees_with_oracle(counts in prop::collection::vec(0u32..4, 1..7)) {
        let (successes, cutoff) = sic_decode(&counts);
        let as_usize: Vec<usize> = counts.iter().map(|&c| c as usize).collect();
        let ok = common::decoded_levels(&as_usize);
        prop_assert_eq!(successes, ok.iter().filter(|&&b| b).count());
        prop_assert!(counts[..cutoff].iter().all(|&c| c <= 1));
        prop_assert!(cutoff == counts.len() || counts[cutoff] >= 2);
    }
}

#[test]
fn at_most_k_successes() {
    let q = [0.2, 0.3, 0.5];
    for i in 1..=8 {
        assert!(beta_any(i, gamma_max(i, 3) + 1, &q).is_err());
    }
}
