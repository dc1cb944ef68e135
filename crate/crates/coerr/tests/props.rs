//! Property tests for the solver and estimator invariants.

use coerr::estimator::{hoeffding_tail, partition_point, CellStats, Partition};
use coerr::kcg::{
    solve_branch_and_bound, solve_brute_force, solve_exact_dp, solve_greedy, KcgInstance, KcgItem,
};
use coerr::model::{Budget, CloudConfig, EdgeModel, RentalDecision, SbsConfig, TaskProfile};
use proptest::prelude::*;

fn arb_instance() -> impl Strategy<Value = KcgInstance> {
    (1usize..=10, 1usize..=4, 0u32..=15).prop_flat_map(|(n_items, n_groups, budget)| {
        let items = proptest::collection::vec(
            (1u32..=6, 0.0f64..100.0, 0usize..n_groups),
            n_items..=n_items,
        );
        items.prop_map(move |specs| {
            let items: Vec<KcgItem> = specs
                .into_iter()
                .enumerate()
                .map(|(i, (w, v, g))| KcgItem {
                    id: i,
                    group: g,
                    capacity: i as f64 + 1.0,
                    weight: f64::from(w),
                    value: v,
                })
                .collect();
            KcgInstance::new(items, f64::from(budget), vec![]).expect("valid instance")
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_solvers_agree_and_stay_feasible(inst in arb_instance()) {
        let bf = solve_brute_force(&inst).unwrap();
        let dp = solve_exact_dp(&inst).unwrap();
        let bb = solve_branch_and_bound(&inst).unwrap();
        prop_assert_eq!(bf.value, dp.value);
        prop_assert_eq!(bf.value, bb.value);
        for sol in [&bf, &dp, &bb] {
            prop_assert!(inst.is_feasible_selection(&sol.chosen));
            prop_assert!(sol.weight <= inst.budget());
        }
    }

    #[test]
    fn greedy_feasible_and_bounded_by_optimum(inst in arb_instance()) {
        let greedy = solve_greedy(&inst).unwrap();
        let opt = solve_brute_force(&inst).unwrap();
        prop_assert!(inst.is_feasible_selection(&greedy.chosen));
        prop_assert!(greedy.value <= opt.value + 1e-9);
    }

    #[test]
    fn optimum_monotone_in_budget(inst in arb_instance(), extra in 1u32..=10) {
        let bigger = KcgInstance::new(
            inst.items().to_vec(),
            inst.budget() + f64::from(extra),
            vec![],
        )
        .unwrap();
        let v1 = solve_brute_force(&inst).unwrap().value;
        let v2 = solve_brute_force(&bigger).unwrap().value;
        prop_assert!(v2 >= v1);
    }

    #[test]
    fn estimate_is_exact_running_mean(values in proptest::collection::vec(0.0f64..1000.0, 1..200)) {
        let mut cell = CellStats::default();
        for &v in &values {
            cell.record(v);
        }
        let mean: f64 = values.iter().sum::<f64>() / values.len() as f64;
        // Identical accumulation order makes this exact, not approximate.
        prop_assert_eq!(cell.estimate().unwrap(), mean);
        prop_assert_eq!(cell.count, values.len() as u64);
    }

    #[test]
    fn hoeffding_tail_monotone_in_count_and_epsilon(
        c in 1u64..1000,
        eps in 0.1f64..200.0,
        range in 10.0f64..1000.0,
    ) {
        let base = hoeffding_tail(eps, c, range);
        // base can underflow to +0 for huge exponents.
        prop_assert!((0.0..=1.0).contains(&base));
        prop_assert!(hoeffding_tail(eps, c + 1, range) <= base);
        prop_assert!(hoeffding_tail(eps * 1.01, c, range) <= base);
    }

    #[test]
    fn partition_point_stays_in_bounds(
        x0 in 0.0f64..=1.0,
        x1 in 0.0f64..=1.0,
        h in 1u32..=50,
    ) {
        let part = Partition::new(h, 2).unwrap();
        let cell = partition_point(&[x0, x1], &part).unwrap();
        prop_assert!(cell.0.iter().all(|&c| c < h));
    }

    #[test]
    fn total_utility_is_permutation_invariant(
        demands in proptest::collection::vec(0.0f64..1200.0, 4..=4),
        picks in proptest::collection::vec(0usize..4, 4..=4),
    ) {
        let model = EdgeModel::new(
            TaskProfile::new(8e6, 1e9, 10.0).unwrap(),
            CloudConfig::new(2e10, 2e6, 1e8, 0.05).unwrap(),
            (0..4)
                .map(|id| {
                    SbsConfig::linear(id, vec![0.0, 2.0, 4.0, 6.0], 2e9, 1.0, 150.0, 5e6).unwrap()
                })
                .collect(),
            Budget::new(1e9).unwrap(),
        )
        .unwrap();
        let options = [0.0, 2.0, 4.0, 6.0];
        let dec = RentalDecision(picks.iter().map(|&p| options[p]).collect());
        let u = model.total_utility(&dec, &demands).unwrap();

        // Rotate the (SBS, demand) pairs; homogeneous SBSs make the sum
        // invariant up to float tolerance.
        let mut rot_dec = dec.0.clone();
        rot_dec.rotate_left(1);
        let mut rot_dem = demands.clone();
        rot_dem.rotate_left(1);
        let u_rot = model.total_utility(&RentalDecision(rot_dec), &rot_dem).unwrap();
        prop_assert!((u - u_rot).abs() <= 1e-9 * u.abs().max(1.0));
    }
}
