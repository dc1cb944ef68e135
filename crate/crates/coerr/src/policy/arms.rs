//! Enumeration of feasible rental decisions into a flat arm table.
//!
//! CUCB, LinUCB, and Random all act on the same table for a given model, so
//! their arm indices are directly comparable. Arms are enumerated in
//! lexicographic order over per-SBS rental-set positions; the all-zero
//! decision is arm 0.

use crate::model::{EdgeModel, RentalDecision};

use super::PolicyError;

/// Default ceiling on the raw product space `|F_1|·…·|F_N|`.
pub const DEFAULT_ARM_CAP: u128 = 20_000_000;

/// Feasible decisions of a model, in enumeration order.
#[derive(Debug, Clone)]
pub struct ArmTable {
    pub arms: Vec<RentalDecision>,
}

impl ArmTable {
    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }
}

/// Enumerate every decision with total price within the budget, including
/// the all-zero decision. Errs when the raw product space exceeds `cap`.
pub fn enumerate_arms(model: &EdgeModel, cap: u128) -> Result<ArmTable, PolicyError> {
    let size: u128 = model
        .sbss
        .iter()
        .map(|s| s.rental_set.len() as u128)
        .product();
    if size > cap {
        return Err(PolicyError::ArmSpaceTooLarge { size, cap });
    }

    let budget = model.budget.value();
    let mut arms = Vec::new();
    let mut current = vec![0.0; model.n_sbs()];

    fn recurse(
        model: &EdgeModel,
        budget: f64,
        depth: usize,
        spent: f64,
        current: &mut Vec<f64>,
        arms: &mut Vec<RentalDecision>,
    ) {
        if depth == model.n_sbs() {
            arms.push(RentalDecision(current.clone()));
            return;
        }
        for &f in &model.sbss[depth].rental_set {
            let cost = model.sbss[depth].price_of(f);
            // Prices are non-negative, so overspending can only get worse.
            if spent + cost > budget {
                continue;
            }
            current[depth] = f;
            recurse(model, budget, depth + 1, spent + cost, current, arms);
        }
        current[depth] = 0.0;
    }

    recurse(model, budget, 0, 0.0, &mut current, &mut arms);
    if arms.is_empty() {
        return Err(PolicyError::EmptyArmTable);
    }
    Ok(ArmTable { arms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Budget, CloudConfig, SbsConfig, TaskProfile};

    fn table_model(n: usize, budget: f64) -> EdgeModel {
        EdgeModel::new(
            TaskProfile::new(8e6, 1e9, 10.0).unwrap(),
            CloudConfig::new(2e10, 2e6, 1e8, 0.05).unwrap(),
            (0..n)
                .map(|id| {
                    SbsConfig::linear(id, vec![0.0, 2.0, 4.0, 6.0], 2e9, 1.0, 150.0, 5e6).unwrap()
                })
                .collect(),
            Budget::new(budget).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn reference_arm_counts() {
        for (n, expected) in [(5, 121), (8, 487), (10, 991)] {
            let table = enumerate_arms(&table_model(n, 8.0), DEFAULT_ARM_CAP).unwrap();
            assert_eq!(table.len(), expected, "N = {n}");
        }
    }

    #[test]
    fn all_arms_feasible_and_distinct() {
        let model = table_model(5, 8.0);
        let table = enumerate_arms(&model, DEFAULT_ARM_CAP).unwrap();
        assert!(table.arms.iter().all(|a| model.check_feasible(a)));
        assert_eq!(table.arms[0], RentalDecision::zeros(5));
        for i in 1..table.len() {
            assert_ne!(table.arms[i - 1], table.arms[i]);
        }
    }

    #[test]
    fn generous_budget_yields_full_product() {
        let model = table_model(3, 1e6);
        let table = enumerate_arms(&model, DEFAULT_ARM_CAP).unwrap();
        assert_eq!(table.len(), 4usize.pow(3));
    }

    #[test]
    fn cap_is_enforced() {
        let model = table_model(5, 8.0);
        assert!(matches!(
            enumerate_arms(&model, 100),
            Err(PolicyError::ArmSpaceTooLarge { size: 1024, cap: 100 })
        ));
    }
}
