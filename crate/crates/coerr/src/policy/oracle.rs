//! Oracle benchmark: solves each slot's subproblem on the true expected
//! demands instead of estimates. The horizon-coupled problem decouples into
//! independent per-slot knapsacks once the means are known.

use std::sync::Arc;

use crate::kcg::{build_kcg, solution_to_decision, Solver};
use crate::model::{EdgeModel, RentalDecision};

use super::{Feedback, Phase, Policy, PolicyError, SlotView};

pub struct OraclePolicy {
    name: String,
    model: Arc<EdgeModel>,
    solver: Solver,
}

impl OraclePolicy {
    pub fn new(name: impl Into<String>, model: Arc<EdgeModel>, solver: Solver) -> Self {
        Self {
            name: name.into(),
            model,
            solver,
        }
    }
}

impl Policy for OraclePolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, slot: &SlotView<'_>) -> Result<(RentalDecision, Option<Phase>), PolicyError> {
        let means = slot.true_means.ok_or(PolicyError::MissingTrueMeans)?;
        let inst = build_kcg(&self.model, means, &[])?;
        let sol = self.solver.solve(&inst)?;
        Ok((solution_to_decision(&inst, &sol, self.model.n_sbs()), None))
    }

    fn observe(&mut self, _feedback: &Feedback<'_>) -> Result<(), PolicyError> {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Budget, CloudConfig, SbsConfig, TaskProfile};
    use crate::policy::{enumerate_arms, DEFAULT_ARM_CAP};
    use rand::Rng;

    fn table_model(n: usize, budget: f64) -> Arc<EdgeModel> {
        Arc::new(
            EdgeModel::new(
                TaskProfile::new(8e6, 1e9, 10.0).unwrap(),
                CloudConfig::new(2e10, 2e6, 1e8, 0.05).unwrap(),
                (0..n)
                    .map(|id| {
                        SbsConfig::linear(id, vec![0.0, 2.0, 4.0, 6.0], 2e9, 1.0, 150.0, 5e6)
                            .unwrap()
                    })
                    .collect(),
                Budget::new(budget).unwrap(),
            )
            .unwrap(),
        )
    }

    fn decide(model: &Arc<EdgeModel>, means: &[f64]) -> RentalDecision {
        let mut oracle = OraclePolicy::new("oracle", Arc::clone(model), Solver::BranchAndBound);
        let contexts = vec![vec![0.5, 0.5]; model.n_sbs()];
        let (dec, phase) = oracle
            .decide(&SlotView {
                t: 1,
                contexts: &contexts,
                true_means: Some(means),
            })
            .unwrap();
        assert!(phase.is_none());
        dec
    }

    #[test]
    fn zero_means_rent_nothing() {
        let model = table_model(3, 8.0);
        assert!(decide(&model, &[0.0; 3]).is_all_zero());
    }

    #[test]
    fn single_sbs_positive_mean_rents() {
        let model = Arc::new(
            EdgeModel::new(
                TaskProfile::new(8e6, 1e9, 10.0).unwrap(),
                CloudConfig::new(2e10, 2e6, 1e8, 0.05).unwrap(),
                vec![SbsConfig::linear(0, vec![0.0, 2.0], 2e9, 1.0, 150.0, 5e6).unwrap()],
                Budget::new(8.0).unwrap(),
            )
            .unwrap(),
        );
        assert_eq!(decide(&model, &[50.0]).0, vec![2.0]);
    }

    #[test]
    fn missing_means_is_an_error() {
        let model = table_model(2, 8.0);
        let mut oracle = OraclePolicy::new("oracle", model, Solver::BranchAndBound);
        let contexts = vec![vec![0.5, 0.5]; 2];
        let err = oracle
            .decide(&SlotView {
                t: 1,
                contexts: &contexts,
                true_means: None,
            })
            .unwrap_err();
        assert!(matches!(err, PolicyError::MissingTrueMeans));
    }

    #[test]
    fn matches_exhaustive_maximizer_on_random_means() {
        let model = table_model(3, 8.0);
        let table = enumerate_arms(&model, DEFAULT_ARM_CAP).unwrap();
        let mut rng = crate::rng::stream(21, &[3]);
        for _ in 0..50 {
            let means: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..900.0)).collect();
            let dec = decide(&model, &means);
            let value = model.total_utility(&dec, &means).unwrap();
            let best = table
                .arms
                .iter()
                .map(|a| model.total_utility(a, &means).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(
                (value - best).abs() <= 1e-9 * best.abs().max(1.0),
                "oracle {value} vs exhaustive {best}"
            );
        }
    }
}
