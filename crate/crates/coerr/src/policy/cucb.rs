//! Combinatorial UCB over the enumerated arm table.
//!
//! UCB1 run on whole rental decisions: play every arm once in enumeration
//! order, then pick the arm maximizing `mean + sqrt(2 ln t / pulls)`.
//! UCB1 assumes rewards in [0, 1], so realized utilities are divided by the
//! coarse upper bound `(B / w_min) · λ_max · d_max` before updating; the
//! normalization choice is configurable via [`CucbPolicy::with_scale`].

use std::sync::Arc;

use crate::model::{EdgeModel, RentalDecision};

use super::{enumerate_arms, ArmTable, Feedback, Phase, Policy, PolicyError, SlotView, DEFAULT_ARM_CAP};

/// UCB1 index, `mean + sqrt(2 ln t / pulls)`.
pub fn ucb1_index(mean: f64, pulls: u64, t: f64) -> f64 {
    mean + (2.0 * t.ln() / pulls as f64).sqrt()
}

pub struct CucbPolicy {
    name: String,
    table: ArmTable,
    pulls: Vec<u64>,
    means: Vec<f64>,
    scale: f64,
    last_arm: Option<usize>,
}

impl CucbPolicy {
    pub fn new(name: impl Into<String>, model: Arc<EdgeModel>) -> Result<Self, PolicyError> {
        let table = enumerate_arms(&model, DEFAULT_ARM_CAP)?;
        // Per-slot utility can involve at most B/w_min rented SBSs, each
        // contributing at most λ_max · d_max.
        let scale = (model.budget.value() / model.min_nonzero_price()).max(1.0)
            * model.max_admission_cap()
            * model.task.max_delay;
        let n = table.len();
        Ok(Self {
            name: name.into(),
            table,
            pulls: vec![0; n],
            means: vec![0.0; n],
            scale: scale.max(f64::MIN_POSITIVE),
            last_arm: None,
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale.max(f64::MIN_POSITIVE);
        self
    }

    pub fn table(&self) -> &ArmTable {
        &self.table
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }
}

impl Policy for CucbPolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, slot: &SlotView<'_>) -> Result<(RentalDecision, Option<Phase>), PolicyError> {
        // Initialization sweep: first unplayed arm in enumeration order.
        let arm = if let Some(idx) = self.pulls.iter().position(|&p| p == 0) {
            idx
        } else {
            let t = slot.t as f64;
            let mut best = 0;
            let mut best_index = f64::NEG_INFINITY;
            for (i, (&mean, &pulls)) in self.means.iter().zip(&self.pulls).enumerate() {
                let index = ucb1_index(mean, pulls, t);
                if index > best_index {
                    best_index = index;
                    best = i;
                }
            }
            best
        };
        self.last_arm = Some(arm);
        Ok((self.table.arms[arm].clone(), None))
    }

    fn observe(&mut self, feedback: &Feedback<'_>) -> Result<(), PolicyError> {
        let arm = self.last_arm.take().ok_or(PolicyError::ObserveBeforeDecide)?;
        let reward = feedback.utility / self.scale;
        self.pulls[arm] += 1;
        let n = self.pulls[arm] as f64;
        self.means[arm] += (reward - self.means[arm]) / n;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Budget, CloudConfig, SbsConfig, TaskProfile};
    use approx::assert_relative_eq;

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

    #[test]
    fn ucb1_index_value() {
        // mean 5, pulls 4, t = e^8 → 5 + sqrt(2·8/4) = 7.
        assert_relative_eq!(ucb1_index(5.0, 4, (8.0f64).exp()), 7.0, max_relative = 1e-12);
    }

    #[test]
    fn initialization_sweep_in_enumeration_order() {
        let model = table_model(2, 8.0);
        let mut cucb = CucbPolicy::new("cucb", Arc::clone(&model)).unwrap();
        let contexts = vec![vec![0.5, 0.5]; 2];
        let n_arms = cucb.table().len();
        for t in 1..=n_arms as u64 {
            let (dec, _) = cucb
                .decide(&SlotView {
                    t,
                    contexts: &contexts,
                    true_means: None,
                })
                .unwrap();
            assert_eq!(dec, cucb.table().arms[(t - 1) as usize]);
            cucb.observe(&Feedback {
                decision: &dec,
                demands: &[0.0, 0.0],
                utility: 0.0,
            })
            .unwrap();
        }
        assert!(cucb.pulls().iter().all(|&p| p == 1));
    }

    #[test]
    fn exploitation_dominates_with_many_pulls() {
        let model = table_model(1, 8.0);
        // Arms: [0], [2], [4], [6] → 4 arms.
        let mut cucb = CucbPolicy::new("cucb", Arc::clone(&model)).unwrap().with_scale(1.0);
        let n_arms = cucb.table().len();
        // Pretend long history: arm 1 has mean 10, others 0, equal pulls.
        for i in 0..n_arms {
            cucb.pulls[i] = 10_000;
            cucb.means[i] = if i == 1 { 10.0 } else { 0.0 };
        }
        let contexts = vec![vec![0.5, 0.5]];
        let (dec, _) = cucb
            .decide(&SlotView {
                t: 40_001,
                contexts: &contexts,
                true_means: None,
            })
            .unwrap();
        assert_eq!(dec, cucb.table().arms[1]);
    }

    #[test]
    fn reward_scaling_keeps_means_in_unit_range() {
        let model = table_model(2, 8.0);
        let mut cucb = CucbPolicy::new("cucb", Arc::clone(&model)).unwrap();
        let contexts = vec![vec![0.5, 0.5]; 2];
        let demands = vec![900.0, 900.0];
        for t in 1..=60u64 {
            let (dec, _) = cucb
                .decide(&SlotView {
                    t,
                    contexts: &contexts,
                    true_means: None,
                })
                .unwrap();
            let utility = model.total_utility(&dec, &demands).unwrap();
            cucb.observe(&Feedback {
                decision: &dec,
                demands: &demands,
                utility,
            })
            .unwrap();
        }
        assert!(cucb.means.iter().all(|&m| (0.0..=1.0).contains(&m)));
    }
}
