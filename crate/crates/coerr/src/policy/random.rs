//! Uniform-random baseline over the feasible arm table.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::model::{EdgeModel, RentalDecision};

use super::{enumerate_arms, ArmTable, Feedback, Phase, Policy, PolicyError, SlotView, DEFAULT_ARM_CAP};

pub struct RandomPolicy {
    name: String,
    table: ArmTable,
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(name: impl Into<String>, model: Arc<EdgeModel>, seed: u64) -> Result<Self, PolicyError> {
        Ok(Self {
            name: name.into(),
            table: enumerate_arms(&model, DEFAULT_ARM_CAP)?,
            rng: crate::rng::stream(seed, &[]),
        })
    }

    pub fn table(&self) -> &ArmTable {
        &self.table
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, _slot: &SlotView<'_>) -> Result<(RentalDecision, Option<Phase>), PolicyError> {
        let idx = self.rng.random_range(0..self.table.len());
        Ok((self.table.arms[idx].clone(), None))
    }

    fn observe(&mut self, _feedback: &Feedback<'_>) -> Result<(), PolicyError> {
        Ok(())
    }
}
