//! Online rental policies sharing one decide/observe interface.
//!
//! A policy sees the per-SBS contexts of the current slot, emits a feasible
//! rental decision, and afterwards observes the realized outcome. Policies
//! are strictly sequential in the slot index; parallelism lives one level
//! up, across replications.

use thiserror::Error;

use crate::estimator::EstimatorError;
use crate::kcg::KcgError;
use crate::model::{ModelError, RentalDecision};

mod arms;
mod coerr_policy;
mod cucb;
mod linucb;
mod oracle;
mod random;

pub use arms::{enumerate_arms, ArmTable, DEFAULT_ARM_CAP};
pub use coerr_policy::{
    control_threshold, design_parameters, doubling_phase_length, explore_select,
    under_explored_set, CoerrAudit, CoerrParams, CoerrPolicy, DoublingCoerr,
};
pub use cucb::{ucb1_index, CucbPolicy};
pub use linucb::{LinUcbConfig, LinUcbPolicy};
pub use oracle::OraclePolicy;
pub use random::RandomPolicy;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Kcg(#[from] KcgError),

    #[error(transparent)]
    Estimator(#[from] EstimatorError),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("policy requires true expected demands but none were provided")]
    MissingTrueMeans,

    #[error("observe() called without a preceding decide()")]
    ObserveBeforeDecide,

    #[error("arm space {size} exceeds cap {cap}")]
    ArmSpaceTooLarge { size: u128, cap: u128 },

    #[error("no feasible arms to enumerate")]
    EmptyArmTable,

    #[error("capacity {capacity} is not in SBS {sbs}'s rental set")]
    CapacityNotOffered { capacity: f64, sbs: usize },

    #[error("unknown policy '{0}'")]
    UnknownPolicy(String),
}

/// COERR's per-slot phase tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Explore,
    SemiExplore,
    Exploit,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Phase::Explore => "explore",
            Phase::SemiExplore => "semi-explore",
            Phase::Exploit => "exploit",
        };
        write!(f, "{s}")
    }
}

/// What a policy sees before deciding in slot `t` (1-based).
#[derive(Debug, Clone, Copy)]
pub struct SlotView<'a> {
    pub t: u64,
    /// Per-SBS context vectors in `[0,1]^D`.
    pub contexts: &'a [Vec<f64>],
    /// True expected demands for the current contexts; present in synthetic
    /// runs and for the two-pass trace oracle, consumed only by policies
    /// that are allowed to cheat.
    pub true_means: Option<&'a [f64]>,
}

/// What a policy learns after the slot played out.
#[derive(Debug, Clone, Copy)]
pub struct Feedback<'a> {
    pub decision: &'a RentalDecision,
    /// Realized per-SBS demand.
    pub demands: &'a [f64],
    /// Realized total utility of `decision`.
    pub utility: f64,
}

pub trait Policy {
    fn name(&self) -> &str;

    /// Decide the rental for the slot; COERR-family policies also report
    /// their phase.
    fn decide(&mut self, slot: &SlotView<'_>) -> Result<(RentalDecision, Option<Phase>), PolicyError>;

    /// Digest the realized outcome of the decision this policy just made.
    fn observe(&mut self, feedback: &Feedback<'_>) -> Result<(), PolicyError>;
}
